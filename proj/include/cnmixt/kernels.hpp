#ifndef CNMIXT_KERNELS_HPP
#define CNMIXT_KERNELS_HPP

#include <Eigen/Dense>
#include <vector>

namespace cnmixt::kernels {

// Row-parallel inner loops of the fitting algorithm (OpenMP). Reductions
// accumulate fixed-size row blocks that are combined in block order, so
// results do not depend on the number of threads. kernels::serial holds
// plain-loop reference implementations used by the tests and the
// benchmark.

inline constexpr int kBlockRows = 1024;

// Per-component quantities prepared once per iteration.
struct ComponentParams {
  Eigen::VectorXd mu;
  Eigen::MatrixXd chol_lower;  // lower Cholesky factor of Sigma_g
  double log_det = 0.0;
};

// n x G squared Mahalanobis distances delta(x_i, mu_g; Sigma_g).
Eigen::MatrixXd mahalanobis_matrix(const Eigen::MatrixXd& data,
                                   const std::vector<ComponentParams>& comps);

struct PosteriorResult {
  Eigen::MatrixXd z;  // n x G, row-stochastic (labeled rows: indicator)
  Eigen::MatrixXd v;  // n x G, posterior probability of the good branch
  double loglik = 0.0;
};

// E-step posteriors and the observed-data log-likelihood, all in log
// domain. `labels` is empty (clustering) or length n with -1 for
// unlabeled rows. Throws NumericError on non-finite densities.
PosteriorResult posterior_update(const Eigen::MatrixXd& delta,
                                 const std::vector<ComponentParams>& comps,
                                 const Eigen::VectorXd& pi,
                                 const Eigen::VectorXd& alpha,
                                 const Eigen::VectorXd& eta,
                                 const std::vector<int>& labels);

struct Moments {
  Eigen::VectorXd group_size;  // n_g = sum_i z_ig
  Eigen::VectorXd good_mass;   // sum_i z_ig v_ig
  Eigen::VectorXd weight_sum;  // s_g with weights v + (1 - v)/eta
  std::vector<Eigen::VectorXd> mu;
  std::vector<Eigen::MatrixXd> scatter;  // W_g around the fresh mu_g
};

// Down-weighted group moments feeding CM-step 1.
Moments weighted_moments(const Eigen::MatrixXd& data, const Eigen::MatrixXd& z,
                         const Eigen::MatrixXd& v, const Eigen::VectorXd& eta);

// Per-group sums over rows of z_ig (1 - v_ig) and z_ig (1 - v_ig) delta_ig,
// the two coefficients of the eta objective.
void bad_mass_sums(const Eigen::MatrixXd& z, const Eigen::MatrixXd& v,
                   const Eigen::MatrixXd& delta, Eigen::VectorXd& mass,
                   Eigen::VectorXd& weighted_delta);

namespace serial {

Eigen::MatrixXd mahalanobis_matrix(const Eigen::MatrixXd& data,
                                   const std::vector<ComponentParams>& comps);
PosteriorResult posterior_update(const Eigen::MatrixXd& delta,
                                 const std::vector<ComponentParams>& comps,
                                 const Eigen::VectorXd& pi,
                                 const Eigen::VectorXd& alpha,
                                 const Eigen::VectorXd& eta,
                                 const std::vector<int>& labels);
Moments weighted_moments(const Eigen::MatrixXd& data, const Eigen::MatrixXd& z,
                         const Eigen::MatrixXd& v, const Eigen::VectorXd& eta);
void bad_mass_sums(const Eigen::MatrixXd& z, const Eigen::MatrixXd& v,
                   const Eigen::MatrixXd& delta, Eigen::VectorXd& mass,
                   Eigen::VectorXd& weighted_delta);

}  // namespace serial

}  // namespace cnmixt::kernels

#endif
