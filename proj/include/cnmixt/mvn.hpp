#ifndef CNMIXT_MVN_HPP
#define CNMIXT_MVN_HPP

#include <Eigen/Dense>
#include <vector>

#include "cnmixt/rng.hpp"

namespace cnmixt {

struct GaussianParams {
  Eigen::VectorXd mu;     // location, length p
  Eigen::MatrixXd sigma;  // scale, p x p symmetric positive definite
};

struct ContaminationParams {
  double alpha;  // proportion of good observations, in (0, 1)
  double eta;    // covariance inflation for bad observations, > 1
};

// Lower-triangular Cholesky factor of an SPD matrix; the canonical SPD
// check and the solver behind every Mahalanobis distance and log density.
// Throws NonSpdError (with the matrix printed) if factorization fails.
class CholeskyFactor {
 public:
  static CholeskyFactor compute(const Eigen::MatrixXd& sigma);

  double mahalanobis_sq(const Eigen::VectorXd& x,
                        const Eigen::VectorXd& mu) const;
  double log_det() const { return log_det_; }
  int dim() const { return static_cast<int>(lower_.rows()); }
  const Eigen::MatrixXd& lower() const { return lower_; }

 private:
  Eigen::MatrixXd lower_;
  double log_det_ = 0.0;
};

// (x - mu)' sigma^{-1} (x - mu) via triangular solve.
double mahalanobis_sq(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                      const Eigen::MatrixXd& sigma);

double log_dmvnorm(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                   const Eigen::MatrixXd& sigma);

// Log density of the contaminated normal
//   alpha * phi(x; mu, sigma) + (1 - alpha) * phi(x; mu, eta * sigma),
// combined with log-sum-exp. Large eta makes the two branch densities
// differ by hundreds of orders of magnitude, so everything stays in logs.
double log_dcn(const Eigen::VectorXd& x, const GaussianParams& gauss,
               const ContaminationParams& cont);

// Precomputed factorization form used by the inner loops: log phi for the
// good branch; the bad branch follows from the same factor since
// delta(x; mu, eta*sigma) = delta(x; mu, sigma) / eta and
// log det(eta*sigma) = log det(sigma) + p log eta.
double log_dmvnorm(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                   const CholeskyFactor& chol);
double log_dcn(double log_phi_good, double log_phi_bad, double alpha);

struct CnSample {
  Eigen::MatrixXd points;  // n x p
  std::vector<char> good;  // 1 if drawn from the reference branch
};

// Random deviates from the contaminated normal. Each row comes from
// phi(mu, sigma) with probability alpha and from phi(mu, eta*sigma)
// otherwise; `good` records the branch.
CnSample sample_cn(int n, const GaussianParams& gauss,
                   const ContaminationParams& cont, Rng& rng);

}  // namespace cnmixt

#endif
