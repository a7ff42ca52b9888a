#ifndef CNMIXT_ECM_HPP
#define CNMIXT_ECM_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "cnmixt/selection.hpp"
#include "cnmixt/structures.hpp"

namespace cnmixt {

struct ModelSpec {
  StructureCode code = StructureCode::VVV;
  int groups = 1;
};

// Full parameter set of the fitted mixture.
struct Psi {
  Eigen::VectorXd pi;     // mixing proportions, simplex
  Eigen::VectorXd alpha;  // proportion of good observations per group
  Eigen::VectorXd eta;    // contamination inflation per group
  std::vector<Eigen::VectorXd> mu;
  std::vector<VolumeShapeOrientation> scale;

  // Component covariances with eigenvalues floored at eps.
  std::vector<Eigen::MatrixXd> sigma(double eps) const;
};

struct Responsibilities {
  Eigen::MatrixXd z;  // n x G, row-stochastic; labeled rows pinned
  Eigen::MatrixXd v;  // n x G, good-branch posterior
};

struct FitOptions {
  std::optional<Eigen::VectorXd> alpha_fix;
  std::optional<Eigen::VectorXd> alpha_min =
      Eigen::VectorXd::Constant(1, 0.5);
  std::optional<Eigen::VectorXd> eta_fix;
  Eigen::VectorXd eta_max = Eigen::VectorXd::Constant(1, 1000.0);
  int iter_max = 1000;
  double threshold = 1e-3;
  double eps = 1e-100;  // eigenvalue floor for the Sigma_g

  // Vectors whose length differs from G are replaced by their first
  // element replicated G times.
  FitOptions expanded(int groups) const;
};

// Initial quantities consumed by the first CM-step.
struct InitState {
  Eigen::MatrixXd z0;
  Eigen::MatrixXd v0;     // defaults to all ones when empty
  double eta0 = 1.001;
};

struct FitResult {
  ModelSpec spec;
  bool ok = false;
  std::string failure;
  Psi psi;
  Responsibilities resp;
  std::vector<double> loglik_trace;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  int free_params = 0;
  CriteriaValues crit;
  std::vector<StructureCode> equivalent;  // codes collapsed into this fit
};

// E-step posteriors under psi. `labels`: empty or length n with -1 for
// unlabeled rows; labeled rows get their indicator row regardless of psi.
Responsibilities e_step(const Eigen::MatrixXd& data, const Psi& psi,
                        const std::vector<int>& labels, double eps = 1e-100);

double observed_loglik(const Eigen::MatrixXd& data, const Psi& psi,
                       const std::vector<int>& labels, double eps = 1e-100);

struct CmStep1Result {
  Eigen::VectorXd pi;
  Eigen::VectorXd alpha;
  std::vector<Eigen::VectorXd> mu;
  ScatterSet scatter;
};

// CM-step 1: pi, constrained alpha, down-weighted means and scatter
// matrices. `options` must already be expanded to G entries. Throws
// DegenerateFitError on an empty component.
CmStep1Result cm_step1(const Eigen::MatrixXd& data,
                       const Responsibilities& resp,
                       const Eigen::VectorXd& eta_current,
                       const FitOptions& options);

// CM-step 2: per-group eta maximizing
//   -(p/2) S1_g ln eta - S2_g / (2 eta)
// over (1, etamax_g] by bounded scalar search, where S1_g and S2_g are the
// bad-mass sums over rows. Groups with no bad mass return the lower
// bracket 1 + 1e-9.
Eigen::VectorXd cm_step2_eta(const Eigen::MatrixXd& delta,
                             const Eigen::MatrixXd& z,
                             const Eigen::MatrixXd& v, int p,
                             const FitOptions& options);

// Aitken acceleration stopping rule on the log-likelihood trace.
bool aitken_converged(const std::vector<double>& trace, double threshold);

// Full ECM fit: CM1 -> CM2 -> E each iteration, first iteration consuming
// `init` directly, stopping on Aitken convergence or iter_max. Degenerate
// and numeric failures come back as a FitResult with ok = false.
FitResult fit_single(const Eigen::MatrixXd& data, const ModelSpec& spec,
                     const InitState& init, const FitOptions& options,
                     const std::vector<int>& labels = {});

}  // namespace cnmixt

#endif
