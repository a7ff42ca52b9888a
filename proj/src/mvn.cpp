#include "cnmixt/mvn.hpp"

#include <cmath>
#include <sstream>

#include "cnmixt/errors.hpp"

namespace cnmixt {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;
}

CholeskyFactor CholeskyFactor::compute(const Eigen::MatrixXd& sigma) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    std::ostringstream oss;
    oss << "matrix is not positive definite:\n" << sigma;
    throw NonSpdError(oss.str());
  }
  CholeskyFactor f;
  f.lower_ = llt.matrixL();
  f.log_det_ = 2.0 * f.lower_.diagonal().array().log().sum();
  return f;
}

double CholeskyFactor::mahalanobis_sq(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& mu) const {
  const Eigen::VectorXd y =
      lower_.triangularView<Eigen::Lower>().solve(x - mu);
  return y.squaredNorm();
}

double mahalanobis_sq(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                      const Eigen::MatrixXd& sigma) {
  return CholeskyFactor::compute(sigma).mahalanobis_sq(x, mu);
}

double log_dmvnorm(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                   const CholeskyFactor& chol) {
  const double p = static_cast<double>(chol.dim());
  return -0.5 * (p * kLogTwoPi + chol.log_det() + chol.mahalanobis_sq(x, mu));
}

double log_dmvnorm(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                   const Eigen::MatrixXd& sigma) {
  return log_dmvnorm(x, mu, CholeskyFactor::compute(sigma));
}

double log_dcn(double log_phi_good, double log_phi_bad, double alpha) {
  const double la = std::log(alpha) + log_phi_good;
  const double lb = std::log1p(-alpha) + log_phi_bad;
  const double hi = std::max(la, lb);
  const double lo = std::min(la, lb);
  return hi + std::log1p(std::exp(lo - hi));
}

double log_dcn(const Eigen::VectorXd& x, const GaussianParams& gauss,
               const ContaminationParams& cont) {
  const CholeskyFactor chol = CholeskyFactor::compute(gauss.sigma);
  const double p = static_cast<double>(chol.dim());
  const double delta = chol.mahalanobis_sq(x, gauss.mu);
  const double lp_good = -0.5 * (p * kLogTwoPi + chol.log_det() + delta);
  const double lp_bad = -0.5 * (p * kLogTwoPi + chol.log_det() +
                                p * std::log(cont.eta) + delta / cont.eta);
  return log_dcn(lp_good, lp_bad, cont.alpha);
}

CnSample sample_cn(int n, const GaussianParams& gauss,
                   const ContaminationParams& cont, Rng& rng) {
  const int p = static_cast<int>(gauss.mu.size());
  const CholeskyFactor chol = CholeskyFactor::compute(gauss.sigma);
  const double sqrt_eta = std::sqrt(cont.eta);

  CnSample out;
  out.points.resize(n, p);
  out.good.resize(n);
  Eigen::VectorXd z(p);
  for (int i = 0; i < n; ++i) {
    const bool good = rng.uniform() < cont.alpha;
    for (int j = 0; j < p; ++j) z[j] = rng.normal();
    Eigen::VectorXd x = gauss.mu + chol.lower() * z * (good ? 1.0 : sqrt_eta);
    out.points.row(i) = x.transpose();
    out.good[i] = good ? 1 : 0;
  }
  return out;
}

}  // namespace cnmixt
