#include "cnmixt/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cnmixt/errors.hpp"

namespace cnmixt::kernels {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

inline int block_count(int n) { return (n + kBlockRows - 1) / kBlockRows; }

// Log densities of both branches for one (row, group) pair given the
// squared distance under Sigma_g.
inline void branch_log_densities(double delta, double log_det, double eta,
                                 int p, double& lp_good, double& lp_bad) {
  const double base = -0.5 * (p * kLogTwoPi + log_det);
  lp_good = base - 0.5 * delta;
  lp_bad = base - 0.5 * (p * std::log(eta) + delta / eta);
}

// Posteriors for one row; returns the row's log-likelihood contribution.
inline double posterior_row(const Eigen::MatrixXd& delta,
                            const std::vector<ComponentParams>& comps,
                            const Eigen::VectorXd& pi,
                            const Eigen::VectorXd& alpha,
                            const Eigen::VectorXd& eta, int label, int i,
                            Eigen::MatrixXd& z, Eigen::MatrixXd& v) {
  const int G = static_cast<int>(comps.size());
  const int p = static_cast<int>(comps[0].mu.size());
  double lse = -std::numeric_limits<double>::infinity();
  Eigen::ArrayXd lg(G);
  for (int g = 0; g < G; ++g) {
    double lp_good, lp_bad;
    branch_log_densities(delta(i, g), comps[g].log_det, eta[g], p, lp_good,
                         lp_bad);
    const double la = std::log(alpha[g]) + lp_good;
    const double lb = std::log1p(-alpha[g]) + lp_bad;
    v(i, g) = 1.0 / (1.0 + std::exp(lb - la));
    const double hi = std::max(la, lb);
    lg[g] = std::log(pi[g]) + hi + std::log1p(std::exp(std::min(la, lb) - hi));
    lse = std::max(lse, lg[g]);
  }
  lse += std::log((lg - lse).exp().sum());
  if (label >= 0) {
    z.row(i).setZero();
    z(i, label) = 1.0;
    return lg[label];
  }
  for (int g = 0; g < G; ++g) z(i, g) = std::exp(lg[g] - lse);
  return lse;
}

}  // namespace

Eigen::MatrixXd mahalanobis_matrix(const Eigen::MatrixXd& data,
                                   const std::vector<ComponentParams>& comps) {
  const int n = static_cast<int>(data.rows());
  const int G = static_cast<int>(comps.size());
  Eigen::MatrixXd delta(n, G);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    for (int g = 0; g < G; ++g) {
      const Eigen::VectorXd y =
          comps[g].chol_lower.triangularView<Eigen::Lower>().solve(
              data.row(i).transpose() - comps[g].mu);
      delta(i, g) = y.squaredNorm();
    }
  }
  return delta;
}

PosteriorResult posterior_update(const Eigen::MatrixXd& delta,
                                 const std::vector<ComponentParams>& comps,
                                 const Eigen::VectorXd& pi,
                                 const Eigen::VectorXd& alpha,
                                 const Eigen::VectorXd& eta,
                                 const std::vector<int>& labels) {
  const int n = static_cast<int>(delta.rows());
  const int G = static_cast<int>(comps.size());
  PosteriorResult out;
  out.z.resize(n, G);
  out.v.resize(n, G);
  const int nb = block_count(n);
  Eigen::VectorXd partial = Eigen::VectorXd::Zero(nb);
#pragma omp parallel for schedule(static)
  for (int b = 0; b < nb; ++b) {
    const int end = std::min(n, (b + 1) * kBlockRows);
    double acc = 0.0;
    for (int i = b * kBlockRows; i < end; ++i) {
      const int label = labels.empty() ? -1 : labels[i];
      acc += posterior_row(delta, comps, pi, alpha, eta, label, i, out.z,
                           out.v);
    }
    partial[b] = acc;
  }
  out.loglik = partial.sum();
  if (!std::isfinite(out.loglik) || !out.z.allFinite() || !out.v.allFinite())
    throw NumericError("non-finite posterior in E-step");
  return out;
}

Moments weighted_moments(const Eigen::MatrixXd& data, const Eigen::MatrixXd& z,
                         const Eigen::MatrixXd& v,
                         const Eigen::VectorXd& eta) {
  const int n = static_cast<int>(data.rows());
  const int p = static_cast<int>(data.cols());
  const int G = static_cast<int>(z.cols());
  const int nb = block_count(n);

  // Pass 1: sizes, good mass, weight sums, weighted coordinate sums.
  Eigen::MatrixXd ng = Eigen::MatrixXd::Zero(G, nb);
  Eigen::MatrixXd good = Eigen::MatrixXd::Zero(G, nb);
  Eigen::MatrixXd ws = Eigen::MatrixXd::Zero(G, nb);
  std::vector<Eigen::MatrixXd> xs(nb, Eigen::MatrixXd::Zero(p, G));
#pragma omp parallel for schedule(static)
  for (int b = 0; b < nb; ++b) {
    const int end = std::min(n, (b + 1) * kBlockRows);
    for (int i = b * kBlockRows; i < end; ++i) {
      for (int g = 0; g < G; ++g) {
        const double zi = z(i, g);
        const double c = v(i, g) + (1.0 - v(i, g)) / eta[g];
        ng(g, b) += zi;
        good(g, b) += zi * v(i, g);
        ws(g, b) += zi * c;
        xs[b].col(g) += zi * c * data.row(i).transpose();
      }
    }
  }
  Moments m;
  m.group_size = ng.rowwise().sum();
  m.good_mass = good.rowwise().sum();
  m.weight_sum = ws.rowwise().sum();
  Eigen::MatrixXd xsum = Eigen::MatrixXd::Zero(p, G);
  for (int b = 0; b < nb; ++b) xsum += xs[b];
  m.mu.resize(G);
  for (int g = 0; g < G; ++g) m.mu[g] = xsum.col(g) / m.weight_sum[g];

  // Pass 2: scatter about the fresh means.
  std::vector<std::vector<Eigen::MatrixXd>> wpart(
      nb, std::vector<Eigen::MatrixXd>(G, Eigen::MatrixXd::Zero(p, p)));
#pragma omp parallel for schedule(static)
  for (int b = 0; b < nb; ++b) {
    const int end = std::min(n, (b + 1) * kBlockRows);
    for (int i = b * kBlockRows; i < end; ++i) {
      for (int g = 0; g < G; ++g) {
        const double zi = z(i, g);
        const double c = v(i, g) + (1.0 - v(i, g)) / eta[g];
        const Eigen::VectorXd d = data.row(i).transpose() - m.mu[g];
        wpart[b][g].noalias() += (zi * c) * d * d.transpose();
      }
    }
  }
  m.scatter.assign(G, Eigen::MatrixXd::Zero(p, p));
  for (int b = 0; b < nb; ++b)
    for (int g = 0; g < G; ++g) m.scatter[g] += wpart[b][g];
  return m;
}

void bad_mass_sums(const Eigen::MatrixXd& z, const Eigen::MatrixXd& v,
                   const Eigen::MatrixXd& delta, Eigen::VectorXd& mass,
                   Eigen::VectorXd& weighted_delta) {
  const int n = static_cast<int>(z.rows());
  const int G = static_cast<int>(z.cols());
  const int nb = block_count(n);
  Eigen::MatrixXd m1 = Eigen::MatrixXd::Zero(G, nb);
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(G, nb);
#pragma omp parallel for schedule(static)
  for (int b = 0; b < nb; ++b) {
    const int end = std::min(n, (b + 1) * kBlockRows);
    for (int i = b * kBlockRows; i < end; ++i) {
      for (int g = 0; g < G; ++g) {
        const double bad = z(i, g) * (1.0 - v(i, g));
        m1(g, b) += bad;
        m2(g, b) += bad * delta(i, g);
      }
    }
  }
  mass = m1.rowwise().sum();
  weighted_delta = m2.rowwise().sum();
}

namespace serial {

Eigen::MatrixXd mahalanobis_matrix(const Eigen::MatrixXd& data,
                                   const std::vector<ComponentParams>& comps) {
  const int n = static_cast<int>(data.rows());
  const int G = static_cast<int>(comps.size());
  Eigen::MatrixXd delta(n, G);
  for (int i = 0; i < n; ++i) {
    for (int g = 0; g < G; ++g) {
      const Eigen::VectorXd y =
          comps[g].chol_lower.triangularView<Eigen::Lower>().solve(
              data.row(i).transpose() - comps[g].mu);
      delta(i, g) = y.squaredNorm();
    }
  }
  return delta;
}

PosteriorResult posterior_update(const Eigen::MatrixXd& delta,
                                 const std::vector<ComponentParams>& comps,
                                 const Eigen::VectorXd& pi,
                                 const Eigen::VectorXd& alpha,
                                 const Eigen::VectorXd& eta,
                                 const std::vector<int>& labels) {
  const int n = static_cast<int>(delta.rows());
  const int G = static_cast<int>(comps.size());
  PosteriorResult out;
  out.z.resize(n, G);
  out.v.resize(n, G);
  out.loglik = 0.0;
  for (int i = 0; i < n; ++i) {
    const int label = labels.empty() ? -1 : labels[i];
    out.loglik +=
        posterior_row(delta, comps, pi, alpha, eta, label, i, out.z, out.v);
  }
  if (!std::isfinite(out.loglik) || !out.z.allFinite() || !out.v.allFinite())
    throw NumericError("non-finite posterior in E-step");
  return out;
}

Moments weighted_moments(const Eigen::MatrixXd& data, const Eigen::MatrixXd& z,
                         const Eigen::MatrixXd& v,
                         const Eigen::VectorXd& eta) {
  const int n = static_cast<int>(data.rows());
  const int p = static_cast<int>(data.cols());
  const int G = static_cast<int>(z.cols());
  Moments m;
  m.group_size = Eigen::VectorXd::Zero(G);
  m.good_mass = Eigen::VectorXd::Zero(G);
  m.weight_sum = Eigen::VectorXd::Zero(G);
  Eigen::MatrixXd xsum = Eigen::MatrixXd::Zero(p, G);
  for (int i = 0; i < n; ++i) {
    for (int g = 0; g < G; ++g) {
      const double zi = z(i, g);
      const double c = v(i, g) + (1.0 - v(i, g)) / eta[g];
      m.group_size[g] += zi;
      m.good_mass[g] += zi * v(i, g);
      m.weight_sum[g] += zi * c;
      xsum.col(g) += zi * c * data.row(i).transpose();
    }
  }
  m.mu.resize(G);
  for (int g = 0; g < G; ++g) m.mu[g] = xsum.col(g) / m.weight_sum[g];
  m.scatter.assign(G, Eigen::MatrixXd::Zero(p, p));
  for (int i = 0; i < n; ++i) {
    for (int g = 0; g < G; ++g) {
      const double zi = z(i, g);
      const double c = v(i, g) + (1.0 - v(i, g)) / eta[g];
      const Eigen::VectorXd d = data.row(i).transpose() - m.mu[g];
      m.scatter[g].noalias() += (zi * c) * d * d.transpose();
    }
  }
  return m;
}

void bad_mass_sums(const Eigen::MatrixXd& z, const Eigen::MatrixXd& v,
                   const Eigen::MatrixXd& delta, Eigen::VectorXd& mass,
                   Eigen::VectorXd& weighted_delta) {
  const int n = static_cast<int>(z.rows());
  const int G = static_cast<int>(z.cols());
  mass = Eigen::VectorXd::Zero(G);
  weighted_delta = Eigen::VectorXd::Zero(G);
  for (int i = 0; i < n; ++i) {
    for (int g = 0; g < G; ++g) {
      const double bad = z(i, g) * (1.0 - v(i, g));
      mass[g] += bad;
      weighted_delta[g] += bad * delta(i, g);
    }
  }
}

}  // namespace serial

}  // namespace cnmixt::kernels
