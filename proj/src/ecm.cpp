#include "cnmixt/ecm.hpp"

#include <cmath>
#include <sstream>

#include "cnmixt/errors.hpp"
#include "cnmixt/kernels.hpp"
#include "cnmixt/mvn.hpp"
#include "cnmixt/optimize.hpp"

namespace cnmixt {

namespace {

constexpr double kEtaFloor = 1.0 + 1e-9;
constexpr double kAlphaGap = 1e-9;
constexpr double kEmptyGroup = 1e-10;

Eigen::VectorXd expand_vector(const Eigen::VectorXd& v, int groups) {
  if (v.size() == groups) return v;
  if (v.size() < 1) throw ConfigError("empty option vector");
  return Eigen::VectorXd::Constant(groups, v[0]);
}

std::vector<kernels::ComponentParams> prepare_components(const Psi& psi,
                                                         double eps) {
  std::vector<kernels::ComponentParams> comps(psi.mu.size());
  for (size_t g = 0; g < psi.mu.size(); ++g) {
    const Eigen::MatrixXd sigma = reconstruct_floored(psi.scale[g], eps);
    const CholeskyFactor chol = CholeskyFactor::compute(sigma);
    comps[g] = {psi.mu[g], chol.lower(), chol.log_det()};
  }
  return comps;
}

kernels::PosteriorResult run_posteriors(const Eigen::MatrixXd& data,
                                        const Psi& psi,
                                        const std::vector<int>& labels,
                                        double eps) {
  const auto comps = prepare_components(psi, eps);
  const Eigen::MatrixXd delta = kernels::mahalanobis_matrix(data, comps);
  return kernels::posterior_update(delta, comps, psi.pi, psi.alpha, psi.eta,
                                   labels);
}

}  // namespace

FitOptions FitOptions::expanded(int groups) const {
  FitOptions out = *this;
  if (out.alpha_fix) out.alpha_fix = expand_vector(*out.alpha_fix, groups);
  if (out.alpha_min) out.alpha_min = expand_vector(*out.alpha_min, groups);
  if (out.eta_fix) out.eta_fix = expand_vector(*out.eta_fix, groups);
  out.eta_max = expand_vector(out.eta_max, groups);
  return out;
}

std::vector<Eigen::MatrixXd> Psi::sigma(double eps) const {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(scale.size());
  for (const auto& s : scale) out.push_back(reconstruct_floored(s, eps));
  return out;
}

Responsibilities e_step(const Eigen::MatrixXd& data, const Psi& psi,
                        const std::vector<int>& labels, double eps) {
  const auto post = run_posteriors(data, psi, labels, eps);
  return {post.z, post.v};
}

double observed_loglik(const Eigen::MatrixXd& data, const Psi& psi,
                       const std::vector<int>& labels, double eps) {
  return run_posteriors(data, psi, labels, eps).loglik;
}

CmStep1Result cm_step1(const Eigen::MatrixXd& data,
                       const Responsibilities& resp,
                       const Eigen::VectorXd& eta_current,
                       const FitOptions& options) {
  const int G = static_cast<int>(resp.z.cols());
  const double n = static_cast<double>(data.rows());
  const auto m =
      kernels::weighted_moments(data, resp.z, resp.v, eta_current);

  for (int g = 0; g < G; ++g) {
    if (m.group_size[g] < kEmptyGroup) {
      std::ostringstream oss;
      oss << "component " << g + 1 << " became empty";
      throw DegenerateFitError(oss.str());
    }
  }

  CmStep1Result out;
  out.pi = m.group_size / n;
  out.alpha.resize(G);
  for (int g = 0; g < G; ++g) {
    if (options.alpha_fix) {
      out.alpha[g] = (*options.alpha_fix)[g];
      continue;
    }
    // Unconstrained maximizer of the alpha objective, clamped into the
    // admissible open interval; the objective is concave so the clamp is
    // exact.
    const double hat = m.good_mass[g] / m.group_size[g];
    const double lo =
        options.alpha_min ? (*options.alpha_min)[g] + kAlphaGap : kAlphaGap;
    out.alpha[g] = std::min(std::max(hat, lo), 1.0 - kAlphaGap);
  }
  out.mu = m.mu;
  out.scatter.w = m.scatter;
  out.scatter.counts = m.group_size;
  out.scatter.total = n;
  return out;
}

Eigen::VectorXd cm_step2_eta(const Eigen::MatrixXd& delta,
                             const Eigen::MatrixXd& z,
                             const Eigen::MatrixXd& v, int p,
                             const FitOptions& options) {
  const int G = static_cast<int>(z.cols());
  Eigen::VectorXd eta(G);
  if (options.eta_fix) {
    for (int g = 0; g < G; ++g) eta[g] = (*options.eta_fix)[g];
    return eta;
  }
  Eigen::VectorXd mass, wdelta;
  kernels::bad_mass_sums(z, v, delta, mass, wdelta);
  for (int g = 0; g < G; ++g) {
    if (mass[g] <= 0.0) {
      eta[g] = kEtaFloor;  // objective is constant without bad mass
      continue;
    }
    const double s1 = mass[g], s2 = wdelta[g];
    const auto obj = [&](double e) {
      return -0.5 * p * s1 * std::log(e) - 0.5 * s2 / e;
    };
    eta[g] = maximize_scalar(obj, kEtaFloor, options.eta_max[g], 1e-6).x;
  }
  return eta;
}

bool aitken_converged(const std::vector<double>& trace, double threshold) {
  const size_t r = trace.size();
  if (r < 3) return false;
  const double l0 = trace[r - 3], l1 = trace[r - 2], l2 = trace[r - 1];
  if (l2 - l1 < 1e-14) return true;  // plateau
  const double denom = l1 - l0;
  if (denom <= 0.0) return false;
  const double a = (l2 - l1) / denom;
  if (a >= 1.0) return false;  // acceleration degenerate, no finite limit
  const double linf = l1 + (l2 - l1) / (1.0 - a);
  const double gap = linf - l2;
  return gap >= 0.0 && gap < threshold;
}

FitResult fit_single(const Eigen::MatrixXd& data, const ModelSpec& spec,
                     const InitState& init, const FitOptions& raw_options,
                     const std::vector<int>& labels) {
  const int n = static_cast<int>(data.rows());
  const int p = static_cast<int>(data.cols());
  const int G = spec.groups;
  FitResult res;
  res.spec = spec;
  const FitOptions options = raw_options.expanded(G);
  res.free_params =
      free_param_count(spec.code, G, p, options.alpha_fix.has_value(),
                       options.eta_fix.has_value());

  Responsibilities resp;
  resp.z = init.z0;
  resp.v = init.v0.size() > 0 ? init.v0 : Eigen::MatrixXd::Ones(n, G);
  if (!labels.empty()) {
    for (int i = 0; i < n; ++i) {
      if (labels[i] >= 0) {
        resp.z.row(i).setZero();
        resp.z(i, labels[i]) = 1.0;
      }
    }
  }
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(G, init.eta0);
  if (options.eta_fix) eta = *options.eta_fix;

  Psi psi;
  bool have_scale = false;
  try {
    for (int iter = 0; iter < options.iter_max; ++iter) {
      auto cm1 = cm_step1(data, resp, eta, options);
      psi.pi = cm1.pi;
      psi.alpha = cm1.alpha;
      psi.mu = std::move(cm1.mu);
      psi.scale = update_scales(spec.code, cm1.scatter,
                                have_scale ? &psi.scale : nullptr);
      have_scale = true;

      const auto comps = prepare_components(psi, options.eps);
      const Eigen::MatrixXd delta = kernels::mahalanobis_matrix(data, comps);
      eta = cm_step2_eta(delta, resp.z, resp.v, p, options);
      psi.eta = eta;

      const auto post = kernels::posterior_update(delta, comps, psi.pi,
                                                  psi.alpha, psi.eta, labels);
      resp.z = post.z;
      resp.v = post.v;
      res.loglik_trace.push_back(post.loglik);
      res.iterations = iter + 1;
      if (aitken_converged(res.loglik_trace, options.threshold)) {
        res.converged = true;
        break;
      }
    }
  } catch (const DegenerateFitError& e) {
    res.failure = e.what();
    return res;
  } catch (const NumericError& e) {
    res.failure = e.what();
    return res;
  } catch (const NonSpdError& e) {
    res.failure = e.what();
    return res;
  }

  if (res.loglik_trace.empty()) {
    res.failure = "no iterations performed";
    return res;
  }
  res.psi = std::move(psi);
  res.resp = std::move(resp);
  res.loglik = res.loglik_trace.back();
  res.crit = criteria(res.loglik, res.free_params, n, res.resp.z, labels);
  res.ok = true;
  return res;
}

}  // namespace cnmixt
