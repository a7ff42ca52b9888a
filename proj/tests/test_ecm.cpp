#include <cmath>

#include "cnmixt/ecm.hpp"
#include "cnmixt/errors.hpp"
#include "cnmixt/init.hpp"
#include "cnmixt/mvn.hpp"
#include "cnmixt/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cnmixt;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

Psi make_psi(const std::vector<Eigen::VectorXd>& mu,
             const std::vector<Eigen::MatrixXd>& sigma,
             const Eigen::VectorXd& pi, const Eigen::VectorXd& alpha,
             const Eigen::VectorXd& eta) {
  Psi psi;
  psi.pi = pi;
  psi.alpha = alpha;
  psi.eta = eta;
  psi.mu = mu;
  for (const auto& s : sigma) psi.scale.push_back(decompose(s));
  return psi;
}

Eigen::MatrixXd cluster_data(int per_group, double gap, Rng& rng) {
  Eigen::MatrixXd data(2 * per_group, 2);
  for (int i = 0; i < per_group; ++i) {
    data(i, 0) = -gap / 2 + rng.normal();
    data(i, 1) = rng.normal();
    data(per_group + i, 0) = gap / 2 + rng.normal();
    data(per_group + i, 1) = rng.normal();
  }
  return data;
}

}  // namespace

TEST_CASE("e_step basics") {
  SUBCASE("G=1 gives an all-ones column") {
    Rng rng(41);
    Eigen::MatrixXd data(5, 2);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 2; ++j) data(i, j) = rng.normal();
    const Psi psi = make_psi({vec2(0, 0)}, {Eigen::MatrixXd::Identity(2, 2)},
                             Eigen::VectorXd::Ones(1),
                             Eigen::VectorXd::Constant(1, 0.9),
                             Eigen::VectorXd::Constant(1, 10.0));
    const Responsibilities r = e_step(data, psi, {});
    CHECK((r.z - Eigen::MatrixXd::Ones(5, 1)).cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("symmetric two-component setup splits evenly at the origin") {
    Eigen::MatrixXd data(1, 2);
    data << 0.0, 0.0;
    const Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(2, 2);
    const Psi psi = make_psi(
        {vec2(-1.5, 0), vec2(1.5, 0)}, {sigma, sigma},
        Eigen::VectorXd::Constant(2, 0.5), Eigen::VectorXd::Constant(2, 0.8),
        Eigen::VectorXd::Constant(2, 15.0));
    const Responsibilities r = e_step(data, psi, {});
    CHECK(r.z(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.z(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("v matches a 50-digit high-precision evaluation") {
    // v = alpha phi(x; mu, Sigma) / [alpha phi + (1-alpha) phi_inflated]
    // for x=(1.3,-0.4), mu=(0.5,0.2), Sigma=[[2,.3],[.3,1]], alpha=.9,
    // eta=50, evaluated with 50-digit arithmetic externally.
    Eigen::MatrixXd data(1, 2);
    data << 1.3, -0.4;
    Eigen::MatrixXd sigma(2, 2);
    sigma << 2.0, 0.3, 0.3, 1.0;
    const Psi psi = make_psi({vec2(0.5, 0.2)}, {sigma},
                             Eigen::VectorXd::Ones(1),
                             Eigen::VectorXd::Constant(1, 0.9),
                             Eigen::VectorXd::Constant(1, 50.0));
    const Responsibilities r = e_step(data, psi, {});
    CHECK(r.v(0, 0) ==
          doctest::Approx(0.9966198935448296368238001).epsilon(1e-14));
    CHECK(observed_loglik(data, psi, {}) ==
          doctest::Approx(-2.694816983741462834241459).epsilon(1e-14));
  }

  SUBCASE("labeled rows receive their indicator") {
    Eigen::MatrixXd data(3, 2);
    data << 0, 0, 1, 1, -1, -1;
    const Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(2, 2);
    const Psi psi = make_psi(
        {vec2(-1, 0), vec2(1, 0)}, {sigma, sigma},
        Eigen::VectorXd::Constant(2, 0.5), Eigen::VectorXd::Constant(2, 0.9),
        Eigen::VectorXd::Constant(2, 5.0));
    const Responsibilities r = e_step(data, psi, {1, -1, 0});
    CHECK(r.z(0, 1) == 1.0);
    CHECK(r.z(2, 0) == 1.0);
    CHECK(r.z.row(1).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("cm_step1 hand computation on a 4-point dataset") {
  Eigen::MatrixXd data(4, 2);
  data << 0, 0, 2, 0, 0, 2, 2, 2;
  Responsibilities resp;
  resp.z.resize(4, 2);
  resp.z << 1, 0, 1, 0, 0, 1, 0, 1;
  resp.v.resize(4, 2);
  resp.v << 1.0, 0.5, 0.5, 1.0, 1.0, 1.0, 0.5, 0.5;
  Eigen::VectorXd eta(2);
  eta << 2.0, 4.0;

  const auto r = cm_step1(data, resp, eta, FitOptions{}.expanded(2));
  CHECK(r.pi[0] == doctest::Approx(0.5));
  CHECK(r.pi[1] == doctest::Approx(0.5));
  CHECK(r.alpha[0] == doctest::Approx(0.75));
  CHECK(r.alpha[1] == doctest::Approx(0.75));
  // Group 0 weights: 1 and 0.75 -> mu = (1.5/1.75, 0) = (6/7, 0).
  CHECK(r.mu[0][0] == doctest::Approx(6.0 / 7.0).epsilon(1e-12));
  CHECK(r.mu[0][1] == doctest::Approx(0.0).epsilon(1e-12));
  // Group 1 weights: 1 and 0.625 -> mu = (10/13, 2).
  CHECK(r.mu[1][0] == doctest::Approx(10.0 / 13.0).epsilon(1e-12));
  CHECK(r.mu[1][1] == doctest::Approx(2.0).epsilon(1e-12));
  // Scatter matrices: only the (0,0) entry is nonzero.
  CHECK(r.scatter.w[0](0, 0) == doctest::Approx(12.0 / 7.0).epsilon(1e-12));
  CHECK(r.scatter.w[0](1, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.scatter.w[1](0, 0) == doctest::Approx(20.0 / 13.0).epsilon(1e-12));
  CHECK(r.scatter.counts[0] == doctest::Approx(2.0));
  CHECK(r.scatter.counts[1] == doctest::Approx(2.0));
}

TEST_CASE("cm_step1 with v = 1 reduces to the classical Gaussian M-step") {
  Rng rng(42);
  Eigen::MatrixXd data(30, 2);
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 2; ++j) data(i, j) = rng.normal();
  Responsibilities resp;
  resp.z.resize(30, 2);
  for (int i = 0; i < 30; ++i) {
    const double u = rng.uniform();
    resp.z(i, 0) = u;
    resp.z(i, 1) = 1.0 - u;
  }
  resp.v = Eigen::MatrixXd::Ones(30, 2);
  const Eigen::VectorXd eta = Eigen::VectorXd::Constant(2, 30.0);

  const auto r = cm_step1(data, resp, eta, FitOptions{}.expanded(2));
  for (int g = 0; g < 2; ++g) {
    const double ng = resp.z.col(g).sum();
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
    for (int i = 0; i < 30; ++i) mu += resp.z(i, g) * data.row(i).transpose();
    mu /= ng;
    CHECK((r.mu[g] - mu).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
    for (int i = 0; i < 30; ++i) {
      const Eigen::VectorXd d = data.row(i).transpose() - mu;
      w += resp.z(i, g) * d * d.transpose();
    }
    CHECK((r.scatter.w[g] - w).cwiseAbs().maxCoeff() < 1e-10);
    // alpha-hat = 1 before the clamp; clamped to the open interval.
    CHECK(r.alpha[g] == doctest::Approx(1.0 - 1e-9));
    CHECK(r.alpha[g] < 1.0);
  }
}

TEST_CASE("cm_step1 honors alphafix and reports empty components") {
  Eigen::MatrixXd data(4, 2);
  data << 0, 0, 1, 0, 0, 1, 1, 1;
  Responsibilities resp;
  resp.z = Eigen::MatrixXd::Zero(4, 2);
  resp.z.col(0).setOnes();
  resp.v = Eigen::MatrixXd::Ones(4, 2);
  const Eigen::VectorXd eta = Eigen::VectorXd::Constant(2, 2.0);

  CHECK_THROWS_AS(
      cm_step1(data, resp, eta, FitOptions{}.expanded(2)),
      DegenerateFitError);

  resp.z << 1, 0, 1, 0, 0, 1, 0, 1;
  FitOptions opt;
  opt.alpha_fix = Eigen::VectorXd::Constant(1, 0.7);
  const auto r = cm_step1(data, resp, eta, opt.expanded(2));
  CHECK(r.alpha[0] == 0.7);
  CHECK(r.alpha[1] == 0.7);
}

TEST_CASE("alpha clamp matches a grid maximizer of the likelihood term") {
  // Objective in alpha: sum_i z_ig [v_ig ln a + (1 - v_ig) ln(1 - a)]
  // over (alphamin, 1); the clamped ratio must beat a 10^4-point grid.
  Rng rng(43);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 25;
    Eigen::MatrixXd data(n, 2);
    Responsibilities resp;
    resp.z.resize(n, 1);
    resp.v.resize(n, 1);
    for (int i = 0; i < n; ++i) {
      data(i, 0) = rng.normal();
      data(i, 1) = rng.normal();
      resp.z(i, 0) = 1.0;
      resp.v(i, 0) = rng.uniform(0.0, 1.0) < 0.3 ? rng.uniform(0.0, 1.0)
                                                 : rng.uniform(0.9, 1.0);
    }
    FitOptions opt;
    const double alphamin = rng.uniform(0.3, 0.7);
    opt.alpha_min = Eigen::VectorXd::Constant(1, alphamin);
    const auto r = cm_step1(data, resp,
                            Eigen::VectorXd::Constant(1, 10.0),
                            opt.expanded(1));

    auto f = [&](double a) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        s += resp.v(i, 0) * std::log(a) +
             (1.0 - resp.v(i, 0)) * std::log(1.0 - a);
      return s;
    };
    double best = -1e300;
    for (int k = 1; k < 10000; ++k) {
      const double a = alphamin + (1.0 - alphamin) * k / 10000.0;
      if (a >= 1.0) continue;
      best = std::max(best, f(a));
    }
    CHECK(f(r.alpha[0]) >= best - 1e-6);
    CHECK(r.alpha[0] > alphamin);
    CHECK(r.alpha[0] < 1.0);
  }
}

TEST_CASE("cm_step2_eta closed form and grid oracle") {
  SUBCASE("no bad mass returns the lower bracket") {
    Eigen::MatrixXd z = Eigen::MatrixXd::Ones(5, 1);
    Eigen::MatrixXd v = Eigen::MatrixXd::Ones(5, 1);
    Eigen::MatrixXd delta = Eigen::MatrixXd::Constant(5, 1, 3.0);
    const Eigen::VectorXd eta =
        cm_step2_eta(delta, z, v, 2, FitOptions{}.expanded(1));
    CHECK(eta[0] == doctest::Approx(1.0 + 1e-9));
  }

  SUBCASE("single bad point at squared distance delta gives eta = delta/p") {
    Eigen::MatrixXd z = Eigen::MatrixXd::Ones(1, 1);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(1, 1);
    Eigen::MatrixXd delta = Eigen::MatrixXd::Constant(1, 1, 10.0);
    const Eigen::VectorXd eta =
        cm_step2_eta(delta, z, v, 2, FitOptions{}.expanded(1));
    CHECK(eta[0] == doctest::Approx(5.0).epsilon(1e-5));
  }

  SUBCASE("etafix wins") {
    Eigen::MatrixXd z = Eigen::MatrixXd::Ones(1, 1);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(1, 1);
    Eigen::MatrixXd delta = Eigen::MatrixXd::Constant(1, 1, 10.0);
    FitOptions opt;
    opt.eta_fix = Eigen::VectorXd::Constant(1, 33.0);
    CHECK(cm_step2_eta(delta, z, v, 2, opt.expanded(1))[0] == 33.0);
  }

  SUBCASE("log-grid oracle on random instances") {
    Rng rng(44);
    for (int rep = 0; rep < 25; ++rep) {
      const int n = 20, p = 3;
      Eigen::MatrixXd z(n, 1), v(n, 1), delta(n, 1);
      for (int i = 0; i < n; ++i) {
        z(i, 0) = rng.uniform(0.1, 1.0);
        v(i, 0) = rng.uniform(0.0, 1.0);
        delta(i, 0) = rng.uniform(0.1, 60.0);
      }
      const auto opt = FitOptions{}.expanded(1);
      const double eta = cm_step2_eta(delta, z, v, p, opt)[0];

      double s1 = 0.0, s2 = 0.0;
      for (int i = 0; i < n; ++i) {
        s1 += z(i, 0) * (1.0 - v(i, 0));
        s2 += z(i, 0) * (1.0 - v(i, 0)) * delta(i, 0);
      }
      auto f = [&](double e) {
        return -(p / 2.0) * s1 * std::log(e) - s2 / (2.0 * e);
      };
      double best = -1e300;
      const double lo = std::log(1.0 + 1e-9), hi = std::log(1000.0);
      for (int k = 0; k < 2000; ++k) {
        best = std::max(best, f(std::exp(lo + (hi - lo) * k / 1999.0)));
      }
      CHECK(f(eta) >= best - 1e-8);
    }
  }
}

TEST_CASE("observed_loglik term-by-term") {
  Eigen::MatrixXd data(3, 2);
  data << 0.5, -0.2, 1.0, 1.0, -2.0, 0.3;
  Eigen::MatrixXd s0(2, 2), s1(2, 2);
  s0 << 1.5, 0.2, 0.2, 0.8;
  s1 << 2.0, -0.3, -0.3, 1.0;
  Eigen::VectorXd pi(2), alpha(2), eta(2);
  pi << 0.6, 0.4;
  alpha << 0.9, 0.8;
  eta << 10.0, 30.0;
  const Psi psi =
      make_psi({vec2(0, 0), vec2(1, 1)}, {s0, s1}, pi, alpha, eta);

  SUBCASE("clustering: sum of row log mixture densities") {
    double expected = 0.0;
    for (int i = 0; i < 3; ++i) {
      const Eigen::VectorXd x = data.row(i).transpose();
      const double t0 = std::log(pi[0]) +
                        log_dcn(x, {psi.mu[0], s0}, {alpha[0], eta[0]});
      const double t1 = std::log(pi[1]) +
                        log_dcn(x, {psi.mu[1], s1}, {alpha[1], eta[1]});
      const double m = std::max(t0, t1);
      expected += m + std::log(std::exp(t0 - m) + std::exp(t1 - m));
    }
    CHECK(observed_loglik(data, psi, {}) ==
          doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("single point, single component collapses to log_dcn") {
    const Psi one = make_psi({vec2(0, 0)}, {s0}, Eigen::VectorXd::Ones(1),
                             alpha.head(1), eta.head(1));
    Eigen::MatrixXd row = data.topRows(1);
    CHECK(observed_loglik(row, one, {}) ==
          doctest::Approx(log_dcn(row.row(0).transpose(), {one.mu[0], s0},
                                  {alpha[0], eta[0]}))
              .epsilon(1e-12));
  }

  SUBCASE("labeled rows contribute their own component term") {
    const std::vector<int> labels = {1, -1, -1};
    double expected = std::log(pi[1]) +
                      log_dcn(data.row(0).transpose(), {psi.mu[1], s1},
                              {alpha[1], eta[1]});
    for (int i = 1; i < 3; ++i) {
      const Eigen::VectorXd x = data.row(i).transpose();
      const double t0 = std::log(pi[0]) +
                        log_dcn(x, {psi.mu[0], s0}, {alpha[0], eta[0]});
      const double t1 = std::log(pi[1]) +
                        log_dcn(x, {psi.mu[1], s1}, {alpha[1], eta[1]});
      const double m = std::max(t0, t1);
      expected += m + std::log(std::exp(t0 - m) + std::exp(t1 - m));
    }
    CHECK(observed_loglik(data, psi, labels) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("aitken_converged") {
  SUBCASE("geometric trace extrapolates to its limit") {
    // l_r = -1/2^r has Aitken limit 0, so convergence occurs exactly when
    // -l_{r+1} = 1/2^{r+1} drops below the threshold.
    std::vector<double> trace;
    for (int r = 0; r < 6; ++r) trace.push_back(-1.0 / std::pow(2.0, r));
    CHECK_FALSE(aitken_converged(trace, 1e-3));
    for (int r = 6; r < 60; ++r) {
      trace.push_back(-1.0 / std::pow(2.0, r));
      const bool expect = 1.0 / std::pow(2.0, r) < 1e-3;
      CHECK(aitken_converged(trace, 1e-3) == expect);
      if (expect) break;
    }
  }

  SUBCASE("constant trace converges via the plateau guard") {
    CHECK(aitken_converged({-5.0, -5.0, -5.0}, 1e-3));
  }

  SUBCASE("linear growth never converges") {
    CHECK_FALSE(aitken_converged({1.0, 2.0, 3.0, 4.0}, 1e-3));
  }
}

TEST_CASE("fit_single basics") {
  Rng rng(45);
  const Eigen::MatrixXd data = cluster_data(60, 8.0, rng);

  SUBCASE("pre-converged init stops immediately") {
    InitState init;
    init.z0 = Eigen::MatrixXd::Zero(120, 2);
    for (int i = 0; i < 120; ++i) init.z0(i, i < 60 ? 0 : 1) = 1.0;
    const ModelSpec spec{StructureCode::VVV, 2};
    const FitOptions opt;
    const FitResult first = fit_single(data, spec, init, opt);
    REQUIRE(first.ok);

    InitState warm;
    warm.z0 = first.resp.z;
    warm.v0 = first.resp.v;
    warm.eta0 = first.psi.eta[0];
    const FitResult again = fit_single(data, spec, warm, opt);
    REQUIRE(again.ok);
    CHECK(again.iterations <= 3);
    CHECK(std::abs(again.loglik_trace.back() - again.loglik_trace.front()) <
          opt.threshold);
  }

  SUBCASE("G=1 with clean data recovers the Gaussian MLE") {
    Rng local(46);
    Eigen::MatrixXd clean(300, 2);
    for (int i = 0; i < 300; ++i) {
      clean(i, 0) = 1.0 + local.normal();
      clean(i, 1) = -2.0 + 0.5 * local.normal();
    }
    InitState init;
    init.z0 = Eigen::MatrixXd::Ones(300, 1);
    FitOptions opt;
    opt.threshold = 1e-8;
    const FitResult fit =
        fit_single(clean, {StructureCode::VVV, 1}, init, opt);
    REQUIRE(fit.ok);
    const Eigen::VectorXd mean = clean.colwise().mean();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
    for (int i = 0; i < 300; ++i) {
      const Eigen::VectorXd d = clean.row(i).transpose() - mean;
      cov += d * d.transpose();
    }
    cov /= 300.0;
    CHECK((fit.psi.mu[0] - mean).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((fit.psi.scale[0].matrix() - cov).cwiseAbs().maxCoeff() < 1e-6);
  }

  SUBCASE("labeled rows stay pinned for the whole fit") {
    std::vector<int> labels(120, -1);
    for (int i = 0; i < 10; ++i) labels[i] = 0;
    for (int i = 60; i < 70; ++i) labels[i] = 1;
    InitState init;
    Rng local(47);
    init.z0 = init_random_hard(120, 2, local);
    const FitResult fit =
        fit_single(data, {StructureCode::EEE, 2}, init, FitOptions{}, labels);
    REQUIRE(fit.ok);
    for (int i = 0; i < 10; ++i) {
      CHECK(fit.resp.z(i, 0) == 1.0);
      CHECK(fit.resp.z(i, 1) == 0.0);
    }
    for (int i = 60; i < 70; ++i) CHECK(fit.resp.z(i, 1) == 1.0);
  }
}

TEST_CASE("loglik trace is non-decreasing across models (small sweep)") {
  Rng rng(48);
  for (int rep = 0; rep < 6; ++rep) {
    Eigen::MatrixXd data = cluster_data(30, rng.uniform(2.0, 8.0), rng);
    for (StructureCode code : kAllStructures) {
      for (int G : {1, 2}) {
        InitState init;
        init.z0 = Eigen::MatrixXd::Zero(60, G);
        for (int i = 0; i < 60; ++i) init.z0(i, rng.uniform_index(G)) = 1.0;
        const FitResult fit = fit_single(data, {code, G}, init, FitOptions{});
        if (!fit.ok) continue;  // degenerate random starts may fail
        for (size_t r = 1; r < fit.loglik_trace.size(); ++r) {
          CAPTURE(to_string(code));
          CHECK(fit.loglik_trace[r] >=
                fit.loglik_trace[r - 1] -
                    1e-8 * (std::abs(fit.loglik_trace[r - 1]) + 1.0));
        }
      }
    }
  }
}

TEST_CASE("pinned alpha and eta reproduce a plain Gaussian-mixture EM") {
  Rng rng(49);
  const Eigen::MatrixXd data = cluster_data(50, 7.0, rng);
  Eigen::MatrixXd z0 = Eigen::MatrixXd::Zero(100, 2);
  for (int i = 0; i < 100; ++i) z0(i, i < 50 ? 0 : 1) = 1.0;

  FitOptions opt;
  opt.alpha_fix = Eigen::VectorXd::Constant(1, 1.0 - 1e-12);
  opt.eta_fix = Eigen::VectorXd::Constant(1, 1.0 + 1e-12);
  opt.threshold = 1e-10;
  InitState init;
  init.z0 = z0;
  const FitResult fit = fit_single(data, {StructureCode::VVV, 2}, init, opt);
  REQUIRE(fit.ok);

  const oracles::GmmFit gmm = oracles::gmm_em(data, z0);
  for (int g = 0; g < 2; ++g) {
    CHECK((fit.psi.mu[g] - gmm.mu[g]).cwiseAbs().maxCoeff() < 1e-5);
    CHECK((fit.psi.scale[g].matrix() - gmm.sigma[g]).cwiseAbs().maxCoeff() <
          1e-5);
    CHECK(fit.psi.pi[g] == doctest::Approx(gmm.pi[g]).epsilon(1e-5));
  }
  CHECK(fit.loglik == doctest::Approx(gmm.loglik).epsilon(1e-8));
}

TEST_CASE("failed fits come back as failed candidates, not exceptions") {
  // Three identical points cannot support a 2-component general model.
  Eigen::MatrixXd data(3, 2);
  data << 1, 1, 1, 1, 1, 1;
  InitState init;
  init.z0.resize(3, 2);
  init.z0 << 1, 0, 0, 1, 1, 0;
  const FitResult fit =
      fit_single(data, {StructureCode::VVV, 2}, init, FitOptions{});
  CHECK_FALSE(fit.ok);
  CHECK_FALSE(fit.failure.empty());
}
