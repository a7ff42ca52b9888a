// Times the OpenMP row kernels against the serial reference on a
// synthetic mixture and reports the largest deviation between the two.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "cnmixt/kernels.hpp"
#include "cnmixt/mvn.hpp"
#include "cnmixt/rng.hpp"

using namespace cnmixt;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, ms_since(t0));
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 200000;
  const int p = argc > 2 ? std::atoi(argv[2]) : 8;
  const int G = argc > 3 ? std::atoi(argv[3]) : 4;
  const int reps = 5;

  Rng rng(42);
  Eigen::MatrixXd data(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) data(i, j) = rng.normal();

  std::vector<kernels::ComponentParams> comps(G);
  Eigen::VectorXd pi(G), alpha(G), eta(G);
  for (int g = 0; g < G; ++g) {
    Eigen::MatrixXd a(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) a(i, j) = rng.normal();
    Eigen::MatrixXd sigma =
        a * a.transpose() + 0.5 * p * Eigen::MatrixXd::Identity(p, p);
    const CholeskyFactor chol = CholeskyFactor::compute(sigma);
    Eigen::VectorXd mu(p);
    for (int j = 0; j < p; ++j) mu[j] = 2.0 * rng.normal();
    comps[g] = {mu, chol.lower(), chol.log_det()};
    pi[g] = 1.0 / G;
    alpha[g] = 0.9;
    eta[g] = 20.0;
  }

  std::printf("n=%d p=%d G=%d (best of %d reps)\n", n, p, G, reps);

  Eigen::MatrixXd delta_par, delta_ser;
  double t_par = time_best_of(
      reps, [&] { delta_par = kernels::mahalanobis_matrix(data, comps); });
  double t_ser = time_best_of(reps, [&] {
    delta_ser = kernels::serial::mahalanobis_matrix(data, comps);
  });
  std::printf("mahalanobis_matrix  omp %8.2f ms   serial %8.2f ms   "
              "speedup %.2fx   max|diff| %.3g\n",
              t_par, t_ser, t_ser / t_par,
              (delta_par - delta_ser).cwiseAbs().maxCoeff());

  kernels::PosteriorResult post_par, post_ser;
  const std::vector<int> no_labels;
  t_par = time_best_of(reps, [&] {
    post_par =
        kernels::posterior_update(delta_par, comps, pi, alpha, eta, no_labels);
  });
  t_ser = time_best_of(reps, [&] {
    post_ser = kernels::serial::posterior_update(delta_ser, comps, pi, alpha,
                                                 eta, no_labels);
  });
  std::printf("posterior_update    omp %8.2f ms   serial %8.2f ms   "
              "speedup %.2fx   max|diff| %.3g\n",
              t_par, t_ser, t_ser / t_par,
              (post_par.z - post_ser.z).cwiseAbs().maxCoeff());

  kernels::Moments mom_par, mom_ser;
  t_par = time_best_of(reps, [&] {
    mom_par = kernels::weighted_moments(data, post_par.z, post_par.v, eta);
  });
  t_ser = time_best_of(reps, [&] {
    mom_ser =
        kernels::serial::weighted_moments(data, post_ser.z, post_ser.v, eta);
  });
  double wdiff = 0.0;
  for (int g = 0; g < G; ++g) {
    wdiff = std::max(
        wdiff, (mom_par.scatter[g] - mom_ser.scatter[g]).cwiseAbs().maxCoeff() /
                   mom_ser.scatter[g].cwiseAbs().maxCoeff());
  }
  std::printf("weighted_moments    omp %8.2f ms   serial %8.2f ms   "
              "speedup %.2fx   max rel diff %.3g\n",
              t_par, t_ser, t_ser / t_par, wdiff);
  return 0;
}
