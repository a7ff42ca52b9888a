#include "cnmixt/init.hpp"

#include <cmath>
#include <limits>

#include "cnmixt/errors.hpp"

namespace cnmixt {

namespace {

// One Lloyd run from a distance-weighted seeding; returns assignments and
// the within-cluster sum of squares.
double lloyd_run(const Eigen::MatrixXd& data, int k, Rng& rng,
                 std::vector<int>& assign) {
  const int n = static_cast<int>(data.rows());
  const int p = static_cast<int>(data.cols());

  Eigen::MatrixXd centers(k, p);
  centers.row(0) = data.row(rng.uniform_index(n));
  Eigen::VectorXd d2 = (data.rowwise() - centers.row(0))
                           .rowwise()
                           .squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    int pick = n - 1;
    if (total > 0.0) {
      double target = rng.uniform() * total, run = 0.0;
      for (int i = 0; i < n; ++i) {
        run += d2[i];
        if (run >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_index(n);
    }
    centers.row(c) = data.row(pick);
    d2 = d2.cwiseMin(
        (data.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  assign.assign(n, 0);
  double wcss = 0.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool changed = false;
    wcss = 0.0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (data.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
      wcss += best_d;
    }
    if (!changed && sweep > 0) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, p);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (int i = 0; i < n; ++i) {
      sums.row(assign[i]) += data.row(i);
      counts[assign[i]] += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0.0) {
        centers.row(c) = sums.row(c) / counts[c];
      } else {
        // Re-seed an emptied cluster on the point farthest from its center.
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          const double d = (data.row(i) - centers.row(assign[i])).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centers.row(c) = data.row(far);
      }
    }
  }
  return wcss;
}

Eigen::MatrixXd one_hot(const std::vector<int>& assign, int k) {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(assign.size(), k);
  for (size_t i = 0; i < assign.size(); ++i) z(i, assign[i]) = 1.0;
  return z;
}

}  // namespace

std::string to_string(InitKind kind) {
  switch (kind) {
    case InitKind::RandomSoft: return "random.soft";
    case InitKind::RandomHard: return "random.hard";
    case InitKind::KMeans: return "kmeans";
    case InitKind::Mixt: return "mixt";
    case InitKind::Manual: return "manual";
  }
  return "";
}

InitKind parse_init(const std::string& name) {
  for (InitKind k : {InitKind::RandomSoft, InitKind::RandomHard,
                     InitKind::KMeans, InitKind::Mixt, InitKind::Manual}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown initialization strategy '" + name + "'");
}

Eigen::MatrixXd init_random_soft(int n, int groups, Rng& rng) {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, groups);
  for (int i = 0; i < n; ++i) z(i, rng.uniform_index(groups)) = 1.0;
  return z;
}

Eigen::MatrixXd init_random_hard(int n, int groups, Rng& rng) {
  Eigen::MatrixXd z(n, groups);
  for (int i = 0; i < n; ++i) {
    for (int g = 0; g < groups; ++g) z(i, g) = rng.uniform();
    z.row(i) /= z.row(i).sum();
  }
  return z;
}

Eigen::MatrixXd init_kmeans(const Eigen::MatrixXd& data, int groups,
                            Rng& rng) {
  const int n = static_cast<int>(data.rows());
  if (n < groups) throw ConfigError("fewer observations than clusters");
  if (groups == 1) return Eigen::MatrixXd::Ones(n, 1);

  std::vector<int> best_assign, assign;
  double best_wcss = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < 10; ++restart) {
    const double wcss = lloyd_run(data, groups, rng, assign);
    if (wcss < best_wcss) {
      best_wcss = wcss;
      best_assign = assign;
    }
  }
  return one_hot(best_assign, groups);
}

Eigen::MatrixXd init_mixt(const Eigen::MatrixXd& data, const ModelSpec& spec,
                          const FitOptions& options, Rng& rng) {
  const Eigen::MatrixXd z0 = init_kmeans(data, spec.groups, rng);
  FitOptions gauss = options;
  gauss.alpha_fix = Eigen::VectorXd::Constant(spec.groups, 1.0 - 1e-12);
  gauss.eta_fix = Eigen::VectorXd::Constant(spec.groups, 1.0 + 1e-12);
  InitState init;
  init.z0 = z0;
  const FitResult warm = fit_single(data, spec, init, gauss);
  if (!warm.ok) return z0;  // fall back to the k-means partition
  return warm.resp.z;
}

InitState make_init(const Eigen::MatrixXd& data, const ModelSpec& spec,
                    const InitStrategy& strategy, const FitOptions& options,
                    Rng& rng) {
  const int n = static_cast<int>(data.rows());
  const int G = spec.groups;
  InitState init;
  switch (strategy.kind) {
    case InitKind::RandomSoft:
      init.z0 = init_random_soft(n, G, rng);
      break;
    case InitKind::RandomHard:
      init.z0 = init_random_hard(n, G, rng);
      break;
    case InitKind::KMeans:
      init.z0 = init_kmeans(data, G, rng);
      break;
    case InitKind::Mixt:
      init.z0 = init_mixt(data, spec, options, rng);
      break;
    case InitKind::Manual:
      if (!strategy.start_z)
        throw ConfigError("manual initialization requires start z");
      if (strategy.start_z->rows() != n || strategy.start_z->cols() != G)
        throw ConfigError("start z has wrong shape");
      init.z0 = *strategy.start_z;
      break;
  }
  if (strategy.start_v) {
    if (strategy.start_v->rows() != n || strategy.start_v->cols() != G)
      throw ConfigError("start v has wrong shape");
    init.v0 = *strategy.start_v;
  } else {
    init.v0 = Eigen::MatrixXd::Ones(n, G);
  }
  return init;
}

}  // namespace cnmixt
