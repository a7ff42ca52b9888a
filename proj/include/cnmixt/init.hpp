#ifndef CNMIXT_INIT_HPP
#define CNMIXT_INIT_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "cnmixt/ecm.hpp"
#include "cnmixt/rng.hpp"

namespace cnmixt {

// Naming follows the original interface: "random.soft" draws one-hot rows
// from the uniform multinomial, "random.hard" normalizes uniform draws.
enum class InitKind { RandomSoft, RandomHard, KMeans, Mixt, Manual };

std::string to_string(InitKind kind);
InitKind parse_init(const std::string& name);

struct InitStrategy {
  InitKind kind = InitKind::Mixt;
  std::optional<Eigen::MatrixXd> start_z;  // required for Manual
  std::optional<Eigen::MatrixXd> start_v;  // defaults to all ones
};

Eigen::MatrixXd init_random_soft(int n, int groups, Rng& rng);
Eigen::MatrixXd init_random_hard(int n, int groups, Rng& rng);

// Lloyd's algorithm, distance-weighted seeding, 10 restarts of at most
// 100 sweeps each, best within-cluster sum of squares; one-hot output.
Eigen::MatrixXd init_kmeans(const Eigen::MatrixXd& data, int groups, Rng& rng);

// Posterior of the corresponding Gaussian parsimonious mixture, fitted by
// pinning alpha ~ 1 and eta ~ 1 on a k-means start. Falls back to the
// k-means partition if that warm fit fails.
Eigen::MatrixXd init_mixt(const Eigen::MatrixXd& data, const ModelSpec& spec,
                          const FitOptions& options, Rng& rng);

// Initial state (z0, v0, eta0 = 1.001) for the first CM-step.
InitState make_init(const Eigen::MatrixXd& data, const ModelSpec& spec,
                    const InitStrategy& strategy, const FitOptions& options,
                    Rng& rng);

}  // namespace cnmixt

#endif
