#include "cnmixt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cnmixt/classify.hpp"
#include "cnmixt/errors.hpp"

namespace cnmixt {

namespace {

struct Candidate {
  ModelSpec spec;
  std::vector<StructureCode> equivalent;
};

std::vector<Candidate> enumerate_candidates(const GridConfig& config) {
  std::vector<int> groups = config.groups;
  std::sort(groups.begin(), groups.end());
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());

  std::vector<Candidate> out;
  for (int G : groups) {
    if (G < 1) throw ConfigError("number of groups must be >= 1");
    if (G > 1) {
      for (StructureCode code : config.models)
        out.push_back({{code, G}, {}});
      continue;
    }
    // G = 1: one representative per equivalence class.
    for (StructureCode code : config.models) {
      const StructureCode rep = g1_representative(code);
      auto it = std::find_if(out.begin(), out.end(), [&](const Candidate& c) {
        return c.spec.groups == 1 && c.spec.code == rep;
      });
      if (it == out.end()) {
        out.push_back({{rep, 1}, {code}});
      } else if (std::find(it->equivalent.begin(), it->equivalent.end(),
                           code) == it->equivalent.end()) {
        it->equivalent.push_back(code);
      }
    }
  }
  return out;
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CNMIXT_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json model_json(const FitResult& r, double eps) {
  nlohmann::json j;
  j["model"] = to_string(r.spec.code);
  j["G"] = r.spec.groups;
  j["ok"] = r.ok;
  if (!r.equivalent.empty()) {
    nlohmann::json eq = nlohmann::json::array();
    for (StructureCode c : r.equivalent) eq.push_back(to_string(c));
    j["equivalent_models"] = eq;
  }
  if (!r.ok) {
    j["failure"] = r.failure;
    return j;
  }
  j["loglik"] = r.loglik;
  j["n_par"] = r.free_params;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  nlohmann::json crit;
  for (CriterionCode c : kAllCriteria) crit[to_string(c)] = r.crit[c];
  j["criteria"] = crit;
  j["pi"] = vector_json(r.psi.pi);
  j["alpha"] = vector_json(r.psi.alpha);
  j["eta"] = vector_json(r.psi.eta);
  nlohmann::json mu = nlohmann::json::array();
  for (const auto& m : r.psi.mu) mu.push_back(vector_json(m));
  j["mu"] = mu;
  nlohmann::json sigma = nlohmann::json::array();
  nlohmann::json scale = nlohmann::json::array();
  for (const auto& s : r.psi.scale) {
    sigma.push_back(matrix_json(reconstruct_floored(s, eps)));
    nlohmann::json sj;
    sj["volume"] = s.volume;
    sj["shape"] = vector_json(s.shape);
    sj["orientation"] = matrix_json(s.orientation);
    scale.push_back(std::move(sj));
  }
  j["sigma"] = sigma;
  j["scale"] = scale;
  return j;
}

}  // namespace

std::vector<FitResult> run_grid(const Eigen::MatrixXd& data,
                                const GridConfig& config,
                                const std::vector<int>& labels) {
  if (config.models.empty()) throw ConfigError("empty model list");
  const auto candidates = enumerate_candidates(config);
  const int total = static_cast<int>(candidates.size());
  const int workers = resolve_workers(config.workers);

  std::vector<FitResult> results(total);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int idx = 0; idx < total; ++idx) {
    const Candidate& cand = candidates[idx];
    Rng rng(Rng::derive(config.seed, static_cast<std::uint64_t>(idx)));
    FitResult r;
    try {
      const InitState init =
          make_init(data, cand.spec, config.init, config.options, rng);
      r = fit_single(data, cand.spec, init, config.options, labels);
    } catch (const std::exception& e) {
      r.spec = cand.spec;
      r.failure = e.what();
    }
    r.equivalent = cand.equivalent;
    results[idx] = std::move(r);
  }
  return results;
}

nlohmann::json build_report(const Eigen::MatrixXd& data,
                            const std::vector<FitResult>& results,
                            const GridConfig& config,
                            const std::vector<int>& labels,
                            const std::vector<std::string>& given_groups) {
  nlohmann::json j;
  j["schema"] = 1;
  j["n"] = data.rows();
  j["p"] = data.cols();
  j["seed"] = config.seed;
  j["init"] = to_string(config.init.kind);

  nlohmann::json models = nlohmann::json::array();
  for (const auto& r : results) models.push_back(model_json(r, config.options.eps));
  j["models"] = models;

  nlohmann::json best;
  for (CriterionCode c : kAllCriteria) {
    try {
      const FitResult& b = best_model(results, c);
      best[to_string(c)] = {{"model", to_string(b.spec.code)},
                            {"G", b.spec.groups}};
    } catch (const DegenerateFitError&) {
      best[to_string(c)] = nullptr;
    }
  }
  j["best"] = best;

  const FitResult* bic_best = nullptr;
  try {
    bic_best = &best_model(results, CriterionCode::BIC);
  } catch (const DegenerateFitError&) {
  }
  if (bic_best) {
    const DetectionTable det = detect(bic_best->resp.z, bic_best->resp.v);
    nlohmann::json obs;
    obs["model"] = to_string(bic_best->spec.code);
    obs["G"] = bic_best->spec.groups;
    obs["z"] = matrix_json(bic_best->resp.z);
    nlohmann::json map_group = nlohmann::json::array();
    nlohmann::json is_good = nlohmann::json::array();
    for (size_t i = 0; i < det.map_group.size(); ++i) {
      map_group.push_back(det.map_group[i] + 1);
      is_good.push_back(static_cast<bool>(det.is_good[i]));
    }
    obs["map_group"] = map_group;
    obs["is_good"] = is_good;
    j["observations"] = obs;

    if (!given_groups.empty()) {
      std::vector<char> mask;
      if (!labels.empty()) {
        mask.resize(labels.size());
        for (size_t i = 0; i < labels.size(); ++i) mask[i] = labels[i] < 0;
      }
      const AgreementTable table = agree(det, given_groups, mask);
      nlohmann::json aj;
      aj["given"] = table.given;
      nlohmann::json counts = nlohmann::json::array();
      for (int r = 0; r < table.counts.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < table.counts.cols(); ++c)
          row.push_back(table.counts(r, c));
        counts.push_back(std::move(row));
      }
      aj["counts"] = counts;
      aj["compared"] = table.compared;
      aj["text"] = format(table);
      j["agreement"] = aj;
    }
  }
  return j;
}

SimulatedData simulate_artificial(std::uint64_t seed) {
  Rng rng(seed);
  SimulatedData out;
  out.points.resize(420, 2);
  out.truth.resize(420);
  const double sd1 = std::sqrt(5.0), sd2 = std::sqrt(0.5);
  for (int i = 0; i < 200; ++i) {
    out.points(i, 0) = 2.0 + sd1 * rng.normal();
    out.points(i, 1) = 2.0 + sd2 * rng.normal();
    out.truth[i] = 1;
  }
  for (int i = 200; i < 400; ++i) {
    out.points(i, 0) = -2.0 + sd1 * rng.normal();
    out.points(i, 1) = -2.0 + sd2 * rng.normal();
    out.truth[i] = 2;
  }
  for (int i = 400; i < 420; ++i) {
    out.points(i, 0) = rng.uniform(-20.0, 20.0);
    out.points(i, 1) = rng.uniform(-20.0, 20.0);
    out.truth[i] = 3;
  }
  return out;
}

}  // namespace cnmixt
