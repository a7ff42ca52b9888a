// Command line front end: `fit` runs the model grid over a CSV dataset,
// `simulate` writes the two-cluster-plus-noise artificial dataset, and
// `density` evaluates the contaminated normal density from a parameter
// file.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cnmixt/classify.hpp"
#include "cnmixt/errors.hpp"
#include "cnmixt/grid.hpp"
#include "cnmixt/io.hpp"
#include "cnmixt/mvn.hpp"

namespace {

using cnmixt::ConfigError;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream iss(s);
  while (std::getline(iss, item, sep)) out.push_back(item);
  return out;
}

// "1:4" or "1,2,4".
std::vector<int> parse_group_list(const std::string& s) {
  std::vector<int> out;
  const auto colon = s.find(':');
  try {
    if (colon != std::string::npos) {
      const int lo = std::stoi(s.substr(0, colon));
      const int hi = std::stoi(s.substr(colon + 1));
      for (int g = lo; g <= hi; ++g) out.push_back(g);
    } else {
      for (const auto& t : split(s, ',')) out.push_back(std::stoi(t));
    }
  } catch (const std::exception&) {
    throw ConfigError("cannot parse group list '" + s + "'");
  }
  if (out.empty()) throw ConfigError("empty group list '" + s + "'");
  return out;
}

std::vector<cnmixt::StructureCode> parse_model_list(const std::string& s) {
  if (s == "all") {
    return {cnmixt::kAllStructures.begin(), cnmixt::kAllStructures.end()};
  }
  std::vector<cnmixt::StructureCode> out;
  for (const auto& t : split(s, ',')) out.push_back(cnmixt::parse_structure(t));
  if (out.empty()) throw ConfigError("empty model list");
  return out;
}

Eigen::VectorXd parse_double_list(const std::string& s) {
  const auto parts = split(s, ',');
  Eigen::VectorXd v(parts.size());
  try {
    for (size_t i = 0; i < parts.size(); ++i) v[i] = std::stod(parts[i]);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse numeric list '" + s + "'");
  }
  return v;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  try {
    for (const auto& t : split(s, ',')) out.push_back(std::stoi(t));
  } catch (const std::exception&) {
    throw ConfigError("cannot parse integer list '" + s + "'");
  }
  return out;
}

struct FitArgs {
  std::string data_path;
  std::string label_column;
  std::string models = "all";
  std::string groups = "1:3";
  std::string init = "mixt";
  std::string start_z_path, start_v_path;
  std::string alpha_fix, alpha_min = "0.5", eta_fix, eta_max = "1000";
  std::string ind_label, label;
  std::uint64_t seed = 0;
  int iter_max = 1000;
  double threshold = 1e-3;
  double eps = 1e-100;
  int parallel = 0;
  std::string out_path;
};

int cmd_fit(const FitArgs& args) {
  const cnmixt::Dataset ds = cnmixt::read_csv(args.data_path,
                                              args.label_column);
  if (ds.values.cols() < 2)
    throw ConfigError("dataset must have p > 1 numeric columns");

  cnmixt::GridConfig config;
  config.models = parse_model_list(args.models);
  config.groups = parse_group_list(args.groups);
  config.seed = args.seed;
  config.workers = args.parallel;
  config.init.kind = cnmixt::parse_init(args.init);
  if (!args.start_z_path.empty())
    config.init.start_z = cnmixt::read_matrix_csv(args.start_z_path);
  if (!args.start_v_path.empty())
    config.init.start_v = cnmixt::read_matrix_csv(args.start_v_path);
  if (!args.alpha_fix.empty())
    config.options.alpha_fix = parse_double_list(args.alpha_fix);
  if (args.alpha_min == "none")
    config.options.alpha_min.reset();
  else
    config.options.alpha_min = parse_double_list(args.alpha_min);
  if (!args.eta_fix.empty())
    config.options.eta_fix = parse_double_list(args.eta_fix);
  config.options.eta_max = parse_double_list(args.eta_max);
  config.options.iter_max = args.iter_max;
  config.options.threshold = args.threshold;
  config.options.eps = args.eps;

  // Semi-supervised labels: --ind-label gives 1-based row positions,
  // --label the corresponding 1-based group memberships.
  std::vector<int> labels;
  if (!args.ind_label.empty() || !args.label.empty()) {
    const auto ind = parse_int_list(args.ind_label);
    const auto lab = parse_int_list(args.label);
    if (ind.size() != lab.size())
      throw ConfigError("--ind-label and --label must have equal length");
    labels.assign(ds.values.rows(), -1);
    for (size_t k = 0; k < ind.size(); ++k) {
      if (ind[k] < 1 || ind[k] > ds.values.rows())
        throw ConfigError("--ind-label position out of range");
      if (lab[k] < 1) throw ConfigError("--label memberships are 1-based");
      labels[ind[k] - 1] = lab[k] - 1;
    }
  }

  const auto results = cnmixt::run_grid(ds.values, config, labels);
  bool any_ok = false;
  for (const auto& r : results) any_ok = any_ok || r.ok;
  if (!any_ok) {
    std::cerr << "all candidate fits failed:\n";
    for (const auto& r : results) {
      std::cerr << "  " << cnmixt::to_string(r.spec.code)
                << " G=" << r.spec.groups << ": " << r.failure << "\n";
    }
    return 3;
  }

  const nlohmann::json report =
      cnmixt::build_report(ds.values, results, config, labels, ds.labels);
  if (!args.out_path.empty()) {
    std::ofstream out(args.out_path);
    if (!out) throw ConfigError("cannot write '" + args.out_path + "'");
    out << report.dump(2) << "\n";
  } else {
    std::cout << report.dump(2) << "\n";
  }

  for (cnmixt::CriterionCode c : cnmixt::kAllCriteria) {
    const auto& b = report["best"][cnmixt::to_string(c)];
    if (!b.is_null()) {
      std::cerr << "best by " << cnmixt::to_string(c) << ": "
                << b["model"].get<std::string>() << " with G = "
                << b["G"].get<int>() << "\n";
    }
  }
  if (report.contains("agreement")) {
    std::cerr << report["agreement"]["text"].get<std::string>();
  }
  return 0;
}

int cmd_simulate(std::uint64_t seed, const std::string& out_path) {
  const cnmixt::SimulatedData sim = cnmixt::simulate_artificial(seed);
  std::ostringstream oss;
  oss.precision(17);
  oss << "x1,x2,group\n";
  for (int i = 0; i < sim.points.rows(); ++i) {
    oss << sim.points(i, 0) << "," << sim.points(i, 1) << ","
        << sim.truth[i] << "\n";
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot write '" + out_path + "'");
    out << oss.str();
  } else {
    std::cout << oss.str();
  }
  return 0;
}

int cmd_density(const std::string& params_path, const std::string& data_path) {
  std::ifstream in(params_path);
  if (!in) throw ConfigError("cannot open '" + params_path + "'");
  nlohmann::json pj;
  try {
    in >> pj;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("malformed parameter file: ") + e.what());
  }
  cnmixt::GaussianParams gauss;
  cnmixt::ContaminationParams cont{};
  try {
    const auto mu = pj.at("mu").get<std::vector<double>>();
    gauss.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), mu.size());
    const auto rows = pj.at("sigma").get<std::vector<std::vector<double>>>();
    gauss.sigma.resize(rows.size(), rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size())
        throw ConfigError("sigma must be square");
      for (size_t j = 0; j < rows[i].size(); ++j)
        gauss.sigma(i, j) = rows[i][j];
    }
    cont.alpha = pj.at("alpha").get<double>();
    cont.eta = pj.at("eta").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed parameter file: ") + e.what());
  }
  if (!(cont.alpha > 0.0 && cont.alpha < 1.0))
    throw ConfigError("alpha must be in (0, 1)");
  if (!(cont.eta > 1.0)) throw ConfigError("eta must be > 1");

  const cnmixt::Dataset ds = cnmixt::read_csv(data_path);
  if (ds.values.cols() != gauss.mu.size())
    throw ConfigError("point dimension does not match parameters");
  std::cout.precision(17);
  for (int i = 0; i < ds.values.rows(); ++i) {
    std::cout << std::exp(cnmixt::log_dcn(ds.values.row(i).transpose(), gauss,
                                          cont))
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustering and classification with mixtures of multivariate "
               "contaminated normal distributions"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit the model grid to a dataset");
  fit_cmd->add_option("--data", fit.data_path, "input CSV (header required)")
      ->required();
  fit_cmd->add_option("--label-column", fit.label_column,
                      "CSV column holding a reference partition");
  fit_cmd->add_option("--models", fit.models,
                      "comma list of structures or 'all'");
  fit_cmd->add_option("--G", fit.groups, "group counts, e.g. 1:4 or 2,3");
  fit_cmd->add_option("--init", fit.init,
                      "random.soft|random.hard|kmeans|mixt|manual");
  fit_cmd->add_option("--start-z", fit.start_z_path,
                      "CSV with initial z (manual init)");
  fit_cmd->add_option("--start-v", fit.start_v_path, "CSV with initial v");
  fit_cmd->add_option("--alpha-fix", fit.alpha_fix,
                      "fixed alpha values (comma list)");
  fit_cmd->add_option("--alpha-min", fit.alpha_min,
                      "lower bounds for alpha, or 'none'");
  fit_cmd->add_option("--eta-fix", fit.eta_fix, "fixed eta values");
  fit_cmd->add_option("--eta-max", fit.eta_max, "upper bounds for eta");
  fit_cmd->add_option("--seed", fit.seed, "random seed");
  fit_cmd->add_option("--ind-label", fit.ind_label,
                      "1-based positions of labeled rows");
  fit_cmd->add_option("--label", fit.label,
                      "1-based memberships for --ind-label rows");
  fit_cmd->add_option("--iter-max", fit.iter_max, "maximum ECM iterations");
  fit_cmd->add_option("--threshold", fit.threshold,
                      "Aitken stopping threshold");
  fit_cmd->add_option("--eps", fit.eps, "eigenvalue floor");
  fit_cmd->add_option("--parallel", fit.parallel,
                      "worker count (0 = auto, or CNMIXT_WORKERS)");
  fit_cmd->add_option("--out", fit.out_path, "report path (default stdout)");

  std::uint64_t sim_seed = 0;
  std::string sim_out;
  auto* sim_cmd =
      app.add_subcommand("simulate", "write the artificial dataset");
  sim_cmd->add_option("--seed", sim_seed, "random seed")->required();
  sim_cmd->add_option("--out", sim_out, "output CSV (default stdout)");

  std::string dens_params, dens_data;
  auto* dens_cmd = app.add_subcommand(
      "density", "evaluate the contaminated normal density");
  dens_cmd->add_option("--params", dens_params, "JSON parameter file")
      ->required();
  dens_cmd->add_option("--data", dens_data, "CSV of points")->required();

  try {
    app.parse(argc, argv);
    if (fit_cmd->parsed()) return cmd_fit(fit);
    if (sim_cmd->parsed()) return cmd_simulate(sim_seed, sim_out);
    if (dens_cmd->parsed()) return cmd_density(dens_params, dens_data);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
