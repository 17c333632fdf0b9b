// bezierfit: risk tables, allocations, fitting, experiments and front sampling.
//
// Exit codes: 0 success, 2 invalid configuration or arguments,
// 3 numerical failure (singular design, missing strata, non-convergence),
// 4 I/O or parse failure.

#include <bezierfit/bezier.hpp>
#include <bezierfit/errors.hpp>
#include <bezierfit/experiment.hpp>
#include <bezierfit/fit.hpp>
#include <bezierfit/problems.hpp>
#include <bezierfit/risk.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace bezierfit;
using nlohmann::json;

enum ExitCode { kOk = 0, kInvalidConfig = 2, kNumerical = 3, kIo = 4 };

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::ios_base::failure("failed writing '" + path + "'");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "' for reading");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

json level_map(const std::map<int, double>& m) {
  json j = json::object();
  for (const auto& [level, v] : m) j[std::to_string(level)] = v;
  return j;
}

json level_map(const std::map<int, std::size_t>& m) {
  json j = json::object();
  for (const auto& [level, v] : m) j[std::to_string(level)] = v;
  return j;
}

void require_range(int value, int lo, const char* name) {
  if (value < lo) throw ConfigError(std::string("--") + name + " must be >= " + std::to_string(lo));
}

// ---------------------------------------------------------------------------

struct RiskArgs {
  int M = 0, D = 0;
  double sigma2L = 1.0;
  std::size_t N = 0;
};

json risk_json(const RiskArgs& a) {
  require_range(a.M, 1, "M");
  require_range(a.D, 1, "D");
  const RiskModel aao = aao_risk_model(a.M, a.D, a.sigma2L);
  const RiskModel isk = isk_risk_coefficients(a.M, a.D, a.sigma2L);
  double root_sum = 0;
  std::map<int, double> fractions;
  for (const auto& [m, c] : isk.isk_coefficients) root_sum += std::sqrt(c);
  for (const auto& [m, c] : isk.isk_coefficients) fractions[m] = std::sqrt(c) / root_sum;
  json j{{"M", a.M},
         {"D", a.D},
         {"sigma2L", a.sigma2L},
         {"aao_coefficient", aao.aao_coefficient},
         {"isk_coefficients", level_map(isk.isk_coefficients)},
         {"optimal_fractions", level_map(fractions)},
         {"optimal_risk_coefficient", root_sum * root_sum}};
  if (a.N > 0) {
    const Allocation alloc = optimal_allocation(isk, a.N);
    j["N"] = a.N;
    j["aao_risk"] = aao_risk(a.M, a.D, a.sigma2L, static_cast<double>(a.N));
    j["optimal_risk"] = alloc.minimized_risk;
    j["optimal_allocation"] = level_map(alloc.per_level);
    j["allocated_risk"] = alloc.allocated_risk;
  }
  return j;
}

struct AllocateArgs {
  int M = 0, D = 0;
  std::size_t N = 0;
  double sigma2L = 1.0;
  std::string rule = "optimal";
  bool all_levels = false;
};

json allocate_json(const AllocateArgs& a) {
  require_range(a.M, 1, "M");
  require_range(a.D, 1, "D");
  if (a.N == 0) throw ConfigError("--N must be >= 1");
  const RiskModel isk = isk_risk_coefficients(a.M, a.D, a.sigma2L);
  Allocation alloc;
  try {
    alloc = a.rule == "optimal" ? optimal_allocation(isk, a.N) : equal_allocation(isk, a.N, a.all_levels);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::map<int, double> sizes;
  for (const auto& [m, n] : alloc.per_level) sizes[m] = static_cast<double>(n);
  json j{{"M", a.M},       {"D", a.D},
         {"N", a.N},       {"rule", a.rule},
         {"fractions", level_map(alloc.fractions)},
         {"per_level", level_map(alloc.per_level)},
         {"risk", isk.risk(sizes)}};
  if (a.rule == "optimal") j["minimized_risk"] = alloc.minimized_risk;
  return j;
}

struct FitArgs {
  std::string input, output, method = "aao";
  int D = 0;
};

json fit_json(const FitArgs& a) {
  require_range(a.D, 1, "D");
  std::ifstream in(a.input);
  if (!in) throw std::ios_base::failure("cannot open '" + a.input + "' for reading");
  const SampleFile file = read_sample_csv(in);
  std::optional<BezierSimplex> model;
  double residual = 0;
  if (a.method == "aao") {
    Sample all = file.unstratified;
    for (const auto& [m, s] : file.strata.levels)
      for (std::size_t n = 0; n < s.size(); ++n) all.append(s.points()[n], s.values().row(static_cast<Eigen::Index>(n)));
    model = fit_all_at_once(all, a.D);
    residual = normal_residual(model->basis().design(all.points()), all.values(), model->control_points());
  } else {
    if (!file.unstratified.empty())
      throw ConfigError("method isk needs a stratified sample (level column 1..M on every row)");
    model = fit_inductive_skeleton(file.strata, a.D);
  }
  json j = to_json(*model);
  j["method"] = a.method;
  if (a.method == "aao") j["normal_residual"] = residual;
  return j;
}

struct FrontArgs {
  std::string problem = "med", dataset, output;
  std::size_t n = 0;
  std::vector<std::size_t> per_level;
  std::uint64_t seed = 0;
  double eps = 1e-4, sigma = 0.0;
};

std::string frontgen_csv(const FrontArgs& a) {
  std::map<int, std::size_t> strata;
  for (std::size_t m = 0; m < a.per_level.size(); ++m) strata[static_cast<int>(m) + 1] = a.per_level[m];
  if (strata.size() > 3) throw ConfigError("--per-level takes at most 3 sizes (levels 1..3)");
  std::ostringstream out;
  if (a.problem == "med") {
    if (strata.empty())
      write_sample_csv(out, med_sample(a.n, a.seed, a.sigma));
    else
      write_sample_csv(out, med_stratified_sample(strata, a.seed, a.sigma));
  } else if (a.problem == "grouplasso") {
    if (a.dataset.empty()) throw ConfigError("--dataset is required for grouplasso");
    if (!(a.eps > 0)) throw ConfigError("--eps must be positive");
    const RegressionDataset ds = load_regression_dataset(a.dataset);
    if (strata.empty())
      write_sample_csv(out, group_lasso_front_sample(ds, a.n, a.eps, a.seed));
    else
      write_sample_csv(out, group_lasso_stratified_front_sample(ds, strata, a.eps, a.seed));
  } else {
    throw ConfigError("unknown problem '" + a.problem + "' (expected med or grouplasso)");
  }
  return out.str();
}

struct ExperimentArgs {
  std::string config_path, out, format = "json";
  bool no_wall_time = false;
  json overrides = json::object();
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bezier simplex fitting: risks, allocations, fits, experiments and front samples"};
  app.require_subcommand(1);

  RiskArgs risk;
  auto* risk_cmd = app.add_subcommand("risk", "Asymptotic risk coefficients and optimal fractions");
  risk_cmd->add_option("--M", risk.M, "Number of simplex vertices")->required();
  risk_cmd->add_option("--D", risk.D, "Degree")->required();
  risk_cmd->add_option("--sigma2L", risk.sigma2L, "Noise scale sigma^2 L");
  risk_cmd->add_option("--N", risk.N, "Total sample size (adds risks and integer allocation)");

  AllocateArgs alloc;
  auto* alloc_cmd = app.add_subcommand("allocate", "Split N over skeleton levels");
  alloc_cmd->add_option("--M", alloc.M)->required();
  alloc_cmd->add_option("--D", alloc.D)->required();
  alloc_cmd->add_option("--N", alloc.N)->required();
  alloc_cmd->add_option("--sigma2L", alloc.sigma2L);
  alloc_cmd->add_option("--rule", alloc.rule, "optimal or equal")->check(CLI::IsMember({"optimal", "equal"}));
  alloc_cmd->add_flag("--equal-split-all-levels", alloc.all_levels, "Equal rule over all M levels");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a Bezier simplex to a sample CSV");
  fit_cmd->add_option("--input", fit.input, "Sample CSV (t_1..t_M, x_1..x_L, level)")->required();
  fit_cmd->add_option("--D", fit.D)->required();
  fit_cmd->add_option("--method", fit.method, "aao or isk")->check(CLI::IsMember({"aao", "isk"}));
  fit_cmd->add_option("--out", fit.output, "Model JSON path (default stdout)");

  FrontArgs front;
  auto* front_cmd = app.add_subcommand("frontgen", "Sample a Pareto front to CSV");
  front_cmd->add_option("--problem", front.problem, "med or grouplasso");
  front_cmd->add_option("--n", front.n, "Unstratified sample size");
  front_cmd->add_option("--per-level", front.per_level, "Stratified sizes for levels 1, 2, ...")->delimiter(',');
  front_cmd->add_option("--seed", front.seed);
  front_cmd->add_option("--dataset", front.dataset, "Regression CSV for grouplasso");
  front_cmd->add_option("--eps", front.eps);
  front_cmd->add_option("--sigma", front.sigma, "Gaussian noise added to MED values");
  front_cmd->add_option("--out", front.output, "CSV path (default stdout)");

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "Run repeated train/fit/test trials");
  exp_cmd->add_option("--config", exp.config_path, "Config JSON; flags override its keys");
  exp_cmd->add_option("--out", exp.out, "Report path (default: config 'output' or stdout)");
  exp_cmd->add_option("--format", exp.format)->check(CLI::IsMember({"json", "csv"}));
  exp_cmd->add_flag("--no-wall-time", exp.no_wall_time, "Omit wall time (byte-reproducible output)");
  std::string problem, dataset;
  std::vector<std::string> methods;
  int L = 0, M = 0, D = 0;
  std::size_t N = 0, trials = 0, test_size = 0, workers = 0;
  std::uint64_t seed = 0;
  double sigma = 0, eps = 0;
  bool all_levels = false;
  auto* o_problem = exp_cmd->add_option("--problem", problem);
  auto* o_methods = exp_cmd->add_option("--method", methods, "aao, isk-optimal, isk-equal (repeatable)");
  auto* o_L = exp_cmd->add_option("--L", L);
  auto* o_M = exp_cmd->add_option("--M", M);
  auto* o_D = exp_cmd->add_option("--D", D);
  auto* o_N = exp_cmd->add_option("--N", N);
  auto* o_sigma = exp_cmd->add_option("--sigma", sigma);
  auto* o_trials = exp_cmd->add_option("--trials", trials);
  auto* o_test = exp_cmd->add_option("--test-size", test_size);
  auto* o_seed = exp_cmd->add_option("--seed", seed);
  auto* o_workers = exp_cmd->add_option("--workers", workers);
  auto* o_eps = exp_cmd->add_option("--eps", eps);
  auto* o_dataset = exp_cmd->add_option("--dataset", dataset);
  auto* o_all = exp_cmd->add_flag("--equal-split-all-levels", all_levels);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidConfig;
  }

  try {
    if (*risk_cmd) {
      write_text("", risk_json(risk).dump(2) + "\n");
    } else if (*alloc_cmd) {
      write_text("", allocate_json(alloc).dump(2) + "\n");
    } else if (*fit_cmd) {
      write_text(fit.output, fit_json(fit).dump(2) + "\n");
    } else if (*front_cmd) {
      if (front.n == 0 && front.per_level.empty()) throw ConfigError("give --n or --per-level");
      if (front.n > 0 && !front.per_level.empty()) throw ConfigError("--n and --per-level are exclusive");
      write_text(front.output, frontgen_csv(front));
    } else if (*exp_cmd) {
      json cfg = exp.config_path.empty() ? json::object() : read_json_file(exp.config_path);
      if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
      if (*o_problem) cfg["problem"] = problem;
      if (*o_methods) {
        cfg.erase("method");
        cfg["methods"] = methods;
      }
      if (*o_L) cfg["L"] = L;
      if (*o_M) cfg["M"] = M;
      if (*o_D) cfg["D"] = D;
      if (*o_N) cfg["N"] = N;
      if (*o_sigma) cfg["sigma"] = sigma;
      if (*o_trials) cfg["trials"] = trials;
      if (*o_test) cfg["test_size"] = test_size;
      if (*o_seed) cfg["seed"] = seed;
      if (*o_workers) cfg["workers"] = workers;
      if (*o_eps) cfg["eps"] = eps;
      if (*o_dataset) cfg["dataset"] = dataset;
      if (*o_all) cfg["equal_split_all_levels"] = all_levels;
      const ExperimentConfig config = config_from_json(cfg);
      const ExperimentReport report = run_experiment(config);
      const std::string path = !exp.out.empty() ? exp.out : config.output;
      std::ostringstream text;
      if (exp.format == "json")
        text << to_json(report, !exp.no_wall_time).dump(2) << '\n';
      else
        write_report_csv(text, report);
      write_text(path, text.str());
    }
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const SingularDesignError& e) {
    std::cerr << "singular design: " << e.what() << '\n';
    return kNumerical;
  } catch (const InsufficientStrataError& e) {
    std::cerr << "insufficient strata: " << e.what() << '\n';
    return kNumerical;
  } catch (const ConvergenceError& e) {
    std::cerr << "no convergence: " << e.what() << '\n';
    return kNumerical;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kIo;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
}
