#pragma once

// Experiment harness: repeated train/fit/test trials on the synthetic, MED
// and group-lasso problems, MSE statistics, Welch comparisons and report I/O.

#include <bezierfit/bezier.hpp>
#include <bezierfit/errors.hpp>
#include <bezierfit/fit.hpp>
#include <bezierfit/problems.hpp>
#include <bezierfit/risk.hpp>
#include <bezierfit/simplex.hpp>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace bezierfit {

enum class Problem { Synthetic, Med, GroupLasso };
enum class Method { AllAtOnce, IskOptimal, IskEqual };

inline std::string to_string(Problem p) {
  switch (p) {
    case Problem::Synthetic: return "synthetic";
    case Problem::Med: return "med";
    case Problem::GroupLasso: return "grouplasso";
  }
  return "?";
}

inline std::string to_string(Method m) {
  switch (m) {
    case Method::AllAtOnce: return "aao";
    case Method::IskOptimal: return "isk-optimal";
    case Method::IskEqual: return "isk-equal";
  }
  return "?";
}

inline Problem parse_problem(const std::string& s) {
  if (s == "synthetic") return Problem::Synthetic;
  if (s == "med") return Problem::Med;
  if (s == "grouplasso") return Problem::GroupLasso;
  throw ConfigError("unknown problem '" + s + "' (expected synthetic, med or grouplasso)");
}

inline Method parse_method(const std::string& s) {
  if (s == "aao") return Method::AllAtOnce;
  if (s == "isk-optimal") return Method::IskOptimal;
  if (s == "isk-equal") return Method::IskEqual;
  throw ConfigError("unknown method '" + s + "' (expected aao, isk-optimal or isk-equal)");
}

struct ExperimentConfig {
  Problem problem = Problem::Synthetic;
  std::vector<Method> methods{Method::AllAtOnce};  // compared on paired seeds
  int L = 100;
  int M = 8;
  int D = 2;
  std::size_t N = 1000;
  double sigma = 0.1;
  std::size_t trials = 20;
  std::size_t test_size = 0;  // 0: problem default (10000, or 1000 for grouplasso)
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool equal_split_all_levels = false;
  double eps = 1e-4;           // group-lasso perturbation
  std::string dataset;         // group-lasso CSV
  std::string output;          // report path (CLI only)

  std::size_t effective_test_size() const {
    if (test_size != 0) return test_size;
    return problem == Problem::GroupLasso ? 1000 : 10000;
  }

  /// Throws ConfigError on an invalid combination. The MED and group-lasso
  /// problems have three objectives, so M and L are forced to 3.
  void validate() const {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (test_size == 0 && effective_test_size() == 0) throw ConfigError("test_size must be >= 1");
    if (methods.empty()) throw ConfigError("at least one method is required");
    if (N < 1) throw ConfigError("N must be >= 1");
    if (D < 1) throw ConfigError("D must be >= 1");
    if (M < 1) throw ConfigError("M must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (!(sigma >= 0) || !std::isfinite(sigma)) throw ConfigError("sigma must be finite and >= 0");
    if (problem == Problem::Synthetic && L < M) throw ConfigError("synthetic problem needs L >= M");
    if (problem != Problem::Synthetic && (M != 3 || L != 3))
      throw ConfigError(to_string(problem) + " problem has M = L = 3");
    if (problem == Problem::GroupLasso) {
      if (dataset.empty()) throw ConfigError("grouplasso problem needs a dataset path");
      if (!(eps > 0)) throw ConfigError("eps must be positive");
    }
    const std::size_t levels = static_cast<std::size_t>(std::min(M, D));
    for (Method m : methods) {
      if (m == Method::AllAtOnce) continue;
      const std::size_t need = m == Method::IskEqual && equal_split_all_levels ? static_cast<std::size_t>(M) : levels;
      if (N < need) throw ConfigError("N is smaller than the number of skeleton levels");
    }
  }
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json methods = nlohmann::json::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  nlohmann::json j{{"problem", to_string(c.problem)},
                   {"methods", methods},
                   {"L", c.L},
                   {"M", c.M},
                   {"D", c.D},
                   {"N", c.N},
                   {"sigma", c.sigma},
                   {"trials", c.trials},
                   {"test_size", c.effective_test_size()},
                   {"seed", c.seed},
                   {"workers", c.workers},
                   {"equal_split_all_levels", c.equal_split_all_levels}};
  if (c.problem == Problem::GroupLasso) {
    j["eps"] = c.eps;
    j["dataset"] = c.dataset;
  }
  return j;
}

/// Reads a config object. Unknown keys are rejected; "method" (string) and
/// "methods" (array) are both accepted. MED and group-lasso default to M = L = 3.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known{"problem", "method", "methods", "L", "M", "D", "N", "sigma",
                                              "trials", "test_size", "seed", "workers", "equal_split_all_levels",
                                              "eps", "dataset", "output"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown config key '" + key + "'");
  ExperimentConfig c;
  try {
    if (j.contains("problem")) c.problem = parse_problem(j.at("problem").get<std::string>());
    if (c.problem != Problem::Synthetic) {
      c.M = c.L = 3;
      c.sigma = 0.0;  // front samples are exact unless noise is requested
    }
    if (j.contains("method") && j.contains("methods")) throw ConfigError("give either method or methods, not both");
    if (j.contains("method")) c.methods = {parse_method(j.at("method").get<std::string>())};
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
    }
    const auto non_negative = [&](const char* key) {
      const auto& v = j.at(key);
      if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(std::string(key) + " must be a non-negative integer");
      return v.get<long long>();
    };
    if (j.contains("L")) c.L = static_cast<int>(non_negative("L"));
    if (j.contains("M")) c.M = static_cast<int>(non_negative("M"));
    if (j.contains("D")) c.D = static_cast<int>(non_negative("D"));
    if (j.contains("N")) c.N = static_cast<std::size_t>(non_negative("N"));
    if (j.contains("trials")) c.trials = static_cast<std::size_t>(non_negative("trials"));
    if (j.contains("test_size")) c.test_size = static_cast<std::size_t>(non_negative("test_size"));
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("workers")) c.workers = static_cast<std::size_t>(non_negative("workers"));
    if (j.contains("sigma")) c.sigma = j.at("sigma").get<double>();
    if (j.contains("equal_split_all_levels")) c.equal_split_all_levels = j.at("equal_split_all_levels").get<bool>();
    if (j.contains("eps")) c.eps = j.at("eps").get<double>();
    if (j.contains("dataset")) c.dataset = j.at("dataset").get<std::string>();
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (j.contains("test_size") && c.test_size == 0) throw ConfigError("test_size must be >= 1");
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

struct SummaryStats {
  double mean = 0, sd = 0, q1 = 0, median = 0, q3 = 0;
};

/// Quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("quantile: empty input");
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Mean, sample standard deviation (n - 1) and quartiles.
inline SummaryStats summarize(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("summarize: empty input");
  SummaryStats s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  s.q1 = quantile(v, 0.25);
  s.median = quantile(v, 0.5);
  s.q3 = quantile(v, 0.75);
  return s;
}

struct WelchTest {
  double t = 0;        // positive when mean(a) < mean(b)
  double df = 0;
  double p_value = 1;  // one-sided, H1: mean(a) < mean(b)
  bool significant(double alpha = 0.05) const { return p_value < alpha; }
};

/// One-sided Welch t-test of H1: mean(a) < mean(b).
inline WelchTest welch_one_sided(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_one_sided: need >= 2 values per group");
  const SummaryStats sa = summarize(a), sb = summarize(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double va = sa.sd * sa.sd / na, vb = sb.sd * sb.sd / nb;
  WelchTest w;
  const double se = std::sqrt(va + vb);
  if (!(se > 0)) {
    w.t = sa.mean < sb.mean ? std::numeric_limits<double>::infinity()
                            : (sa.mean > sb.mean ? -std::numeric_limits<double>::infinity() : 0.0);
    w.df = na + nb - 2;
    w.p_value = sa.mean < sb.mean ? 0.0 : 1.0;
    return w;
  }
  w.t = (sb.mean - sa.mean) / se;
  w.df = (va + vb) * (va + vb) / (va * va / (na - 1) + vb * vb / (nb - 1));
  const boost::math::students_t dist(w.df);
  w.p_value = boost::math::cdf(boost::math::complement(dist, w.t));
  return w;
}

// ---------------------------------------------------------------------------
// MSE
// ---------------------------------------------------------------------------

using TruthOracle = std::function<Eigen::VectorXd(const SimplexPoint&)>;

/// Mean over test points of ||truth(t) - model(t)||^2.
inline double evaluate_mse(const BezierSimplex& model, const TruthOracle& truth,
                           std::span<const SimplexPoint> test_points) {
  if (test_points.empty()) throw std::invalid_argument("evaluate_mse: empty test set");
  const Eigen::MatrixXd fitted = model.evaluate(test_points);
  double total = 0;
  for (std::size_t n = 0; n < test_points.size(); ++n)
    total += (truth(test_points[n]) - fitted.row(static_cast<Eigen::Index>(n)).transpose()).squaredNorm();
  return total / static_cast<double>(test_points.size());
}

/// Same, with truth values precomputed row-wise.
inline double evaluate_mse(const BezierSimplex& model, const Eigen::MatrixXd& truth_values,
                           std::span<const SimplexPoint> test_points) {
  if (test_points.empty()) throw std::invalid_argument("evaluate_mse: empty test set");
  if (truth_values.rows() != static_cast<Eigen::Index>(test_points.size()) || truth_values.cols() != model.L())
    throw std::invalid_argument("evaluate_mse: truth values have the wrong shape");
  return (truth_values - model.evaluate(test_points)).squaredNorm() / static_cast<double>(test_points.size());
}

/// Same, for a Bezier truth: the error is the Bezier simplex with control
/// points model - truth, evaluated once.
inline double evaluate_mse(const BezierSimplex& model, const BezierSimplex& truth,
                           std::span<const SimplexPoint> test_points) {
  if (test_points.empty()) throw std::invalid_argument("evaluate_mse: empty test set");
  if (model.M() != truth.M() || model.D() != truth.D() || model.L() != truth.L())
    throw std::invalid_argument("evaluate_mse: model and truth differ in shape");
  const BezierSimplex error(model.M(), model.D(), model.control_points() - truth.control_points());
  return error.evaluate(test_points).squaredNorm() / static_cast<double>(test_points.size());
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct MethodResult {
  Method method = Method::AllAtOnce;
  std::vector<double> mse;                 // one per trial, in trial order
  SummaryStats stats;
  std::map<int, std::size_t> per_level;    // training sizes (level 0 = unstratified)
  std::optional<double> theoretical_risk;  // synthetic problem only
};

struct Comparison {
  Method better, worse;  // H1: mean MSE of `better` < mean MSE of `worse`
  WelchTest test;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<MethodResult> results;
  std::vector<Comparison> comparisons;  // every ordered pair, in config order
  double wall_time_seconds = 0;

  const MethodResult& result(Method m) const {
    for (const auto& r : results)
      if (r.method == m) return r;
    throw std::out_of_range("report has no result for method " + to_string(m));
  }
};

/// Training sizes per level for a method: {0: N} for AAO.
inline std::map<int, std::size_t> training_sizes(const ExperimentConfig& c, Method m) {
  if (m == Method::AllAtOnce) return {{0, c.N}};
  const RiskModel model = isk_risk_coefficients(c.M, c.D, 1.0);
  return m == Method::IskOptimal ? optimal_allocation(model, c.N).per_level
                                 : equal_allocation(model, c.N, c.equal_split_all_levels).per_level;
}

/// Asymptotic risk of the synthetic problem at the sizes actually used, sigma^2 L scaled.
inline double synthetic_theoretical_risk(const ExperimentConfig& c, Method m) {
  const double sigma2L = c.sigma * c.sigma * c.L;
  if (m == Method::AllAtOnce) return aao_risk(c.M, c.D, sigma2L, static_cast<double>(c.N));
  const RiskModel model = isk_risk_coefficients(c.M, c.D, sigma2L);
  std::map<int, double> sizes;
  for (const auto& [level, n] : training_sizes(c, m)) sizes[level] = static_cast<double>(n);
  return model.risk(sizes);
}

/// Seed of stream `stream` within trial `trial`: trial seeds are seed + trial.
inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial, std::uint64_t stream) {
  Rng rng = derived_rng(seed + trial, stream);
  return rng();
}

/// Calls body(i) for i in [0, count) on up to `workers` threads. The first
/// exception by index is rethrown after all threads finish.
inline void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(count);
  const auto run = [&](std::size_t first) {
    for (std::size_t i = first; i < count; i += workers) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace detail {

template <class Error>
[[noreturn]] void rethrow_with_trial(const Error& e, std::size_t trial) {
  throw Error("trial " + std::to_string(trial) + ": " + e.what());
}

struct TrialContext {
  const ExperimentConfig& config;
  const RegressionDataset* dataset;
  std::vector<std::map<int, std::size_t>> sizes;  // per method
};

inline std::vector<double> run_trial(const TrialContext& ctx, std::size_t trial) {
  const ExperimentConfig& c = ctx.config;
  const std::uint64_t train_seed = trial_seed(c.seed, trial, 0);
  Rng test_rng(trial_seed(c.seed, trial, 1));
  std::vector<SimplexPoint> test_points;
  test_points.reserve(c.effective_test_size());
  for (std::size_t n = 0; n < c.effective_test_size(); ++n) test_points.push_back(sample_uniform_simplex(c.M, test_rng));

  std::optional<BezierSimplex> bezier_truth;
  Eigen::MatrixXd truth_values;
  switch (c.problem) {
    case Problem::Synthetic:
      bezier_truth = unit_simplex_model(c.M, c.D, c.L);
      break;
    case Problem::Med:
      truth_values.resize(static_cast<Eigen::Index>(test_points.size()), 3);
      for (std::size_t n = 0; n < test_points.size(); ++n)
        truth_values.row(static_cast<Eigen::Index>(n)) = med_front_point(test_points[n]).transpose();
      break;
    case Problem::GroupLasso:
      truth_values.resize(static_cast<Eigen::Index>(test_points.size()), ctx.dataset->objectives());
      for (std::size_t n = 0; n < test_points.size(); ++n)
        truth_values.row(static_cast<Eigen::Index>(n)) =
            solve_scalarization(*ctx.dataset, test_points[n], c.eps).f_tilde.transpose();
      break;
  }

  std::vector<double> mse;
  for (std::size_t k = 0; k < c.methods.size(); ++k) {
    const auto& sizes = ctx.sizes[k];
    std::optional<BezierSimplex> model;
    if (c.methods[k] == Method::AllAtOnce) {
      Sample train;
      switch (c.problem) {
        case Problem::Synthetic:
          train = synthetic_training_set({c.L, c.M, c.D, c.sigma, c.N, {}, train_seed});
          break;
        case Problem::Med: train = med_sample(c.N, train_seed, c.sigma); break;
        case Problem::GroupLasso: train = group_lasso_front_sample(*ctx.dataset, c.N, c.eps, train_seed); break;
      }
      model = fit_all_at_once(train, c.D);
    } else {
      StratifiedSample train;
      switch (c.problem) {
        case Problem::Synthetic:
          train = synthetic_stratified_training_set({c.L, c.M, c.D, c.sigma, 0, sizes, train_seed});
          break;
        case Problem::Med: train = med_stratified_sample(sizes, train_seed, c.sigma); break;
        case Problem::GroupLasso:
          train = group_lasso_stratified_front_sample(*ctx.dataset, sizes, c.eps, train_seed);
          break;
      }
      model = fit_inductive_skeleton(train, c.D);
    }
    mse.push_back(bezier_truth ? evaluate_mse(*model, *bezier_truth, test_points)
                               : evaluate_mse(*model, truth_values, test_points));
  }
  return mse;
}

}  // namespace detail

/// Runs config.trials trials. Trial k draws training data from seed + k
/// (shared by all methods, so comparisons are paired) and a fresh uniform
/// test set. A failing trial aborts the run with its index in the message.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  std::optional<RegressionDataset> dataset;
  if (config.problem == Problem::GroupLasso) dataset = load_regression_dataset(config.dataset);

  detail::TrialContext ctx{config, dataset ? &*dataset : nullptr, {}};
  for (Method m : config.methods) ctx.sizes.push_back(training_sizes(config, m));

  std::vector<std::vector<double>> per_trial(config.trials);
  parallel_for(config.trials, config.workers, [&](std::size_t trial) {
    try {
      per_trial[trial] = detail::run_trial(ctx, trial);
    } catch (const SingularDesignError& e) {
      detail::rethrow_with_trial(e, trial);
    } catch (const InsufficientStrataError& e) {
      detail::rethrow_with_trial(e, trial);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("trial " + std::to_string(trial) + ": " + e.what(), e.gradient_norm());
    }
  });

  ExperimentReport report;
  report.config = config;
  for (std::size_t k = 0; k < config.methods.size(); ++k) {
    MethodResult r;
    r.method = config.methods[k];
    for (const auto& trial : per_trial) r.mse.push_back(trial[k]);
    r.stats = summarize(r.mse);
    r.per_level = ctx.sizes[k];
    if (config.problem == Problem::Synthetic) r.theoretical_risk = synthetic_theoretical_risk(config, r.method);
    report.results.push_back(std::move(r));
  }
  if (config.trials >= 2)
    for (const auto& a : report.results)
      for (const auto& b : report.results)
        if (a.method != b.method) report.comparisons.push_back({a.method, b.method, welch_one_sided(a.mse, b.mse)});
  report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const SummaryStats& s) {
  return {{"mean", s.mean}, {"sd", s.sd}, {"q1", s.q1}, {"median", s.median}, {"q3", s.q3}};
}

inline nlohmann::json to_json(const ExperimentReport& r, bool include_wall_time = true) {
  nlohmann::json results = nlohmann::json::array();
  for (const auto& m : r.results) {
    nlohmann::json sizes = nlohmann::json::object();
    for (const auto& [level, n] : m.per_level) sizes[std::to_string(level)] = n;
    nlohmann::json j{{"method", to_string(m.method)}, {"mse", m.mse}, {"stats", to_json(m.stats)},
                     {"training_sizes", sizes}};
    if (m.theoretical_risk) j["theoretical_risk"] = *m.theoretical_risk;
    results.push_back(std::move(j));
  }
  nlohmann::json comparisons = nlohmann::json::array();
  for (const auto& c : r.comparisons)
    comparisons.push_back({{"better", to_string(c.better)},
                           {"worse", to_string(c.worse)},
                           {"t", c.test.t},
                           {"df", c.test.df},
                           {"p_value", c.test.p_value},
                           {"significant", c.test.significant()}});
  nlohmann::json j{{"config", to_json(r.config)}, {"results", results}, {"comparisons", comparisons}};
  if (include_wall_time) j["wall_time_seconds"] = r.wall_time_seconds;
  return j;
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
  try {
    ExperimentReport r;
    r.config = config_from_json(j.at("config"));
    for (const auto& m : j.at("results")) {
      MethodResult res;
      res.method = parse_method(m.at("method").get<std::string>());
      res.mse = m.at("mse").get<std::vector<double>>();
      const auto& s = m.at("stats");
      res.stats = {s.at("mean").get<double>(), s.at("sd").get<double>(), s.at("q1").get<double>(),
                   s.at("median").get<double>(), s.at("q3").get<double>()};
      for (const auto& [level, n] : m.at("training_sizes").items()) res.per_level[std::stoi(level)] = n.get<std::size_t>();
      if (m.contains("theoretical_risk")) res.theoretical_risk = m.at("theoretical_risk").get<double>();
      r.results.push_back(std::move(res));
    }
    for (const auto& c : j.at("comparisons"))
      r.comparisons.push_back({parse_method(c.at("better").get<std::string>()),
                               parse_method(c.at("worse").get<std::string>()),
                               {c.at("t").get<double>(), c.at("df").get<double>(), c.at("p_value").get<double>()}});
    if (j.contains("wall_time_seconds")) r.wall_time_seconds = j.at("wall_time_seconds").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report JSON: ") + e.what());
  }
}

enum class ReportFormat { Json, Csv };

/// CSV: header "trial,<one mse column per method>", one row per trial, then
/// a summary block of rows named mean, sd, q1, median, q3 and, for the
/// synthetic problem, theoretical_risk.
inline void write_report_csv(std::ostream& out, const ExperimentReport& r) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "trial";
  for (const auto& m : r.results) out << (r.results.size() == 1 ? std::string(",mse") : ",mse_" + to_string(m.method));
  out << '\n';
  for (std::size_t t = 0; t < r.config.trials; ++t) {
    out << t;
    for (const auto& m : r.results) out << ',' << m.mse[t];
    out << '\n';
  }
  const auto row = [&](const char* name, auto value) {
    out << name;
    for (const auto& m : r.results) out << ',' << value(m);
    out << '\n';
  };
  row("mean", [](const MethodResult& m) { return m.stats.mean; });
  row("sd", [](const MethodResult& m) { return m.stats.sd; });
  row("q1", [](const MethodResult& m) { return m.stats.q1; });
  row("median", [](const MethodResult& m) { return m.stats.median; });
  row("q3", [](const MethodResult& m) { return m.stats.q3; });
  if (r.config.problem == Problem::Synthetic)
    row("theoretical_risk", [](const MethodResult& m) { return m.theoretical_risk.value_or(0.0); });
}

inline void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path,
                        bool include_wall_time = true) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  if (format == ReportFormat::Json)
    out << to_json(report, include_wall_time).dump(2) << '\n';
  else
    write_report_csv(out, report);
  if (!out) throw std::ios_base::failure("failed writing '" + path + "'");
}

}  // namespace bezierfit
