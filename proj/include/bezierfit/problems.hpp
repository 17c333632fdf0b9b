#pragma once

// Benchmark instances: synthetic Bezier targets with Gaussian noise, the
// generalized location problem (MED) and the three-objective group-lasso
// reformulation sampled through weighted-sum scalarization.

#include <bezierfit/bezier.hpp>
#include <bezierfit/csv.hpp>
#include <bezierfit/errors.hpp>
#include <bezierfit/fit.hpp>
#include <bezierfit/simplex.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace bezierfit {

/// Independent generator for draw `index` of a stream seeded by `seed`.
inline Rng derived_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

/// Points for every level of a stratified design, each level split equally
/// over its faces.
inline std::map<int, std::vector<SimplexPoint>> sample_strata(int M, const std::map<int, std::size_t>& per_level,
                                                              Rng& rng) {
  std::map<int, std::vector<SimplexPoint>> out;
  for (const auto& [m, n] : per_level) out[m] = sample_skeleton(M, m, n, rng);
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic unit-simplex targets
// ---------------------------------------------------------------------------

struct SyntheticSpec {
  int L = 100;
  int M = 8;
  int D = 2;
  double sigma = 0.1;
  std::size_t N = 1000;                    // unstratified size
  std::map<int, std::size_t> per_level;    // stratified sizes
  std::uint64_t seed = 0;
};

namespace detail {
inline Sample noisy_sample(const BezierSimplex& truth, std::vector<SimplexPoint> points, double sigma, Rng& rng) {
  if (sigma < 0) throw std::invalid_argument("noise sigma must be >= 0");
  Eigen::MatrixXd x = points.empty() ? Eigen::MatrixXd(0, truth.L()) : truth.evaluate(points);
  if (sigma > 0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (Eigen::Index n = 0; n < x.rows(); ++n)
      for (Eigen::Index l = 0; l < x.cols(); ++l) x(n, l) += noise(rng);
  }
  return Sample(std::move(points), std::move(x));
}
}  // namespace detail

/// x_n = b(t_n) + N(0, sigma^2 I) with t_n uniform on the simplex and b the unit-simplex model.
inline Sample synthetic_training_set(const SyntheticSpec& spec) {
  const BezierSimplex truth = unit_simplex_model(spec.M, spec.D, spec.L);
  Rng rng(spec.seed);
  std::vector<SimplexPoint> points;
  points.reserve(spec.N);
  for (std::size_t n = 0; n < spec.N; ++n) points.push_back(sample_uniform_simplex(spec.M, rng));
  return detail::noisy_sample(truth, std::move(points), spec.sigma, rng);
}

/// Stratified variant: spec.per_level[m] points on the level-m skeleton.
inline StratifiedSample synthetic_stratified_training_set(const SyntheticSpec& spec) {
  const BezierSimplex truth = unit_simplex_model(spec.M, spec.D, spec.L);
  Rng rng(spec.seed);
  StratifiedSample out;
  for (auto& [m, points] : sample_strata(spec.M, spec.per_level, rng))
    out.levels[m] = detail::noisy_sample(truth, std::move(points), spec.sigma, rng);
  return out;
}

// ---------------------------------------------------------------------------
// Generalized location problem: f_m(x) = ||x - e_m||^2, x in R^4, m = 1..3
// ---------------------------------------------------------------------------

/// Front point at weight t: x*(t) = sum_m t_m e_m, returns (f_1, f_2, f_3)(x*).
inline Eigen::Vector3d med_front_point(const SimplexPoint& t) {
  if (t.dimension() != 3) throw std::invalid_argument("med_front_point: t must lie on the 2-simplex");
  const Eigen::VectorXd& w = t.coords();
  const double squares = w.squaredNorm();
  Eigen::Vector3d f;
  // ||x* - e_m||^2 = sum_j t_j^2 - 2 t_m + 1
  for (int m = 0; m < 3; ++m) f[m] = squares - 2.0 * w[m] + 1.0;
  return f;
}

namespace detail {
inline Sample med_values(std::vector<SimplexPoint> points, double sigma, Rng& rng) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(points.size()), 3);
  std::normal_distribution<double> noise(0.0, sigma > 0 ? sigma : 1.0);
  for (std::size_t n = 0; n < points.size(); ++n) {
    Eigen::Vector3d f = med_front_point(points[n]);
    if (sigma > 0)
      for (int l = 0; l < 3; ++l) f[l] += noise(rng);
    x.row(static_cast<Eigen::Index>(n)) = f.transpose();
  }
  return Sample(std::move(points), std::move(x));
}
}  // namespace detail

/// n exact front points (plus optional N(0, sigma^2 I) noise) at uniform weights.
inline Sample med_sample(std::size_t n, std::uint64_t seed, double sigma = 0.0) {
  if (sigma < 0) throw std::invalid_argument("med_sample: sigma must be >= 0");
  Rng rng(seed);
  std::vector<SimplexPoint> points;
  for (std::size_t i = 0; i < n; ++i) points.push_back(sample_uniform_simplex(3, rng));
  return detail::med_values(std::move(points), sigma, rng);
}

/// Stratified front sample: per_level[m] weights on the level-m skeleton
/// (vertices, edges, face) of the 2-simplex.
inline StratifiedSample med_stratified_sample(const std::map<int, std::size_t>& per_level, std::uint64_t seed,
                                              double sigma = 0.0) {
  if (sigma < 0) throw std::invalid_argument("med_stratified_sample: sigma must be >= 0");
  Rng rng(seed);
  StratifiedSample out;
  for (auto& [m, points] : sample_strata(3, per_level, rng))
    out.levels[m] = detail::med_values(std::move(points), sigma, rng);
  return out;
}

// ---------------------------------------------------------------------------
// Regression dataset
// ---------------------------------------------------------------------------

/// Observations A (standardized columns), centered response y and the group
/// label of each feature. Gram quantities are cached for the objectives.
struct RegressionDataset {
  Eigen::MatrixXd A;
  Eigen::VectorXd y;
  std::vector<std::string> group_map;   // per feature
  std::vector<std::string> group_names; // in order of first appearance

  Eigen::MatrixXd gram;       // A^T A
  Eigen::VectorXd moment;     // A^T y
  double response_norm2 = 0;  // ||y||^2

  std::size_t observations() const { return static_cast<std::size_t>(A.rows()); }
  int features() const { return static_cast<int>(A.cols()); }
  int objectives() const { return 1 + static_cast<int>(group_names.size()); }

  /// Feature positions belonging to group g (index into group_names).
  std::vector<int> group_members(std::size_t g) const {
    std::vector<int> out;
    for (int j = 0; j < features(); ++j)
      if (group_map[j] == group_names[g]) out.push_back(j);
    return out;
  }
};

inline const std::vector<std::string>& regression_feature_columns() {
  static const std::vector<std::string> columns{"age1", "age2", "age3", "lwt1", "lwt2", "lwt3"};
  return columns;
}

/// Reads the CSV (header age1,age2,age3,lwt1,lwt2,lwt3,bwt), standardizes
/// each feature to zero mean and unit (population) variance and centers bwt.
/// expected_rows = 0 accepts any positive row count.
inline RegressionDataset load_regression_dataset(std::istream& in, std::size_t expected_rows = 0) {
  const csv::Table table = csv::read(in);
  const auto& features = regression_feature_columns();
  std::vector<int> cols;
  for (const auto& name : features) {
    const int c = table.column(name);
    if (c < 0) throw ParseError("regression dataset: missing column '" + name + "'");
    cols.push_back(c);
  }
  const int response = table.column("bwt");
  if (response < 0) throw ParseError("regression dataset: missing column 'bwt'");
  if (table.rows.empty()) throw ParseError("regression dataset: no data rows");
  if (expected_rows != 0 && table.rows.size() != expected_rows)
    throw ParseError("regression dataset: expected " + std::to_string(expected_rows) + " rows, found " +
                     std::to_string(table.rows.size()));

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  RegressionDataset ds;
  ds.A.resize(n, static_cast<Eigen::Index>(features.size()));
  ds.y.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    for (std::size_t j = 0; j < cols.size(); ++j)
      ds.A(r, static_cast<Eigen::Index>(j)) = csv::parse_double(row[cols[j]], line, cols[j] + 1);
    ds.y[r] = csv::parse_double(row[response], line, response + 1);
  }
  for (Eigen::Index j = 0; j < ds.A.cols(); ++j) {
    auto col = ds.A.col(j);
    col.array() -= col.mean();
    const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n));
    if (!(sd > 0)) throw ParseError("regression dataset: column '" + features[j] + "' is constant");
    col /= sd;
  }
  ds.y.array() -= ds.y.mean();
  ds.group_map = {"age", "age", "age", "lwt", "lwt", "lwt"};
  ds.group_names = {"age", "lwt"};
  ds.gram = ds.A.transpose() * ds.A;
  ds.moment = ds.A.transpose() * ds.y;
  ds.response_norm2 = ds.y.squaredNorm();
  return ds;
}

inline RegressionDataset load_regression_dataset(const std::string& path, std::size_t expected_rows = 0) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "' for reading");
  return load_regression_dataset(in, expected_rows);
}

struct ObjectiveValues {
  Eigen::VectorXd f;         // objectives
  Eigen::MatrixXd gradient;  // one row per objective
};

/// f~_1 = ||Ax - y||^2 + eps||x||^2,  f~_{1+g} = ||x_g||^2 + eps||x||^2 for each group g.
inline ObjectiveValues group_lasso_objectives(const RegressionDataset& ds, const Eigen::VectorXd& x, double eps) {
  if (x.size() != ds.features()) throw std::invalid_argument("group_lasso_objectives: x has wrong length");
  ObjectiveValues out{Eigen::VectorXd(ds.objectives()), Eigen::MatrixXd(ds.objectives(), ds.features())};
  const double ridge = eps * x.squaredNorm();
  const Eigen::VectorXd gx = ds.gram * x;
  out.f[0] = x.dot(gx) - 2.0 * x.dot(ds.moment) + ds.response_norm2 + ridge;
  out.gradient.row(0) = (2.0 * (gx - ds.moment) + 2.0 * eps * x).transpose();
  for (std::size_t g = 0; g < ds.group_names.size(); ++g) {
    double value = ridge;
    Eigen::VectorXd grad = 2.0 * eps * x;
    for (int j : ds.group_members(g)) {
      value += x[j] * x[j];
      grad[j] += 2.0 * x[j];
    }
    out.f[static_cast<Eigen::Index>(g) + 1] = value;
    out.gradient.row(static_cast<Eigen::Index>(g) + 1) = grad.transpose();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Steepest descent
// ---------------------------------------------------------------------------

struct DescentOptions {
  double tolerance = 1e-8;       // on the gradient 2-norm
  std::size_t max_iter = 100000;
  double initial_step = 1.0;
  double shrink = 0.5;
  double slope = 1e-4;           // Armijo sufficient-decrease factor
  // First trial step of each iteration = growth * last accepted step
  // (growth <= 0 restarts from initial_step every iteration).
  double growth = 1.0;
};

struct DescentResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> history;  // objective after each accepted step, starting at x0
};

/// Objective oracle: returns the value and writes the gradient.
using ValueAndGradient = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Gradient descent with backtracking. A step is accepted on the Armijo
/// condition, or, once the decrease is below the rounding level of the
/// objective, on the equivalent derivative test
///   g(x + a d)^T d <= (2 c - 1) g(x)^T d
/// (exact for quadratics), provided the value has not increased beyond
/// rounding. Throws ConvergenceError after max_iter iterations.
inline DescentResult steepest_descent(const ValueAndGradient& oracle, Eigen::VectorXd x0,
                                      const DescentOptions& opt = {}) {
  DescentResult r;
  r.x = std::move(x0);
  Eigen::VectorXd g(r.x.size()), g_new(r.x.size());
  r.value = oracle(r.x, g);
  r.history.push_back(r.value);
  double step = opt.initial_step;
  constexpr double kRounding = 1e-13;
  for (r.iterations = 0; r.iterations < opt.max_iter; ++r.iterations) {
    r.gradient_norm = g.norm();
    if (r.gradient_norm <= opt.tolerance) {
      r.converged = true;
      return r;
    }
    const Eigen::VectorXd d = -g;
    const double slope0 = g.dot(d);
    bool accepted = false;
    for (int trial = 0; trial < 200; ++trial, step *= opt.shrink) {
      const Eigen::VectorXd x_new = r.x + step * d;
      const double f_new = oracle(x_new, g_new);
      const double noise = kRounding * std::max(1.0, std::abs(r.value));
      const bool armijo = f_new <= r.value + opt.slope * step * slope0;
      const bool derivative = std::abs(opt.slope * step * slope0) < noise && f_new <= r.value + noise &&
                              g_new.dot(d) <= (2.0 * opt.slope - 1.0) * slope0;
      if (std::isfinite(f_new) && (armijo || derivative)) {
        r.x = x_new;
        r.value = f_new;
        g.swap(g_new);
        r.history.push_back(r.value);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    step = (opt.growth > 0) ? step * opt.growth : opt.initial_step;
  }
  r.gradient_norm = g.norm();
  if (r.gradient_norm <= opt.tolerance) {
    r.converged = true;
    return r;
  }
  throw ConvergenceError("steepest descent stopped after " + std::to_string(r.iterations) +
                             " iterations with gradient norm " + std::to_string(r.gradient_norm),
                         r.gradient_norm);
}

struct ScalarizationResult {
  SimplexPoint w;
  Eigen::VectorXd x_star;
  Eigen::VectorXd f_tilde;
  std::size_t iterations = 0;
  double final_gradient_norm = 0.0;
};

/// x*(w) = argmin_x <w, f~(x)>, solved from x0 = 0.
inline ScalarizationResult solve_scalarization(const RegressionDataset& ds, const SimplexPoint& w, double eps,
                                               const DescentOptions& opt = {}) {
  if (w.dimension() != ds.objectives()) throw std::invalid_argument("solve_scalarization: weight has wrong length");
  if (!(eps > 0)) throw std::invalid_argument("solve_scalarization: eps must be positive");
  const Eigen::VectorXd weights = w.coords();
  const ValueAndGradient oracle = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const ObjectiveValues v = group_lasso_objectives(ds, x, eps);
    grad = v.gradient.transpose() * weights;
    return weights.dot(v.f);
  };
  const DescentResult d = steepest_descent(oracle, Eigen::VectorXd::Zero(ds.features()), opt);
  ScalarizationResult out{w, d.x, group_lasso_objectives(ds, d.x, eps).f, d.iterations, d.gradient_norm};
  return out;
}

inline constexpr int kMaxScalarizationRetries = 10;

namespace detail {
/// Solves one front point at a weight from `draw`, redrawing on
/// ConvergenceError up to kMaxScalarizationRetries times.
template <class Draw>
ScalarizationResult front_point(const RegressionDataset& ds, double eps, Rng& rng, Draw&& draw,
                                const DescentOptions& opt) {
  for (int attempt = 0;; ++attempt) {
    const SimplexPoint w = draw(rng);
    try {
      return solve_scalarization(ds, w, eps, opt);
    } catch (const ConvergenceError& e) {
      if (attempt >= kMaxScalarizationRetries)
        throw ConvergenceError(std::string("group lasso front: giving up after retries: ") + e.what(),
                               e.gradient_norm());
    }
  }
}
}  // namespace detail

/// n front points (w, f~(x*(w))) with w uniform on the simplex. Draw i uses
/// its own generator derived from (seed, i).
inline Sample group_lasso_front_sample(const RegressionDataset& ds, std::size_t n, double eps, std::uint64_t seed,
                                       const DescentOptions& opt = {}) {
  const int M = ds.objectives();
  Sample out;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = derived_rng(seed, i);
    const auto r = detail::front_point(ds, eps, rng, [M](Rng& g) { return sample_uniform_simplex(M, g); }, opt);
    out.append(r.w, r.f_tilde);
  }
  return out;
}

/// Stratified front sample: per_level[m] weights split equally over the
/// faces with m vertices (subproblems with m objectives).
inline StratifiedSample group_lasso_stratified_front_sample(const RegressionDataset& ds,
                                                            const std::map<int, std::size_t>& per_level, double eps,
                                                            std::uint64_t seed, const DescentOptions& opt = {}) {
  const int M = ds.objectives();
  StratifiedSample out;
  std::uint64_t draw_index = 0;
  for (const auto& [m, n] : per_level) {
    const auto masks = enumerate_subsimplices(M, m);
    const auto counts = equal_split_counts(M, m, n);
    Sample level;
    for (std::size_t f = 0; f < masks.size(); ++f) {
      for (std::size_t i = 0; i < counts[f]; ++i) {
        Rng rng = derived_rng(seed, draw_index++);
        const auto& mask = masks[f];
        const auto r =
            detail::front_point(ds, eps, rng, [&mask](Rng& g) { return sample_uniform_subsimplex(mask, g); }, opt);
        level.append(r.w, r.f_tilde);
      }
    }
    out.levels[m] = std::move(level);
  }
  return out;
}

}  // namespace bezierfit
