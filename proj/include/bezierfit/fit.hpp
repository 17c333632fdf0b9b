#pragma once

// All-at-once (AAO) and inductive skeleton (ISK) least-squares fitting of
// Bezier simplices, plus the sample containers and their CSV format.

#include <bezierfit/bezier.hpp>
#include <bezierfit/csv.hpp>
#include <bezierfit/errors.hpp>
#include <bezierfit/simplex.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace bezierfit {

/// Pairs (t_n, x_n); x is stored row-wise as an N x L matrix.
class Sample {
 public:
  Sample() = default;
  Sample(std::vector<SimplexPoint> t, Eigen::MatrixXd x) : t_(std::move(t)), x_(std::move(x)) {
    if (static_cast<Eigen::Index>(t_.size()) != x_.rows())
      throw std::invalid_argument("Sample: point count and value row count differ");
    for (const auto& p : t_)
      if (p.dimension() != t_.front().dimension()) throw std::invalid_argument("Sample: inconsistent M");
  }

  std::size_t size() const { return t_.size(); }
  bool empty() const { return t_.empty(); }
  int M() const { return t_.empty() ? 0 : t_.front().dimension(); }
  int L() const { return static_cast<int>(x_.cols()); }
  const std::vector<SimplexPoint>& points() const { return t_; }
  const Eigen::MatrixXd& values() const { return x_; }

  void append(const SimplexPoint& t, const Eigen::VectorXd& x) {
    if (!t_.empty() && (t.dimension() != M() || x.size() != L()))
      throw std::invalid_argument("Sample::append: dimension mismatch");
    if (t_.empty()) x_.resize(0, x.size());
    t_.push_back(t);
    x_.conservativeResize(x_.rows() + 1, x.size());
    x_.row(x_.rows() - 1) = x.transpose();
  }

  /// Copy with every value multiplied by c.
  Sample scaled(double c) const { return Sample(t_, x_ * c); }

 private:
  std::vector<SimplexPoint> t_;
  Eigen::MatrixXd x_;
};

/// Level m -> sample whose points lie on the level-m skeleton (at most m
/// nonzero coordinates).
struct StratifiedSample {
  std::map<int, Sample> levels;

  std::size_t total_size() const {
    std::size_t n = 0;
    for (const auto& [m, s] : levels) n += s.size();
    return n;
  }
};

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

inline constexpr double kMaxConditionEstimate = 1e12;

/// G^{-1} B for symmetric positive-definite G via Cholesky. Throws
/// SingularDesignError when G is not positive definite or its reciprocal
/// condition estimate is below 1 / kMaxConditionEstimate.
inline Eigen::MatrixXd solve_normal_equations(const Eigen::MatrixXd& G, const Eigen::MatrixXd& B) {
  if (G.rows() != G.cols()) throw std::invalid_argument("solve_normal_equations: G is not square");
  if (G.rows() != B.rows()) throw std::invalid_argument("solve_normal_equations: G and B row counts differ");
  if (G.rows() == 0) return Eigen::MatrixXd(0, B.cols());
  const double scale = G.cwiseAbs().maxCoeff();
  if ((G - G.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0))
    throw std::invalid_argument("solve_normal_equations: G is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success || !(scale > 0.0))
    throw SingularDesignError("normal matrix is not positive definite");
  const double rcond = llt.rcond();
  if (!(rcond * kMaxConditionEstimate >= 1.0)) {
    std::ostringstream msg;
    msg << "normal matrix condition estimate " << (rcond > 0 ? 1.0 / rcond : std::numeric_limits<double>::infinity())
        << " exceeds " << kMaxConditionEstimate;
    throw SingularDesignError(msg.str());
  }
  return llt.solve(B);
}

/// ||Z^T (X - Z P)||_inf: zero at an exact least-squares optimum.
inline double normal_residual(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& X, const Eigen::MatrixXd& P) {
  if (Z.rows() == 0) return 0.0;
  return (Z.transpose() * (X - Z * P)).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

/// Ordinary least squares over every control point at once.
inline BezierSimplex fit_all_at_once(const Sample& sample, int D) {
  if (sample.empty()) throw SingularDesignError("all-at-once fit: empty sample");
  const BernsteinBasis basis(sample.M(), D);
  if (sample.size() < basis.size())
    throw SingularDesignError("all-at-once fit: " + std::to_string(sample.size()) + " points cannot determine " +
                              std::to_string(basis.size()) + " control points");
  const Eigen::MatrixXd Z = basis.design(sample.points());
  try {
    return BezierSimplex(sample.M(), D,
                         solve_normal_equations(Z.transpose() * Z, Z.transpose() * sample.values()));
  } catch (const SingularDesignError& e) {
    throw SingularDesignError(std::string("all-at-once fit: ") + e.what());
  }
}

/// Inductive skeleton fit: for m = 1..min(M,D), solve for the control
/// points with exactly m nonzero indices using the level-m sample, with the
/// lower-level control points held at their already fitted values. Control
/// points with more than m nonzeros vanish on the level-m skeleton, so the
/// level-m fit never sees them. Levels above min(M,D) are ignored.
inline BezierSimplex fit_inductive_skeleton(const StratifiedSample& sample, int D) {
  if (D < 1) throw std::invalid_argument("inductive skeleton fit: D must be >= 1");
  int M = 0;
  int L = 0;
  for (const auto& [m, s] : sample.levels) {
    if (s.empty()) continue;
    if (M == 0) {
      M = s.M();
      L = s.L();
    } else if (s.M() != M || s.L() != L) {
      throw std::invalid_argument("inductive skeleton fit: levels disagree on M or L");
    }
  }
  if (M == 0) throw InsufficientStrataError("inductive skeleton fit: stratified sample is empty");

  const BernsteinBasis basis(M, D);
  const auto groups = partition_by_level(basis.lattice());
  const int top = std::min(M, D);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(basis.size()), L);
  std::vector<std::size_t> fixed;  // positions already determined

  for (int m = 1; m <= top; ++m) {
    auto it = sample.levels.find(m);
    if (it == sample.levels.end() || it->second.empty())
      throw InsufficientStrataError("inductive skeleton fit: no sample on skeleton level " + std::to_string(m) +
                                    " (needed for control points with " + std::to_string(m) + " nonzero indices)");
    const Sample& level = it->second;
    for (const auto& t : level.points())
      if (t.nonzero_count() > m)
        throw std::invalid_argument("inductive skeleton fit: level " + std::to_string(m) +
                                    " contains a point with " + std::to_string(t.nonzero_count()) +
                                    " nonzero coordinates");
    const auto& unknown = groups.at(m);
    if (level.size() < unknown.size())
      throw SingularDesignError("inductive skeleton fit, level " + std::to_string(m) + ": " +
                                std::to_string(level.size()) + " points cannot determine " +
                                std::to_string(unknown.size()) + " control points");

    const Eigen::MatrixXd Zfull = basis.design(level.points());
    const auto idx = [](const std::vector<std::size_t>& v) {
      std::vector<Eigen::Index> r(v.begin(), v.end());
      return r;
    };
    const Eigen::MatrixXd Z = Zfull(Eigen::all, idx(unknown));
    Eigen::MatrixXd rhs = level.values();
    if (!fixed.empty()) rhs -= Zfull(Eigen::all, idx(fixed)) * P(idx(fixed), Eigen::all);

    Eigen::MatrixXd Pm;
    try {
      Pm = solve_normal_equations(Z.transpose() * Z, Z.transpose() * rhs);
    } catch (const SingularDesignError& e) {
      throw SingularDesignError("inductive skeleton fit, level " + std::to_string(m) + ": " + e.what());
    }
    P(idx(unknown), Eigen::all) = Pm;
    fixed.insert(fixed.end(), unknown.begin(), unknown.end());
  }
  return BezierSimplex(M, D, std::move(P));
}

// ---------------------------------------------------------------------------
// CSV: t_1..t_M, x_1..x_L, level   (level 0 = unstratified)
// ---------------------------------------------------------------------------

struct SampleFile {
  Sample unstratified;
  StratifiedSample strata;
};

namespace detail {
inline void write_header(std::ostream& out, int M, int L) {
  for (int i = 1; i <= M; ++i) out << "t_" << i << ',';
  for (int i = 1; i <= L; ++i) out << "x_" << i << ',';
  out << "level\n";
}
inline void write_rows(std::ostream& out, const Sample& s, int level) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t n = 0; n < s.size(); ++n) {
    for (int i = 0; i < s.M(); ++i) out << s.points()[n][i] << ',';
    for (int l = 0; l < s.L(); ++l) out << s.values()(static_cast<Eigen::Index>(n), l) << ',';
    out << level << '\n';
  }
}
}  // namespace detail

inline void write_sample_csv(std::ostream& out, const Sample& s) {
  detail::write_header(out, s.M(), s.L());
  detail::write_rows(out, s, 0);
}

inline void write_sample_csv(std::ostream& out, const StratifiedSample& s) {
  int M = 0, L = 0;
  for (const auto& [m, level] : s.levels)
    if (!level.empty()) M = level.M(), L = level.L();
  detail::write_header(out, M, L);
  for (const auto& [m, level] : s.levels) detail::write_rows(out, level, m);
}

inline SampleFile read_sample_csv(std::istream& in) {
  const csv::Table table = csv::read(in);
  int M = 0, L = 0;
  while (table.column("t_" + std::to_string(M + 1)) >= 0) ++M;
  while (table.column("x_" + std::to_string(L + 1)) >= 0) ++L;
  if (M == 0) throw ParseError("sample CSV: missing column t_1");
  if (L == 0) throw ParseError("sample CSV: missing column x_1");
  const int level_col = table.column("level");

  SampleFile file;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    Eigen::VectorXd t(M), x(L);
    for (int i = 0; i < M; ++i) {
      const int c = table.column("t_" + std::to_string(i + 1));
      t[i] = csv::parse_double(row[c], line, c + 1);
    }
    for (int l = 0; l < L; ++l) {
      const int c = table.column("x_" + std::to_string(l + 1));
      x[l] = csv::parse_double(row[c], line, c + 1);
    }
    const long level = level_col >= 0 ? csv::parse_int(row[level_col], line, level_col + 1) : 0;
    if (level < 0 || level > M) throw ParseError("level out of range", line, level_col + 1);
    SimplexPoint point;
    try {
      point = SimplexPoint(t);
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("invalid simplex point: ") + e.what(), line, 1);
    }
    if (level == 0)
      file.unstratified.append(point, x);
    else
      file.strata.levels[static_cast<int>(level)].append(point, x);
  }
  return file;
}

}  // namespace bezierfit
