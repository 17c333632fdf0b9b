#pragma once

#include <bezierfit/simplex.hpp>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bezierfit {

using FeatureVector = Eigen::VectorXd;

/// Bernstein basis of degree D on the (M-1)-simplex, in canonical lattice order.
class BernsteinBasis {
 public:
  BernsteinBasis(int M, int D) : M_(M), D_(D), lattice_(enumerate_lattice(M, D)) {
    coefficients_.resize(static_cast<Eigen::Index>(lattice_.size()));
    for (std::size_t a = 0; a < lattice_.size(); ++a)
      coefficients_[static_cast<Eigen::Index>(a)] = static_cast<double>(multinomial(D, lattice_[a]));
  }

  int dimension() const { return M_; }
  int degree() const { return D_; }
  std::size_t size() const { return lattice_.size(); }
  const std::vector<MultiIndex>& lattice() const { return lattice_; }

  /// Writes multinomial(D,d) * t^d for every d into out (length size()).
  /// Powers are built by repeated multiplication, so 0^0 = 1.
  template <class Out>
  void features_into(const Eigen::VectorXd& t, Out&& out) const {
    if (t.size() != M_)
      throw std::invalid_argument("BernsteinBasis: point has dimension " + std::to_string(t.size()) +
                                  ", expected " + std::to_string(M_));
    Eigen::MatrixXd powers(M_, D_ + 1);
    for (int i = 0; i < M_; ++i) {
      powers(i, 0) = 1.0;
      for (int k = 1; k <= D_; ++k) powers(i, k) = powers(i, k - 1) * t[i];
    }
    for (std::size_t a = 0; a < lattice_.size(); ++a) {
      double v = coefficients_[static_cast<Eigen::Index>(a)];
      const auto& d = lattice_[a].entries;
      for (int i = 0; i < M_; ++i)
        if (d[i] != 0) v *= powers(i, d[i]);
      out[static_cast<Eigen::Index>(a)] = v;
    }
  }

  FeatureVector features(const SimplexPoint& t) const {
    FeatureVector z(static_cast<Eigen::Index>(size()));
    features_into(t.coords(), z);
    return z;
  }

  /// Row n is features(points[n]).
  Eigen::MatrixXd design(std::span<const SimplexPoint> points) const {
    Eigen::MatrixXd Z(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(size()));
    Eigen::VectorXd row(static_cast<Eigen::Index>(size()));
    for (std::size_t n = 0; n < points.size(); ++n) {
      features_into(points[n].coords(), row);
      Z.row(static_cast<Eigen::Index>(n)) = row.transpose();
    }
    return Z;
  }

 private:
  int M_;
  int D_;
  std::vector<MultiIndex> lattice_;
  Eigen::VectorXd coefficients_;
};

inline FeatureVector bernstein_features(const SimplexPoint& t, int D) {
  return BernsteinBasis(t.dimension(), D).features(t);
}

inline Eigen::MatrixXd design_matrix(std::span<const SimplexPoint> points, int D) {
  if (points.empty()) throw std::invalid_argument("design_matrix: empty point list");
  const int M = points.front().dimension();
  for (const auto& p : points)
    if (p.dimension() != M) throw std::invalid_argument("design_matrix: inconsistent point dimensions");
  return BernsteinBasis(M, D).design(points);
}

/// Groups lattice positions by nonzero count. For D >= 1 the keys are
/// 1..min(M,D); the degree-0 lattice has its single index under key 0.
inline std::map<int, std::vector<std::size_t>> partition_by_level(const std::vector<MultiIndex>& lattice) {
  if (lattice.empty()) throw std::invalid_argument("partition_by_level: empty lattice");
  std::map<int, std::vector<std::size_t>> levels;
  for (std::size_t a = 0; a < lattice.size(); ++a) levels[lattice[a].nonzero_count()].push_back(a);
  return levels;
}

/// Polynomial map b(t) = sum_d multinomial(D,d) t^d p_d from the (M-1)-simplex to R^L.
class BezierSimplex {
 public:
  BezierSimplex(int M, int D, Eigen::MatrixXd control_points)
      : basis_(M, D), control_points_(std::move(control_points)) {
    if (static_cast<std::size_t>(control_points_.rows()) != basis_.size())
      throw std::invalid_argument("BezierSimplex: expected " + std::to_string(basis_.size()) +
                                  " control points, got " + std::to_string(control_points_.rows()));
    if (control_points_.cols() < 1) throw std::invalid_argument("BezierSimplex: L must be >= 1");
    if (!control_points_.allFinite()) throw std::invalid_argument("BezierSimplex: non-finite control point");
  }

  int M() const { return basis_.dimension(); }
  int D() const { return basis_.degree(); }
  int L() const { return static_cast<int>(control_points_.cols()); }
  const BernsteinBasis& basis() const { return basis_; }
  const std::vector<MultiIndex>& lattice() const { return basis_.lattice(); }
  const Eigen::MatrixXd& control_points() const { return control_points_; }

  Eigen::VectorXd evaluate(const SimplexPoint& t) const {
    if (t.dimension() != M())
      throw std::invalid_argument("BezierSimplex::evaluate: point has dimension " +
                                  std::to_string(t.dimension()) + ", model has M=" + std::to_string(M()));
    return control_points_.transpose() * basis_.features(t);
  }

  /// Row n is evaluate(points[n]).
  Eigen::MatrixXd evaluate(std::span<const SimplexPoint> points) const {
    for (const auto& p : points)
      if (p.dimension() != M()) throw std::invalid_argument("BezierSimplex::evaluate: dimension mismatch");
    return basis_.design(points) * control_points_;
  }

 private:
  BernsteinBasis basis_;
  Eigen::MatrixXd control_points_;
};

inline Eigen::VectorXd evaluate(const BezierSimplex& model, const SimplexPoint& t) { return model.evaluate(t); }

/// p_d = sum_j (d_j / D) e_j in R^L: the affine unit simplex spanned by e_1..e_M.
inline BezierSimplex unit_simplex_model(int M, int D, int L) {
  if (L < M) throw std::invalid_argument("unit_simplex_model: L must be >= M");
  if (D < 1) throw std::invalid_argument("unit_simplex_model: D must be >= 1");
  const auto lattice = enumerate_lattice(M, D);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(lattice.size()), L);
  for (std::size_t a = 0; a < lattice.size(); ++a)
    for (int j = 0; j < M; ++j) P(static_cast<Eigen::Index>(a), j) = static_cast<double>(lattice[a][j]) / D;
  return BezierSimplex(M, D, std::move(P));
}

// JSON: {"M":..,"D":..,"L":..,"control_points":[[row 0],[row 1],..]} with rows
// in canonical lattice order.

inline nlohmann::json to_json(const BezierSimplex& model) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index a = 0; a < model.control_points().rows(); ++a) {
    std::vector<double> row(model.control_points().cols());
    for (Eigen::Index l = 0; l < model.control_points().cols(); ++l) row[l] = model.control_points()(a, l);
    rows.push_back(row);
  }
  return {{"M", model.M()}, {"D", model.D()}, {"L", model.L()}, {"control_points", rows}};
}

inline BezierSimplex bezier_from_json(const nlohmann::json& j) {
  try {
    const int M = j.at("M").get<int>();
    const int D = j.at("D").get<int>();
    const int L = j.at("L").get<int>();
    const auto& rows = j.at("control_points");
    Eigen::MatrixXd P(static_cast<Eigen::Index>(rows.size()), L);
    for (std::size_t a = 0; a < rows.size(); ++a) {
      if (rows[a].size() != static_cast<std::size_t>(L))
        throw std::invalid_argument("control point row " + std::to_string(a) + " has wrong length");
      for (int l = 0; l < L; ++l) P(static_cast<Eigen::Index>(a), l) = rows[a][l].get<double>();
    }
    return BezierSimplex(M, D, std::move(P));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bezier_from_json: ") + e.what());
  }
}

}  // namespace bezierfit
