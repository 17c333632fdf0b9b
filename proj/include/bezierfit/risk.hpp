#pragma once

// Asymptotic l2-risk of Bezier simplex estimators.
//
// Both estimators have risk  R = sum_{A,B} Sigma_AB E[(P P^T)_AB]  where P
// holds the control-point errors and Sigma is the Gram matrix of the
// Bernstein basis under the uniform measure on the simplex. For the
// all-at-once fit E[P P^T] -> sigma^2 L (N Sigma)^{-1}. For the inductive
// skeleton fit, each level's estimate is an OLS solve against data whose
// lower-level contribution has been removed, so level-m noise enters every
// level i >= m through chains of skeleton cross-moment matrices (Lambda).
// The ISK risk is linear in the reciprocal subsample sizes 1/N^(m).

#include <bezierfit/bezier.hpp>
#include <bezierfit/simplex.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace bezierfit {

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

/// E[t^q] for t uniform on the (M-1)-simplex: (M-1)! prod(q_i!) / (|q| + M - 1)!.
inline double simplex_moment(int M, const MultiIndex& q) {
  if (q.dimension() != M) throw std::invalid_argument("simplex_moment: exponent has wrong dimension");
  const int Q = q.degree();
  if (Q + M - 1 <= 170) {
    double v = factorial(M - 1) / factorial(Q + M - 1);
    for (int e : q.entries) v *= factorial(e);
    return v;
  }
  double log_v = std::lgamma(M) - std::lgamma(Q + M);
  for (int e : q.entries) log_v += std::lgamma(e + 1);
  return std::exp(log_v);
}

/// Expectation of t^q for t uniform on the level-m skeleton (the union of
/// the C(M,m) faces with m vertices), in its indicator form: the face
/// whose vertex set equals the support of q contributes, so the result is
/// zero whenever q does not have exactly m nonzero entries. This is the
/// exact expectation for every q with m nonzeros, which is the only case
/// the skeleton cross-moments need.
inline double skeleton_moment(int M, int m, const MultiIndex& q) {
  if (m < 1 || m > M) throw std::invalid_argument("skeleton_moment: need 1 <= m <= M");
  if (q.dimension() != M) throw std::invalid_argument("skeleton_moment: exponent has wrong dimension");
  if (q.nonzero_count() != m) return 0.0;
  MultiIndex restricted;
  for (int e : q.entries)
    if (e > 0) restricted.entries.push_back(e);
  return simplex_moment(m, restricted) / static_cast<double>(binomial(M, m));
}

// ---------------------------------------------------------------------------
// Sigma
// ---------------------------------------------------------------------------

struct SigmaMatrix {
  int M = 0;
  int D = 0;
  Eigen::MatrixXd entries;
};

/// Sigma_AB = (2D)!(M-1)!/(2D+M-1)! * C(D;d_A) C(D;d_B) / C(2D; d_A+d_B).
inline SigmaMatrix sigma_matrix(int M, int D) {
  const auto lattice = enumerate_lattice(M, D);
  const auto n = static_cast<Eigen::Index>(lattice.size());
  const double prefactor = factorial(2 * D) * factorial(M - 1) / factorial(2 * D + M - 1);
  SigmaMatrix s{M, D, Eigen::MatrixXd(n, n)};
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a; b < n; ++b) {
      const double v = prefactor * static_cast<double>(multinomial(D, lattice[a])) *
                       static_cast<double>(multinomial(D, lattice[b])) /
                       static_cast<double>(multinomial(2 * D, lattice[a] + lattice[b]));
      s.entries(a, b) = v;
      s.entries(b, a) = v;
    }
  }
  return s;
}

/// Same matrix assembled as C(D;d_A) C(D;d_B) E[t^(d_A+d_B)].
inline SigmaMatrix sigma_matrix_from_moments(int M, int D) {
  const auto lattice = enumerate_lattice(M, D);
  const auto n = static_cast<Eigen::Index>(lattice.size());
  SigmaMatrix s{M, D, Eigen::MatrixXd(n, n)};
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      s.entries(a, b) = static_cast<double>(multinomial(D, lattice[a])) *
                        static_cast<double>(multinomial(D, lattice[b])) * simplex_moment(M, lattice[a] + lattice[b]);
  return s;
}

/// Smallest pivot of the LDL^T factorization of Sigma (positive iff Sigma is PD).
inline double sigma_min_pivot(const SigmaMatrix& sigma) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma.entries);
  return ldlt.vectorD().minCoeff();
}

/// sum_{A,B} Sigma_AB * S_AB for a second-moment matrix S of control-point errors.
inline double risk_from_second_moment(const SigmaMatrix& sigma, const Eigen::MatrixXd& second_moment) {
  if (second_moment.rows() != sigma.entries.rows() || second_moment.cols() != sigma.entries.cols())
    throw std::invalid_argument("risk_from_second_moment: expected a " + std::to_string(sigma.entries.rows()) +
                                "-square matrix");
  return sigma.entries.cwiseProduct(second_moment).sum();
}

/// sum_{A,B} Sigma_AB (Sigma^{-1})_AB, which equals C(D+M-1, D).
inline double hadamard_identity_check(int M, int D) {
  const SigmaMatrix sigma = sigma_matrix(M, D);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma.entries);
  if (llt.info() != Eigen::Success) throw std::runtime_error("hadamard_identity_check: Sigma is singular");
  const Eigen::MatrixXd inverse = llt.solve(Eigen::MatrixXd::Identity(sigma.entries.rows(), sigma.entries.cols()));
  return risk_from_second_moment(sigma, inverse);
}

/// sigma^2 L * C(D+M-1, D) / N.
inline double aao_risk(int M, int D, double sigma2L, double N) {
  if (!(N >= 1)) throw std::invalid_argument("aao_risk: N must be >= 1");
  return sigma2L * static_cast<double>(binomial(D + M - 1, D)) / N;
}

// ---------------------------------------------------------------------------
// Lambda (skeleton cross-moments)
// ---------------------------------------------------------------------------

struct LambdaMatrix {
  int m = 0;  // row level
  int k = 0;  // column level
  std::vector<std::size_t> row_positions;     // lattice positions with m nonzeros
  std::vector<std::size_t> column_positions;  // lattice positions with k nonzeros
  Eigen::MatrixXd entries;
};

/// Entry (d, d') = C(D;d) C(D;d') E_{level-m skeleton}[t^(d+d')] for d at
/// level m and d' at level k <= m. Zero unless supp(d') is inside supp(d).
inline LambdaMatrix lambda_matrix(int M, int D, int m, int k) {
  if (k < 1 || k > m || m > std::min(M, D))
    throw std::invalid_argument("lambda_matrix: need 1 <= k <= m <= min(M,D)");
  const auto lattice = enumerate_lattice(M, D);
  const auto groups = partition_by_level(lattice);
  LambdaMatrix out{m, k, groups.at(m), groups.at(k), {}};
  out.entries.resize(static_cast<Eigen::Index>(out.row_positions.size()),
                     static_cast<Eigen::Index>(out.column_positions.size()));
  for (std::size_t r = 0; r < out.row_positions.size(); ++r) {
    const MultiIndex& dr = lattice[out.row_positions[r]];
    for (std::size_t c = 0; c < out.column_positions.size(); ++c) {
      const MultiIndex& dc = lattice[out.column_positions[c]];
      out.entries(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          static_cast<double>(multinomial(D, dr)) * static_cast<double>(multinomial(D, dc)) *
          skeleton_moment(M, m, dr + dc);
    }
  }
  return out;
}

/// Inverse of the diagonal block Lambda^{(m)[m]}.
inline Eigen::MatrixXd lambda_inverse(const LambdaMatrix& diagonal) {
  if (diagonal.m != diagonal.k) throw std::invalid_argument("lambda_inverse: block is not diagonal");
  Eigen::LLT<Eigen::MatrixXd> llt(diagonal.entries);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("lambda_inverse: Lambda^(" + std::to_string(diagonal.m) + ")[" +
                             std::to_string(diagonal.m) + "] is singular");
  return llt.solve(Eigen::MatrixXd::Identity(diagonal.entries.rows(), diagonal.entries.cols()));
}

// ---------------------------------------------------------------------------
// ISK second moments and risk coefficients
// ---------------------------------------------------------------------------

/// All Lambda blocks for one (M, D), indexed [m][k] for 1 <= k <= m <= top.
class LambdaTable {
 public:
  LambdaTable(int M, int D) : M_(M), D_(D), top_(std::min(M, D)), lattice_(enumerate_lattice(M, D)) {
    if (D < 1) throw std::invalid_argument("LambdaTable: D must be >= 1");
    const auto groups = partition_by_level(lattice_);
    blocks_.resize(top_ + 1);
    inverses_.resize(top_ + 1);
    positions_.resize(top_ + 1);
    for (int m = 1; m <= top_; ++m) {
      positions_[m] = groups.at(m);
      blocks_[m].resize(m + 1);
      for (int k = 1; k <= m; ++k) blocks_[m][k] = lambda_matrix(M, D, m, k).entries;
      inverses_[m] = lambda_inverse(lambda_matrix(M, D, m, m));
    }
  }

  int M() const { return M_; }
  int D() const { return D_; }
  int top() const { return top_; }
  std::size_t lattice_size() const { return lattice_.size(); }
  const std::vector<std::size_t>& positions(int m) const { return positions_[m]; }
  /// Lambda^{(m)[k]}, k <= m.
  const Eigen::MatrixXd& cross(int m, int k) const { return blocks_[m][k]; }
  /// Lambda_{(m)} = (Lambda^{(m)[m]})^{-1}.
  const Eigen::MatrixXd& inverse(int m) const { return inverses_[m]; }

 private:
  int M_, D_, top_;
  std::vector<MultiIndex> lattice_;
  std::vector<std::vector<Eigen::MatrixXd>> blocks_;
  std::vector<Eigen::MatrixXd> inverses_;
  std::vector<std::vector<std::size_t>> positions_;
};

/// Response of level-i control points to level-m noise, summed over every
/// increasing chain m = a_0 < a_1 < ... < a_p = i:
///   sum (-1)^p Lambda_(a_p) Lambda^(a_p)[a_{p-1}] Lambda_(a_{p-1}) ... Lambda^(a_1)[a_0] Lambda_(a_0).
inline Eigen::MatrixXd chain_sum(const LambdaTable& table, int i, int m) {
  const int gaps = i - m - 1;  // candidate intermediate levels m+1..i-1
  if (gaps < 0) return table.inverse(m);
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(table.inverse(i).rows(), table.inverse(m).cols());
  for (unsigned subset = 0; subset < (1u << gaps); ++subset) {
    std::vector<int> chain{m};
    for (int g = 0; g < gaps; ++g)
      if (subset & (1u << g)) chain.push_back(m + 1 + g);
    chain.push_back(i);
    Eigen::MatrixXd product = table.inverse(m);
    for (std::size_t s = 1; s < chain.size(); ++s)
      product = (table.inverse(chain[s]) * table.cross(chain[s], chain[s - 1]) * product).eval();
    const int p = static_cast<int>(chain.size()) - 1;
    total += (p % 2 == 0 ? 1.0 : -1.0) * product;
  }
  return total;
}

/// Coefficient matrix of sigma^2 L / N^(m) in the asymptotic E[P_ISK P_ISK^T],
/// laid out over the full lattice: block (i, j) is
///   chain_sum(i, m) Lambda^(m)[m] chain_sum(j, m)^T   for i, j >= m.
inline Eigen::MatrixXd isk_second_moment_coefficient(const LambdaTable& table, int m) {
  const auto n = static_cast<Eigen::Index>(table.lattice_size());
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
  std::vector<Eigen::MatrixXd> chains(table.top() + 1);
  for (int i = m; i <= table.top(); ++i) chains[i] = chain_sum(table, i, m);
  const Eigen::MatrixXd& noise = table.cross(m, m);
  for (int i = m; i <= table.top(); ++i) {
    for (int j = m; j <= table.top(); ++j) {
      const Eigen::MatrixXd block = chains[i] * noise * chains[j].transpose();
      const auto& ri = table.positions(i);
      const auto& rj = table.positions(j);
      for (std::size_t a = 0; a < ri.size(); ++a)
        for (std::size_t b = 0; b < rj.size(); ++b)
          E(static_cast<Eigen::Index>(ri[a]), static_cast<Eigen::Index>(rj[b])) =
              block(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  }
  return E;
}

/// Same coefficient matrix by propagating level-m noise through the
/// level-by-level solve: P^(m) = Lambda_(m) u, and for i > m
/// P^(i) = -Lambda_(i) sum_{m <= k < i} Lambda^(i)[k] P^(k).
/// Independent of chain enumeration; used to cross-check it.
inline Eigen::MatrixXd isk_second_moment_coefficient_recursive(const LambdaTable& table, int m) {
  const auto n = static_cast<Eigen::Index>(table.lattice_size());
  const auto width = table.inverse(m).cols();
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, width);  // lattice response to a unit level-m source
  std::vector<Eigen::MatrixXd> response(table.top() + 1);
  response[m] = table.inverse(m);
  for (int i = m + 1; i <= table.top(); ++i) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(table.inverse(i).rows(), width);
    for (int k = m; k < i; ++k) acc += table.cross(i, k) * response[k];
    response[i] = -table.inverse(i) * acc;
  }
  for (int i = m; i <= table.top(); ++i) {
    const auto& rows = table.positions(i);
    for (std::size_t a = 0; a < rows.size(); ++a) T.row(static_cast<Eigen::Index>(rows[a])) = response[i].row(a);
  }
  // Source covariance of u is Lambda^(m)[m] (up to sigma^2 L / N^(m)).
  return T * table.cross(m, m) * T.transpose();
}

struct RiskModel {
  enum class Kind { AllAtOnce, InductiveSkeleton };

  Kind kind = Kind::AllAtOnce;
  int M = 0;
  int D = 0;
  double sigma2L = 1.0;
  double aao_coefficient = 0.0;                 // R = sigma2L * aao_coefficient / N
  std::map<int, double> isk_coefficients;       // R = sigma2L * sum_m c_m / N^(m)

  /// Risk for the given per-level sample sizes (ISK) or total size (AAO, key 0).
  double risk(const std::map<int, double>& sizes) const {
    if (kind == Kind::AllAtOnce) {
      double total = 0.0;
      for (const auto& [m, n] : sizes) total += n;
      return sigma2L * aao_coefficient / total;
    }
    double r = 0.0;
    for (const auto& [m, c] : isk_coefficients) {
      auto it = sizes.find(m);
      if (it == sizes.end() || !(it->second > 0)) return std::numeric_limits<double>::infinity();
      r += c / it->second;
    }
    return sigma2L * r;
  }
};

inline RiskModel aao_risk_model(int M, int D, double sigma2L = 1.0) {
  RiskModel model;
  model.kind = RiskModel::Kind::AllAtOnce;
  model.M = M;
  model.D = D;
  model.sigma2L = sigma2L;
  model.aao_coefficient = static_cast<double>(binomial(D + M - 1, D));
  return model;
}

/// Coefficients c_m of the asymptotic ISK risk R = sigma^2 L sum_m c_m / N^(m),
/// m = 1..min(M,D), from the chain-sum block formula contracted against Sigma.
inline RiskModel isk_risk_coefficients(int M, int D, double sigma2L = 1.0) {
  if (M < 1 || D < 1) throw std::invalid_argument("isk_risk_coefficients: need M >= 1 and D >= 1");
  const LambdaTable table(M, D);
  const SigmaMatrix sigma = sigma_matrix(M, D);
  RiskModel model;
  model.kind = RiskModel::Kind::InductiveSkeleton;
  model.M = M;
  model.D = D;
  model.sigma2L = sigma2L;
  for (int m = 1; m <= table.top(); ++m)
    model.isk_coefficients[m] = risk_from_second_moment(sigma, isk_second_moment_coefficient(table, m));
  return model;
}

/// Asymptotic E[P_ISK P_ISK^T] for concrete per-level sizes (levels 1..min(M,D)).
inline Eigen::MatrixXd isk_second_moment(int M, int D, const std::map<int, double>& sizes, double sigma2L = 1.0) {
  const LambdaTable table(M, D);
  const auto n = static_cast<Eigen::Index>(table.lattice_size());
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
  for (int m = 1; m <= table.top(); ++m) {
    auto it = sizes.find(m);
    if (it == sizes.end() || !(it->second > 0))
      throw std::invalid_argument("isk_second_moment: missing size for level " + std::to_string(m));
    E += isk_second_moment_coefficient(table, m) / it->second;
  }
  return sigma2L * E;
}

// ---------------------------------------------------------------------------
// Subsample allocation
// ---------------------------------------------------------------------------

struct Allocation {
  std::size_t N = 0;
  std::map<int, double> fractions;        // continuous optimum, sums to 1
  std::map<int, std::size_t> per_level;   // integer sizes, sum to N
  double minimized_risk = 0.0;            // at the continuous optimum
  double allocated_risk = 0.0;            // at the integer sizes
};

namespace detail {
/// Largest-remainder rounding of N * fractions; ties go to the higher level.
inline std::map<int, std::size_t> round_allocation(const std::map<int, double>& fractions, std::size_t N) {
  std::map<int, std::size_t> sizes;
  std::vector<std::pair<double, int>> remainders;
  std::size_t assigned = 0;
  for (const auto& [m, f] : fractions) {
    const double exact = f * static_cast<double>(N);
    const auto base = static_cast<std::size_t>(std::floor(exact));
    sizes[m] = base;
    assigned += base;
    remainders.emplace_back(exact - static_cast<double>(base), m);
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second > b.second;
  });
  for (std::size_t r = 0; assigned < N; ++r, ++assigned) ++sizes[remainders[r % remainders.size()].second];
  // Every level needs at least one point: take from the largest level.
  for (auto& [m, n] : sizes) {
    if (n > 0) continue;
    auto donor = std::max_element(sizes.begin(), sizes.end(),
                                  [](const auto& a, const auto& b) { return a.second < b.second; });
    --donor->second;
    n = 1;
  }
  return sizes;
}
}  // namespace detail

/// Minimizes sum_m c_m / N^(m) subject to sum_m N^(m) = N. The continuous
/// optimum is N^(m) proportional to sqrt(c_m), with minimum (sum_m sqrt(c_m))^2 / N.
inline Allocation optimal_allocation(const RiskModel& model, std::size_t N) {
  if (model.kind != RiskModel::Kind::InductiveSkeleton)
    throw std::invalid_argument("optimal_allocation: needs an inductive skeleton risk model");
  if (N == 0) throw std::invalid_argument("optimal_allocation: N must be positive");
  if (N < model.isk_coefficients.size())
    throw std::invalid_argument("optimal_allocation: N is smaller than the number of levels");
  double root_sum = 0.0;
  for (const auto& [m, c] : model.isk_coefficients) root_sum += std::sqrt(c);
  Allocation out;
  out.N = N;
  for (const auto& [m, c] : model.isk_coefficients) out.fractions[m] = std::sqrt(c) / root_sum;
  out.minimized_risk = model.sigma2L * root_sum * root_sum / static_cast<double>(N);
  out.per_level = detail::round_allocation(out.fractions, N);
  std::map<int, double> sizes;
  for (const auto& [m, n] : out.per_level) sizes[m] = static_cast<double>(n);
  out.allocated_risk = model.risk(sizes);
  return out;
}

/// N split evenly over levels 1..min(M,D), or over all levels 1..M when
/// all_levels is set (points on levels above D then carry no control points).
inline Allocation equal_allocation(const RiskModel& model, std::size_t N, bool all_levels = false) {
  const int levels = all_levels ? model.M : std::min(model.M, model.D);
  if (N < static_cast<std::size_t>(levels)) throw std::invalid_argument("equal_allocation: N too small");
  Allocation out;
  out.N = N;
  for (int m = 1; m <= levels; ++m) out.fractions[m] = 1.0 / levels;
  for (int m = 1; m <= levels; ++m) out.per_level[m] = N / levels + (static_cast<std::size_t>(m) <= N % levels ? 1 : 0);
  std::map<int, double> sizes;
  for (const auto& [m, n] : out.per_level) sizes[m] = static_cast<double>(n);
  out.allocated_risk = model.risk(sizes);
  out.minimized_risk = out.allocated_risk;
  return out;
}

}  // namespace bezierfit
