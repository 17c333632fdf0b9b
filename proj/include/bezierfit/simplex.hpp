#pragma once

// Simplex-lattice combinatorics, subsimplex masks and uniform sampling on
// the standard simplex and its skeletons.
//
// Skeleton levels are counted by the number of nonzero barycentric
// coordinates: level m (1 <= m <= M) is the union of all (m-1)-dimensional
// faces. Level 1 holds the vertices, level M the whole simplex.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace bezierfit {

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Exact integer combinatorics
// ---------------------------------------------------------------------------

/// C(n, k) in exact 64-bit arithmetic. Throws std::overflow_error when the
/// result does not fit.
inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    // result * (n - k + i) is divisible by i at every step.
    const std::uint64_t numer = static_cast<std::uint64_t>(n - k + i);
    const std::uint64_t g = std::gcd(result, static_cast<std::uint64_t>(i));
    const std::uint64_t r = result / g;
    const std::uint64_t d = static_cast<std::uint64_t>(i) / g;
    if (r > std::numeric_limits<std::uint64_t>::max() / numer)
      throw std::overflow_error("binomial: C(" + std::to_string(n) + "," + std::to_string(k) +
                                ") overflows 64 bits");
    result = r * (numer / d);
  }
  return result;
}

/// n! as a double. Exact integer product for n <= 20, long double product
/// beyond (correctly rounded to well under 1 ulp of double for n <= 30).
inline double factorial(int n) {
  if (n < 0) throw std::invalid_argument("factorial: negative argument");
  if (n <= 20) {
    std::uint64_t f = 1;
    for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
    return static_cast<double>(f);
  }
  long double f = 2432902008176640000.0L;  // 20!
  for (int i = 21; i <= n; ++i) f *= i;
  return static_cast<double>(f);
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Exponent vector d in N^M with |d| = D. Identifies one control point.
struct MultiIndex {
  std::vector<int> entries;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> e) : entries(std::move(e)) {
    for (int v : entries)
      if (v < 0) throw std::invalid_argument("MultiIndex: negative entry");
  }
  MultiIndex(std::initializer_list<int> e) : MultiIndex(std::vector<int>(e)) {}

  int dimension() const { return static_cast<int>(entries.size()); }
  int degree() const { return std::accumulate(entries.begin(), entries.end(), 0); }
  int nonzero_count() const {
    return static_cast<int>(std::count_if(entries.begin(), entries.end(), [](int v) { return v > 0; }));
  }
  int operator[](std::size_t i) const { return entries[i]; }

  friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
    if (a.dimension() != b.dimension()) throw std::invalid_argument("MultiIndex: dimension mismatch");
    MultiIndex r = a;
    for (std::size_t i = 0; i < r.entries.size(); ++i) r.entries[i] += b.entries[i];
    return r;
  }
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

/// Binary vector I != 0 naming the subsimplex spanned by the vertices with I_i = 1.
struct SubsimplexMask {
  std::vector<std::uint8_t> bits;

  SubsimplexMask() = default;
  explicit SubsimplexMask(std::vector<std::uint8_t> b) : bits(std::move(b)) {
    for (auto v : bits)
      if (v > 1) throw std::invalid_argument("SubsimplexMask: bits must be 0 or 1");
    if (cardinality() == 0) throw std::invalid_argument("SubsimplexMask: all-zero mask");
  }
  SubsimplexMask(std::initializer_list<int> b) {
    for (int v : b) bits.push_back(static_cast<std::uint8_t>(v));
    *this = SubsimplexMask(std::move(bits));
  }

  int dimension() const { return static_cast<int>(bits.size()); }
  int cardinality() const { return std::accumulate(bits.begin(), bits.end(), 0); }
  bool contains(std::size_t i) const { return bits[i] != 0; }
  friend bool operator==(const SubsimplexMask&, const SubsimplexMask&) = default;
};

/// Barycentric point of the standard (M-1)-simplex.
class SimplexPoint {
 public:
  static constexpr double kSumTolerance = 1e-12;

  SimplexPoint() = default;

  explicit SimplexPoint(Eigen::VectorXd coords) : coords_(std::move(coords)) {
    if (coords_.size() < 1) throw std::invalid_argument("SimplexPoint: empty coordinate vector");
    for (Eigen::Index i = 0; i < coords_.size(); ++i)
      if (!(coords_[i] >= 0.0) || !std::isfinite(coords_[i]))
        throw std::invalid_argument("SimplexPoint: coordinate " + std::to_string(i) + " is negative or not finite");
    if (std::abs(coords_.sum() - 1.0) > kSumTolerance)
      throw std::invalid_argument("SimplexPoint: coordinates do not sum to 1");
  }
  SimplexPoint(std::initializer_list<double> c)
      : SimplexPoint(Eigen::Map<const Eigen::VectorXd>(c.begin(), static_cast<Eigen::Index>(c.size()))) {}

  static SimplexPoint vertex(int M, int j) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(M);
    c[j] = 1.0;
    return SimplexPoint(std::move(c));
  }

  int dimension() const { return static_cast<int>(coords_.size()); }
  const Eigen::VectorXd& coords() const { return coords_; }
  double operator[](Eigen::Index i) const { return coords_[i]; }
  int nonzero_count() const { return static_cast<int>((coords_.array() > 0.0).count()); }

 private:
  Eigen::VectorXd coords_;
};

// ---------------------------------------------------------------------------
// Lattice and subsimplex enumeration
// ---------------------------------------------------------------------------

/// All d in N^M with |d| = D in reverse-lexicographic order:
/// (D,0,..,0), (D-1,1,0,..), (D-1,0,1,..), ..., (0,..,0,D).
/// This is the row order of every control-point and moment matrix.
inline std::vector<MultiIndex> enumerate_lattice(int M, int D) {
  if (M < 1) throw std::invalid_argument("enumerate_lattice: M must be >= 1");
  if (D < 0) throw std::invalid_argument("enumerate_lattice: D must be >= 0");
  std::vector<MultiIndex> out;
  out.reserve(binomial(D + M - 1, M - 1));
  std::vector<int> cur(M, 0);
  // Depth-first with the largest leading entry first.
  auto rec = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == M - 1) {
      cur[pos] = remaining;
      out.emplace_back(cur);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      cur[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  rec(rec, 0, D);
  return out;
}

inline std::size_t lattice_size(int M, int D) { return binomial(D + M - 1, M - 1); }

/// D! / prod(d_i!) as an exact integer.
inline std::uint64_t multinomial(int D, const MultiIndex& d) {
  if (d.degree() != D)
    throw std::invalid_argument("multinomial: entries sum to " + std::to_string(d.degree()) + ", expected " +
                                std::to_string(D));
  std::uint64_t result = 1;
  int partial = 0;
  for (int v : d.entries) {
    partial += v;
    const std::uint64_t b = binomial(partial, v);
    if (b != 0 && result > std::numeric_limits<std::uint64_t>::max() / b)
      throw std::overflow_error("multinomial: overflows 64 bits");
    result *= b;
  }
  return result;
}

/// (d)_01 binarization.
inline SubsimplexMask nonzero_pattern(const MultiIndex& d) {
  std::vector<std::uint8_t> bits(d.entries.size());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = d.entries[i] > 0 ? 1 : 0;
  if (std::accumulate(bits.begin(), bits.end(), 0) == 0)
    throw std::invalid_argument("nonzero_pattern: all-zero multi-index");
  return SubsimplexMask(std::move(bits));
}

/// All masks with m ones, ordered by the lexicographic order of their
/// vertex sets ({0,1} < {0,2} < {1,2}), i.e. descending as bit strings.
inline std::vector<SubsimplexMask> enumerate_subsimplices(int M, int m) {
  if (M < 1 || m < 1 || m > M)
    throw std::invalid_argument("enumerate_subsimplices: need 1 <= m <= M, got m=" + std::to_string(m) +
                                ", M=" + std::to_string(M));
  std::vector<SubsimplexMask> out;
  std::vector<int> pick(m);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    std::vector<std::uint8_t> bits(M, 0);
    for (int p : pick) bits[p] = 1;
    out.emplace_back(std::move(bits));
    int i = m - 1;
    while (i >= 0 && pick[i] == M - m + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < m; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Uniform draw from the (M-1)-simplex as normalized i.i.d. Exp(1) variates.
inline SimplexPoint sample_uniform_simplex(int M, Rng& rng) {
  if (M < 1) throw std::invalid_argument("sample_uniform_simplex: M must be >= 1");
  std::exponential_distribution<double> expo(1.0);
  Eigen::VectorXd c(M);
  double total = 0.0;
  for (int i = 0; i < M; ++i) {
    // Exp(1) is almost surely positive; a zero draw would still be a valid point.
    c[i] = expo(rng);
    total += c[i];
  }
  c /= total;
  // Renormalize the rounding residue onto the largest coordinate.
  Eigen::Index arg;
  c.maxCoeff(&arg);
  c[arg] += 1.0 - c.sum();
  return SimplexPoint(std::move(c));
}

/// Uniform draw from the subsimplex selected by mask.
inline SimplexPoint sample_uniform_subsimplex(const SubsimplexMask& mask, Rng& rng) {
  const SimplexPoint inner = sample_uniform_simplex(mask.cardinality(), rng);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(mask.dimension());
  Eigen::Index k = 0;
  for (int i = 0; i < mask.dimension(); ++i)
    if (mask.contains(i)) c[i] = inner[k++];
  return SimplexPoint(std::move(c));
}

/// Number of points each subsimplex of level m receives when n points are
/// split equally; the first n mod C(M,m) masks get one extra point.
inline std::vector<std::size_t> equal_split_counts(int M, int m, std::size_t n) {
  const std::size_t faces = binomial(M, m);
  std::vector<std::size_t> counts(faces, n / faces);
  for (std::size_t i = 0; i < n % faces; ++i) ++counts[i];
  return counts;
}

/// n points on the level-m skeleton, split equally over its C(M,m) faces
/// and grouped by face in mask order.
inline std::vector<SimplexPoint> sample_skeleton(int M, int m, std::size_t n, Rng& rng) {
  const auto masks = enumerate_subsimplices(M, m);
  const auto counts = equal_split_counts(M, m, n);
  std::vector<SimplexPoint> out;
  out.reserve(n);
  for (std::size_t f = 0; f < masks.size(); ++f)
    for (std::size_t i = 0; i < counts[f]; ++i) out.push_back(sample_uniform_subsimplex(masks[f], rng));
  return out;
}

}  // namespace bezierfit
