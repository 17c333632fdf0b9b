#include <bezierfit/bezier.hpp>
#include <bezierfit/risk.hpp>

#include <gtest/gtest.h>

using namespace bezierfit;

namespace {

Eigen::VectorXd unit_vector(int L, int j) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(L);
  e[j] = 1.0;
  return e;
}

// Direct evaluation of sum_d multinomial(D,d) t^d p_d with std::pow.
Eigen::VectorXd naive_evaluate(const BezierSimplex& b, const SimplexPoint& t) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.L());
  for (std::size_t a = 0; a < b.lattice().size(); ++a) {
    double w = static_cast<double>(multinomial(b.D(), b.lattice()[a]));
    for (int i = 0; i < b.M(); ++i) w *= std::pow(t[i], b.lattice()[a][i]);
    x += w * b.control_points().row(static_cast<Eigen::Index>(a)).transpose();
  }
  return x;
}

}  // namespace

TEST(Bernstein, VertexFeatureIsIndicator) {
  const Eigen::VectorXd z = bernstein_features(SimplexPoint::vertex(3, 0), 2);
  ASSERT_EQ(z.size(), 6);
  EXPECT_EQ(z[0], 1.0);  // (2,0,0)
  for (int a = 1; a < 6; ++a) EXPECT_EQ(z[a], 0.0);
}

TEST(Bernstein, MidpointOfSegment) {
  const Eigen::VectorXd z = bernstein_features(SimplexPoint({0.5, 0.5}), 2);
  EXPECT_DOUBLE_EQ(z[0], 0.25);
  EXPECT_DOUBLE_EQ(z[1], 0.5);
  EXPECT_DOUBLE_EQ(z[2], 0.25);
}

TEST(Bernstein, DegreeOneIsIdentity) {
  const SimplexPoint t({1.0 / 3, 1.0 / 3, 1.0 / 3});
  const Eigen::VectorXd z = bernstein_features(t, 1);
  for (int a = 0; a < 3; ++a) EXPECT_DOUBLE_EQ(z[a], t[a]);
}

TEST(Bernstein, PartitionOfUnityAndNonnegativity) {
  Rng rng(10);
  for (int M = 1; M <= 6; ++M)
    for (int D = 0; D <= 4; ++D) {
      const BernsteinBasis basis(M, D);
      for (int i = 0; i < 50; ++i) {
        const auto z = basis.features(sample_uniform_simplex(M, rng));
        EXPECT_NEAR(z.sum(), 1.0, 1e-10);
        EXPECT_GE(z.minCoeff(), 0.0);
      }
    }
}

TEST(Bernstein, DimensionMismatchThrows) {
  const BernsteinBasis basis(3, 2);
  EXPECT_THROW(basis.features(SimplexPoint({0.5, 0.5})), std::invalid_argument);
}

TEST(Evaluate, UnitSimplexVertexAndAffineReproduction) {
  Rng rng(11);
  for (int D = 1; D <= 3; ++D) {
    const auto b = unit_simplex_model(4, D, 7);
    EXPECT_TRUE(b.evaluate(SimplexPoint::vertex(4, 1)).isApprox(unit_vector(7, 1)));
    for (int i = 0; i < 100; ++i) {
      const auto t = sample_uniform_simplex(4, rng);
      Eigen::VectorXd expected = Eigen::VectorXd::Zero(7);
      expected.head(4) = t.coords();
      EXPECT_LT((b.evaluate(t) - expected).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Evaluate, MatchesNaiveSummation) {
  Rng rng(12);
  std::normal_distribution<double> g;
  Eigen::MatrixXd P(static_cast<Eigen::Index>(lattice_size(3, 3)), 2);
  for (Eigen::Index a = 0; a < P.rows(); ++a) P.row(a) << g(rng), g(rng);
  const BezierSimplex b(3, 3, P);
  for (int i = 0; i < 50; ++i) {
    const auto t = sample_uniform_simplex(3, rng);
    EXPECT_LT((b.evaluate(t) - naive_evaluate(b, t)).norm(), 1e-12);
  }
}

TEST(Evaluate, VertexInterpolatesCornerControlPoint) {
  Rng rng(13);
  std::normal_distribution<double> g;
  const int M = 4, D = 3;
  Eigen::MatrixXd P(static_cast<Eigen::Index>(lattice_size(M, D)), 3);
  for (Eigen::Index a = 0; a < P.rows(); ++a) P.row(a) << g(rng), g(rng), g(rng);
  const BezierSimplex b(M, D, P);
  for (int j = 0; j < M; ++j) {
    std::vector<int> corner(M, 0);
    corner[j] = D;
    const auto it = std::find(b.lattice().begin(), b.lattice().end(), MultiIndex(corner));
    const auto a = static_cast<Eigen::Index>(it - b.lattice().begin());
    EXPECT_TRUE(b.evaluate(SimplexPoint::vertex(M, j)) == P.row(a).transpose());
  }
}

TEST(Evaluate, DegreeZeroIsConstant) {
  Eigen::MatrixXd P(1, 2);
  P << 3.0, -1.0;
  const BezierSimplex b(3, 0, P);
  EXPECT_TRUE(b.evaluate(SimplexPoint({0.2, 0.3, 0.5})) == P.row(0).transpose());
}

TEST(Evaluate, ValidatesShape) {
  EXPECT_THROW(BezierSimplex(3, 2, Eigen::MatrixXd::Zero(5, 2)), std::invalid_argument);
  EXPECT_THROW(BezierSimplex(3, 2, Eigen::MatrixXd::Zero(6, 0)), std::invalid_argument);
  const auto b = unit_simplex_model(3, 2, 3);
  EXPECT_THROW(b.evaluate(SimplexPoint({1.0, 0.0})), std::invalid_argument);
}

TEST(DesignMatrix, VertexRowAndRowSums) {
  const std::vector<SimplexPoint> one{SimplexPoint::vertex(2, 0)};
  const Eigen::MatrixXd Z = design_matrix(one, 2);
  EXPECT_EQ(Z.row(0), Eigen::RowVector3d(1, 0, 0));

  Rng rng(14);
  std::vector<SimplexPoint> pts;
  for (int i = 0; i < 30; ++i) pts.push_back(sample_uniform_simplex(5, rng));
  const Eigen::MatrixXd Z5 = design_matrix(pts, 3);
  for (Eigen::Index n = 0; n < Z5.rows(); ++n) EXPECT_NEAR(Z5.row(n).sum(), 1.0, 1e-12);
}

TEST(DesignMatrix, GramApproachesSigma) {
  Rng rng(15);
  std::vector<SimplexPoint> pts;
  for (int i = 0; i < 200; ++i) pts.push_back(sample_uniform_simplex(2, rng));
  const Eigen::MatrixXd Z = design_matrix(pts, 2);
  const Eigen::MatrixXd G = Z.transpose() * Z / 200.0;
  EXPECT_LT((G - sigma_matrix(2, 2).entries).cwiseAbs().maxCoeff(), 0.05);
}

TEST(PartitionByLevel, Examples) {
  const auto p32 = partition_by_level(enumerate_lattice(3, 2));
  ASSERT_EQ(p32.size(), 2u);
  const auto l = enumerate_lattice(3, 2);
  std::vector<MultiIndex> level1, level2;
  for (auto a : p32.at(1)) level1.push_back(l[a]);
  for (auto a : p32.at(2)) level2.push_back(l[a]);
  EXPECT_EQ(level1, (std::vector<MultiIndex>{{2, 0, 0}, {0, 2, 0}, {0, 0, 2}}));
  EXPECT_EQ(level2, (std::vector<MultiIndex>{{1, 1, 0}, {1, 0, 1}, {0, 1, 1}}));
  EXPECT_EQ(p32.count(3), 0u);

  const auto p33 = partition_by_level(enumerate_lattice(3, 3));
  EXPECT_EQ(p33.at(1).size(), 3u);
  EXPECT_EQ(p33.at(2).size(), 6u);
  EXPECT_EQ(p33.at(3).size(), 1u);

  const auto p23 = partition_by_level(enumerate_lattice(2, 3));
  EXPECT_EQ(p23.at(1).size(), 2u);
  EXPECT_EQ(p23.at(2).size(), 2u);
}

TEST(PartitionByLevel, SizesSumToLattice) {
  for (int M = 1; M <= 7; ++M)
    for (int D = 1; D <= 4; ++D) {
      std::size_t total = 0;
      for (const auto& [m, idx] : partition_by_level(enumerate_lattice(M, D))) {
        EXPECT_LE(m, D);
        total += idx.size();
      }
      EXPECT_EQ(total, lattice_size(M, D));
    }
}

TEST(Json, RoundTrip) {
  Rng rng(16);
  std::normal_distribution<double> g;
  Eigen::MatrixXd P(10, 2);
  for (Eigen::Index a = 0; a < 10; ++a) P.row(a) << g(rng), g(rng);
  const BezierSimplex b(3, 3, P);
  const BezierSimplex back = bezier_from_json(nlohmann::json::parse(to_json(b).dump()));
  EXPECT_EQ(back.M(), 3);
  EXPECT_EQ(back.D(), 3);
  EXPECT_TRUE(back.control_points() == P);
  EXPECT_THROW(bezier_from_json(nlohmann::json{{"M", 3}}), std::invalid_argument);
}
