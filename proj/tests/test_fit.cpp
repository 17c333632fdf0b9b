#include <bezierfit/fit.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace bezierfit;

namespace {

BezierSimplex random_model(int M, int D, int L, Rng& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd P(static_cast<Eigen::Index>(lattice_size(M, D)), L);
  for (Eigen::Index a = 0; a < P.rows(); ++a)
    for (Eigen::Index l = 0; l < L; ++l) P(a, l) = g(rng);
  return BezierSimplex(M, D, P);
}

Sample uniform_sample(const BezierSimplex& b, std::size_t n, Rng& rng, double sigma = 0.0) {
  std::vector<SimplexPoint> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(sample_uniform_simplex(b.M(), rng));
  Eigen::MatrixXd x = b.evaluate(pts);
  std::normal_distribution<double> g(0.0, sigma > 0 ? sigma : 1.0);
  if (sigma > 0) x = x.unaryExpr([&](double v) { return v + g(rng); });
  return Sample(std::move(pts), std::move(x));
}

StratifiedSample stratified_sample(const BezierSimplex& b, std::size_t per_level, Rng& rng, double sigma = 0.0) {
  StratifiedSample s;
  std::normal_distribution<double> g(0.0, sigma > 0 ? sigma : 1.0);
  for (int m = 1; m <= std::min(b.M(), b.D()); ++m) {
    auto pts = sample_skeleton(b.M(), m, per_level, rng);
    Eigen::MatrixXd x = b.evaluate(pts);
    if (sigma > 0) x = x.unaryExpr([&](double v) { return v + g(rng); });
    s.levels[m] = Sample(std::move(pts), std::move(x));
  }
  return s;
}

double training_loss(const Sample& s, const BezierSimplex& model) {
  return (model.evaluate(s.points()) - s.values()).squaredNorm();
}

}  // namespace

TEST(NormalEquations, Examples) {
  const Eigen::MatrixXd B = Eigen::MatrixXd::Random(3, 2);
  EXPECT_TRUE(solve_normal_equations(Eigen::MatrixXd::Identity(3, 3), B).isApprox(B));

  Eigen::MatrixXd G(2, 2), b(2, 1);
  G << 2, 0, 0, 4;
  b << 2, 8;
  const Eigen::MatrixXd x = solve_normal_equations(G, b);
  EXPECT_DOUBLE_EQ(x(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(x(1, 0), 2.0);
}

TEST(NormalEquations, RandomSpdResidual) {
  Rng rng(20);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd A(12, 8), B(8, 3);
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = g(rng);
    for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = g(rng);
    const Eigen::MatrixXd G = A.transpose() * A;
    const Eigen::MatrixXd X = solve_normal_equations(G, B);
    EXPECT_LE((G * X - B).cwiseAbs().maxCoeff(), 1e-9 * B.cwiseAbs().maxCoeff());
  }
}

TEST(NormalEquations, SingularAndIllConditioned) {
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2, 2);
  G(0, 0) = 1;
  EXPECT_THROW(solve_normal_equations(G, Eigen::MatrixXd::Ones(2, 1)), SingularDesignError);
  G(1, 1) = 1e-14;
  EXPECT_THROW(solve_normal_equations(G, Eigen::MatrixXd::Ones(2, 1)), SingularDesignError);
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0.5, 0, 1;
  EXPECT_THROW(solve_normal_equations(asym, Eigen::MatrixXd::Ones(2, 1)), std::invalid_argument);
}

TEST(AllAtOnce, NoiselessRecovery) {
  Rng rng(21);
  for (int M = 1; M <= 5; ++M)
    for (int D = 1; D <= 3; ++D) {
      const auto truth = random_model(M, D, 4, rng);
      const auto s = uniform_sample(truth, 2 * lattice_size(M, D) + 2, rng);
      const auto fit = fit_all_at_once(s, D);
      EXPECT_LE((fit.control_points() - truth.control_points()).cwiseAbs().maxCoeff(), 1e-8) << M << "," << D;
    }
}

TEST(AllAtOnce, UnderdeterminedIsSingular) {
  Rng rng(22);
  const auto truth = random_model(3, 3, 2, rng);
  EXPECT_THROW(fit_all_at_once(uniform_sample(truth, 9, rng), 3), SingularDesignError);
  // Enough points, all at one vertex: rank one.
  std::vector<SimplexPoint> same(20, SimplexPoint::vertex(3, 0));
  EXPECT_THROW(fit_all_at_once(Sample(same, Eigen::MatrixXd::Ones(20, 2)), 2), SingularDesignError);
  EXPECT_THROW(fit_all_at_once(Sample(), 2), SingularDesignError);
}

TEST(AllAtOnce, ResidualOrthogonalityAndPerturbationOptimality) {
  Rng rng(23);
  const auto truth = random_model(3, 2, 3, rng);
  const auto s = uniform_sample(truth, 60, rng, 0.3);
  const auto fit = fit_all_at_once(s, 2);
  const Eigen::MatrixXd Z = fit.basis().design(s.points());
  const double scale = (Z.transpose() * s.values()).cwiseAbs().maxCoeff();
  EXPECT_LE(normal_residual(Z, s.values(), fit.control_points()), 1e-8 * scale);

  const double base = training_loss(s, fit);
  for (Eigen::Index a = 0; a < fit.control_points().rows(); ++a)
    for (double delta : {1e-3, -1e-3}) {
      Eigen::MatrixXd P = fit.control_points();
      P.row(a).array() += delta;
      EXPECT_GT(training_loss(s, BezierSimplex(3, 2, P)), base);
    }
}

TEST(AllAtOnce, ScalingEquivariance) {
  Rng rng(24);
  const auto truth = random_model(4, 2, 2, rng);
  const auto s = uniform_sample(truth, 50, rng, 0.1);
  const auto a = fit_all_at_once(s, 2);
  const auto b = fit_all_at_once(s.scaled(4.0), 2);  // power of two: exact in floating point
  EXPECT_TRUE(b.control_points() == 4.0 * a.control_points());
}

TEST(InductiveSkeleton, NoiselessRecoveryAndAgreementWithAao) {
  Rng rng(25);
  for (int M = 1; M <= 5; ++M)
    for (int D = 1; D <= 3; ++D) {
      const auto truth = random_model(M, D, 3, rng);
      const auto strat = stratified_sample(truth, 3 * lattice_size(M, D), rng);
      const auto isk = fit_inductive_skeleton(strat, D);
      EXPECT_LE((isk.control_points() - truth.control_points()).cwiseAbs().maxCoeff(), 1e-8) << M << "," << D;
      const auto aao = fit_all_at_once(uniform_sample(truth, 3 * lattice_size(M, D), rng), D);
      EXPECT_LE((isk.control_points() - aao.control_points()).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(InductiveSkeleton, MissingLevelIsInsufficient) {
  Rng rng(26);
  const auto truth = random_model(3, 2, 2, rng);
  auto strat = stratified_sample(truth, 30, rng);
  strat.levels.erase(2);
  EXPECT_THROW(fit_inductive_skeleton(strat, 2), InsufficientStrataError);
  StratifiedSample empty;
  EXPECT_THROW(fit_inductive_skeleton(empty, 2), InsufficientStrataError);
}

TEST(InductiveSkeleton, PointsAboveTheirLevelAreRejected) {
  Rng rng(27);
  const auto truth = random_model(3, 2, 2, rng);
  auto strat = stratified_sample(truth, 30, rng);
  std::vector<SimplexPoint> interior{SimplexPoint({0.2, 0.3, 0.5})};
  strat.levels[1].append(interior[0], truth.evaluate(interior[0]));
  EXPECT_THROW(fit_inductive_skeleton(strat, 2), std::invalid_argument);
}

TEST(InductiveSkeleton, LowerLevelsInvariantToHigherLevelData) {
  Rng rng(28);
  const auto truth = random_model(4, 3, 2, rng);
  auto a = stratified_sample(truth, 40, rng, 0.2);
  auto b = a;
  Rng other(99);
  auto replacement = stratified_sample(truth, 40, other, 0.2);
  b.levels[3] = replacement.levels[3];
  const auto fa = fit_inductive_skeleton(a, 3);
  const auto fb = fit_inductive_skeleton(b, 3);
  const auto groups = partition_by_level(fa.lattice());
  for (int m : {1, 2})
    for (auto idx : groups.at(m))
      EXPECT_TRUE(fa.control_points().row(static_cast<Eigen::Index>(idx)) ==
                  fb.control_points().row(static_cast<Eigen::Index>(idx)));
  bool top_changed = false;
  for (auto idx : groups.at(3))
    top_changed |= fa.control_points().row(static_cast<Eigen::Index>(idx)) !=
                   fb.control_points().row(static_cast<Eigen::Index>(idx));
  EXPECT_TRUE(top_changed);
}

TEST(InductiveSkeleton, PerLevelResidualOrthogonality) {
  Rng rng(29);
  const auto truth = random_model(3, 3, 2, rng);
  const auto strat = stratified_sample(truth, 60, rng, 0.3);
  const auto fit = fit_inductive_skeleton(strat, 3);
  const auto groups = partition_by_level(fit.lattice());
  for (int m = 1; m <= 3; ++m) {
    const Sample& s = strat.levels.at(m);
    const Eigen::MatrixXd Zfull = fit.basis().design(s.points());
    const Eigen::MatrixXd residual = s.values() - Zfull * fit.control_points();
    std::vector<Eigen::Index> cols(groups.at(m).begin(), groups.at(m).end());
    const Eigen::MatrixXd Zm = Zfull(Eigen::all, cols);
    const double scale = (Zm.transpose() * s.values()).cwiseAbs().maxCoeff();
    EXPECT_LE((Zm.transpose() * residual).cwiseAbs().maxCoeff(), 1e-8 * scale) << m;
  }
}

TEST(InductiveSkeleton, LevelsAboveDegreeAreIgnored) {
  Rng rng(30);
  const auto truth = random_model(4, 2, 2, rng);
  auto strat = stratified_sample(truth, 40, rng);
  const auto base = fit_inductive_skeleton(strat, 2);
  strat.levels[4] = Sample(sample_skeleton(4, 4, 5, rng), Eigen::MatrixXd::Constant(5, 2, 1e6));
  EXPECT_TRUE(fit_inductive_skeleton(strat, 2).control_points() == base.control_points());
}

TEST(SampleCsv, RoundTripBothLayouts) {
  Rng rng(31);
  const auto truth = random_model(3, 2, 2, rng);
  const auto s = uniform_sample(truth, 7, rng, 0.1);
  std::stringstream buf;
  write_sample_csv(buf, s);
  const auto back = read_sample_csv(buf);
  ASSERT_EQ(back.unstratified.size(), 7u);
  EXPECT_TRUE(back.unstratified.values() == s.values());
  for (std::size_t n = 0; n < 7; ++n)
    EXPECT_TRUE(back.unstratified.points()[n].coords() == s.points()[n].coords());

  const auto strat = stratified_sample(truth, 5, rng);
  std::stringstream buf2;
  write_sample_csv(buf2, strat);
  const auto back2 = read_sample_csv(buf2);
  EXPECT_TRUE(back2.unstratified.empty());
  ASSERT_EQ(back2.strata.levels.size(), 2u);
  EXPECT_TRUE(back2.strata.levels.at(2).values() == strat.levels.at(2).values());
}

TEST(SampleCsv, ErrorsCarryLocation) {
  std::stringstream bad("t_1,t_2,x_1,level\n0.5,0.5,1.0,0\n0.5,abc,1.0,0\n");
  try {
    read_sample_csv(bad);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_EQ(e.column(), 2u);
  }
  std::stringstream ragged("t_1,t_2,x_1,level\n0.5,0.5,1.0\n");
  EXPECT_THROW(read_sample_csv(ragged), ParseError);
  std::stringstream off("t_1,t_2,x_1,level\n0.5,0.6,1.0,0\n");
  EXPECT_THROW(read_sample_csv(off), ParseError);
  std::stringstream empty("");
  EXPECT_THROW(read_sample_csv(empty), ParseError);
}
