#include <gtest/gtest.h>

#include <random>

#include "l0relax/error.hpp"
#include "l0relax/exact.hpp"
#include "l0relax/perspective.hpp"
#include "l0relax/sdp.hpp"
#include "random_instance.hpp"

using namespace l0relax;
using l0relax::fixtures::orthonormal_instance;
using l0relax::fixtures::random_instance;

TEST(Sdp, EncodingAtLiftedPointIsL0Objective) {
  const ProblemInstance inst = random_instance(15, 4, 0.7, 0.2, 1);
  const SdpProblem sp = build_sdp(inst);
  ASSERT_EQ(sp.blocks.constraints.size(), 9u);
  Vector b(4);
  b << 1.5, 0.0, -0.25, 2.0;
  const Vector z = (b.array() != 0.0).cast<double>();
  conic::BlockMatrix x;
  Matrix y(5, 5);
  y(0, 0) = 1.0;
  y.col(0).tail(4) = b;
  y.row(0).tail(4) = b.transpose();
  y.bottomRightCorner(4, 4) = b * b.transpose();
  x.push_back(y);
  for (int i = 0; i < 4; ++i) {
    Matrix w(2, 2);
    w << z(i), b(i), b(i), b(i) * b(i);
    x.push_back(w);
  }
  const conic::BlockMatrix c = conic::objective_blocks(sp.blocks);
  double v = sp.blocks.objective_constant;
  for (std::size_t j = 0; j < c.size(); ++j) v += c[j].cwiseProduct(x[j]).sum();
  EXPECT_NEAR(v, objective_l0(inst, b), 1e-12 * (1 + v));
  // Every constraint holds at the lifted point.
  const Vector ax = conic::apply_constraints(sp.blocks, x);
  for (std::size_t k = 0; k < sp.blocks.constraints.size(); ++k) {
    EXPECT_NEAR(ax(static_cast<Eigen::Index>(k)), sp.blocks.constraints[k].rhs, 1e-12);
  }
}

TEST(Sdp, ZeroLambdaIsRidgeRegression) {
  const ProblemInstance inst = random_instance(20, 6, 0.0, 0.3, 2);
  const GramCache g = build_gram(inst);
  const SdpSolution s = solve_sdp(build_sdp(inst, g));
  const double ridge = 0.5 * g.yty - 0.5 * g.xty.dot(g.gram.ldlt().solve(g.xty));
  EXPECT_TRUE(s.stats.converged);
  EXPECT_NEAR(s.dual.value, ridge, 1e-6 * (1 + ridge));
  EXPECT_NEAR(s.primal.value, ridge, 1e-6 * (1 + ridge));
}

TEST(Sdp, BoundsSandwichedByPerspectiveAndExact) {
  for (unsigned seed = 0; seed < 5; ++seed) {
    const ProblemInstance inst = random_instance(25, 8, 0.4, 0.1, 100 + seed);
    const GramCache g = build_gram(inst);
    const SdpSolution s = solve_sdp(build_sdp(inst, g));
    ASSERT_TRUE(s.stats.converged);
    const double zeta = s.dual.value;
    const double l0 = brute_force(inst).objective;
    EXPECT_LE(zeta, l0 + 1e-6 * (1 + l0));
    for (const Vector& d : {Vector(Vector::Zero(8)), delta_uniform(g).delta, delta_pwg(inst).delta}) {
      EXPECT_LE(solve_pr(inst, g, PerspectiveParams{d}).value, zeta + 1e-6 * (1 + zeta));
    }
    const PerspectiveParams star = extract_delta_star(s.dual, g);
    EXPECT_TRUE(check_admissible(g, star.delta));
    EXPECT_GE(solve_pr(inst, g, star).value, zeta - 1e-4 * (1 + zeta));
  }
}

TEST(Sdp, MatchesBestPerspectiveBoundInTwoDimensions) {
  // For p = 2 the best diagonal can be found by brute search over the
  // admissible set {delta >= 0, G - diag(delta) >= 0}.
  const ProblemInstance inst = random_instance(10, 2, 0.3, 0.05, 7, 2, 0.3);
  const GramCache g = build_gram(inst);
  const double zeta = solve_sdp(build_sdp(inst, g)).dual.value;
  double best = -1e300;
  const int m = 60;
  for (int i = 0; i <= m; ++i) {
    const double d1 = g.gram(0, 0) * i / m;
    // Largest admissible d2 given d1, and a grid below it.
    const double a = g.gram(0, 0) - d1;
    const double d2max = a > 0 ? g.gram(1, 1) - g.gram(0, 1) * g.gram(0, 1) / a : 0.0;
    for (int j = 0; j <= m; ++j) {
      Vector d(2);
      d << d1, std::max(0.0, d2max) * j / m * (1 - 1e-9);
      if (!check_admissible(g, d)) continue;
      best = std::max(best, solve_pr(inst, g, PerspectiveParams{d}).value);
    }
  }
  EXPECT_LE(best, zeta + 1e-7 * (1 + zeta));
  EXPECT_GE(best, zeta - 1e-3 * (1 + zeta));
}

TEST(Sdp, OrthonormalDesignIsTight) {
  const ProblemInstance inst = orthonormal_instance(30, 6, 1.0, 3);
  const GramCache g = build_gram(inst);
  double closed = 0.5 * g.yty;
  for (int i = 0; i < 6; ++i) closed += std::min(0.0, inst.lambda() - 0.5 * g.xty(i) * g.xty(i));
  const SdpSolution s = solve_sdp(build_sdp(inst, g));
  EXPECT_NEAR(s.dual.value, closed, 1e-6 * (1 + closed));
  EXPECT_NEAR(brute_force(inst).objective, closed, 1e-9 * (1 + closed));
  const auto cert = rank1_certificate(s.primal);
  ASSERT_TRUE(std::holds_alternative<ExactSolution>(cert));
  const FitResult fit = certified_fit(inst, std::get<ExactSolution>(cert));
  EXPECT_NEAR(fit.objective, closed, 1e-9 * (1 + closed));
}

TEST(Sdp, WarmStartReachesSameValue) {
  const ProblemInstance inst = random_instance(25, 8, 0.3, 0.1, 8);
  const GramCache g = build_gram(inst);
  const SdpSolution first = solve_sdp(build_sdp(inst, g));
  const SdpProblem next = build_sdp(inst.with_params(0.4, 0.1), g);
  const SdpSolution cold = solve_sdp(next);
  const SdpSolution warm = solve_sdp(next, {}, &first);
  EXPECT_TRUE(warm.stats.converged);
  EXPECT_NEAR(warm.dual.value, cold.dual.value, 1e-6 * (1 + cold.dual.value));
}

TEST(Sdp, ResidualsAndGapAtDefaultTolerances) {
  const ProblemInstance inst = random_instance(80, 30, 0.2, 0.1, 9, 6, 1.0);
  const SdpSolution s = solve_sdp(build_sdp(inst));
  EXPECT_TRUE(s.stats.converged);
  EXPECT_LE(s.stats.relative_gap, 1e-6);
  EXPECT_LE(s.stats.primal_infeasibility, 1e-7);
  EXPECT_LE(s.stats.dual_infeasibility, 1e-7);
  EXPECT_GE(s.primal.value, s.dual.value - 1e-7 * (1 + s.primal.value));
}

TEST(LambdaMax, MatchesEigenvalueFormula) {
  for (unsigned seed = 0; seed < 4; ++seed) {
    const ProblemInstance inst = random_instance(20, 6, 0.1, 0.2, 30 + seed);
    const GramCache g = build_gram(inst);
    const Vector ac = g.xty.cwiseAbs();
    const Matrix m = ac.asDiagonal() * g.gram.inverse() * ac.asDiagonal();
    const double expected = 0.5 * Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues().maxCoeff();
    EXPECT_NEAR(lambda_max(inst), expected, 1e-6 * (1 + expected));
  }
}

TEST(LambdaMax, ZeroResponseGivesExactZero) {
  const ProblemInstance inst(Matrix::Identity(4, 3), Vector::Zero(4), 0.5, 0.0);
  EXPECT_EQ(lambda_max(inst), 0.0);
}

TEST(Sdp, JsonRoundTripAndEquality) {
  const ProblemInstance inst = random_instance(12, 3, 0.2, 0.1, 4);
  const SdpProblem sp = build_sdp(inst);
  const SdpProblem back = sdp_from_json(sdp_to_json(sp));
  EXPECT_TRUE(back == sp);
  const SdpProblem other = build_sdp(inst.with_params(0.3, 0.1));
  EXPECT_FALSE(other == sp);
  const SdpProblem smaller = build_sdp(random_instance(12, 2, 0.2, 0.1, 4));
  EXPECT_FALSE(smaller == sp);
  EXPECT_THROW((void)sdp_from_json("{}"), ParseError);
  EXPECT_THROW((void)sdp_from_json("not json"), ParseError);
}

TEST(Sdp, LiftedRank) {
  Vector b(2);
  b << 1.0, 2.0;
  EXPECT_EQ(lifted_rank(b, b * b.transpose(), 1e-6), 1);
  Matrix bm = b * b.transpose();
  bm.diagonal().array() += 0.5;
  EXPECT_EQ(lifted_rank(b, bm, 1e-6), 3);
}
