#include <gtest/gtest.h>

#include <random>

#include "l0relax/error.hpp"
#include "l0relax/perspective.hpp"
#include "random_instance.hpp"

using namespace l0relax;
using l0relax::fixtures::random_instance;

namespace {

// Coordinate descent for the lasso with the ridge term; independent of the
// proximal-gradient code.
double lasso_cd(const ProblemInstance& inst, double w) {
  const GramCache g = build_gram(inst);
  const auto p = inst.p();
  Vector b = Vector::Zero(p);
  for (int sweep = 0; sweep < 20000; ++sweep) {
    double moved = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double r = g.xty(j) - g.gram.row(j).dot(b) + g.gram(j, j) * b(j);
      const double nb = (r > w ? r - w : (r < -w ? r + w : 0.0)) / g.gram(j, j);
      moved = std::max(moved, std::abs(nb - b(j)));
      b(j) = nb;
    }
    if (moved < 1e-14) break;
  }
  return smooth_loss(g, b) + w * b.lpNorm<1>();
}

}  // namespace

TEST(Perspective, ZeroDeltaIsRidgeRegression) {
  const ProblemInstance inst = random_instance(30, 8, 0.5, 0.2, 1);
  const GramCache g = build_gram(inst);
  const PrSolution s = solve_pr(inst, g, PerspectiveParams{Vector::Zero(8)});
  const double ridge = 0.5 * g.yty - 0.5 * g.xty.dot(g.gram.ldlt().solve(g.xty));
  EXPECT_TRUE(s.converged);
  EXPECT_NEAR(s.value, ridge, 1e-9 * (1 + std::abs(ridge)));
}

TEST(Perspective, UniformDeltaIsAdmissible) {
  const ProblemInstance inst = random_instance(30, 8, 0.5, 0.2, 2);
  const GramCache g = build_gram(inst);
  const PerspectiveParams d = delta_uniform(g);
  EXPECT_TRUE(check_admissible(g, d.delta));
  EXPECT_NEAR(d.delta(0), g.lambda_min, 1e-7 * g.lambda_min);
}

TEST(Perspective, InadmissibleDeltaThrows) {
  const ProblemInstance inst = random_instance(30, 8, 0.5, 0.2, 3);
  const GramCache g = build_gram(inst);
  const Vector big = Vector::Constant(8, 2.0 * g.lambda_max);
  EXPECT_FALSE(check_admissible(g, big));
  EXPECT_THROW((void)solve_pr(inst, g, PerspectiveParams{big}), NotAdmissible);
  Vector neg = Vector::Zero(8);
  neg(2) = -0.1;
  EXPECT_FALSE(check_admissible(g, neg));
  EXPECT_THROW((void)check_admissible(g, Vector::Zero(3)), DimensionError);
}

TEST(Perspective, PwgNeedsRidge) {
  const ProblemInstance inst = random_instance(30, 8, 0.5, 0.0, 4);
  EXPECT_THROW((void)delta_pwg(inst), MuZero);
  EXPECT_THROW((void)solve_pwg_direct(inst), MuZero);
}

TEST(Perspective, ReverseHuberFormAgrees) {
  for (unsigned seed = 0; seed < 5; ++seed) {
    const ProblemInstance inst = random_instance(25, 10, 0.3, 0.4, 10 + seed);
    const PrSolution a = solve_pr(inst, delta_pwg(inst));
    const PrSolution b = solve_pwg_direct(inst);
    EXPECT_NEAR(a.value, b.value, 1e-8 * (1 + std::abs(a.value)));
    EXPECT_LT((a.b - b.b).norm(), 1e-4);
  }
}

TEST(Perspective, SolutionIsGlobalMinimum) {
  const ProblemInstance inst = random_instance(20, 6, 0.8, 0.1, 21);
  const GramCache g = build_gram(inst);
  const Vector delta = delta_uniform(g).delta;
  const PrSolution s = solve_pr(inst, g, PerspectiveParams{delta});
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 200; ++k) {
    Vector d(6);
    for (int j = 0; j < 6; ++j) d(j) = normal(rng);
    const double scale = k < 100 ? 1e-3 : 1.0;
    EXPECT_GE(pr_objective(g, delta, inst.lambda(), s.b + scale * d), s.value - 1e-10);
  }
}

TEST(Perspective, LassoRelaxationMatchesCoordinateDescent) {
  for (unsigned seed = 0; seed < 4; ++seed) {
    const ProblemInstance inst = random_instance(30, 7, 0.6, 0.05, 40 + seed);
    const double m = 3.0;
    const double v = lasso_equivalence_value(inst, m);
    EXPECT_NEAR(v, lasso_cd(inst, inst.lambda() / m), 1e-9 * (1 + std::abs(v)));
  }
}
