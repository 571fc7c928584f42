#include <gtest/gtest.h>

#include <sstream>

#include "l0relax/error.hpp"
#include "l0relax/exact.hpp"
#include "random_instance.hpp"

using namespace l0relax;
using l0relax::fixtures::random_instance;

namespace {

// Enumerates every support with independent restricted least squares.
double enumerate_all(const ProblemInstance& inst) {
  const int p = static_cast<int>(inst.p());
  double best = 0.5 * inst.y().squaredNorm();
  for (unsigned mask = 1; mask < (1u << p); ++mask) {
    std::vector<int> s;
    for (int j = 0; j < p; ++j) {
      if (mask & (1u << j)) s.push_back(j);
    }
    best = std::min(best, objective_l0(inst, restricted_ls(inst.x(), inst.y(), inst.mu(), s)));
  }
  return best;
}

}  // namespace

TEST(BruteForce, TwoByTwoExample) {
  Vector y(2);
  y << 3.0, 1.0;
  const ProblemInstance inst(Matrix::Identity(2, 2), y, 1.0, 0.0);
  const FitResult f = brute_force(inst);
  EXPECT_EQ(f.support, std::vector<int>{0});
  EXPECT_DOUBLE_EQ(f.b(0), 3.0);
  EXPECT_EQ(f.b(1), 0.0);
  EXPECT_DOUBLE_EQ(f.objective, 1.5);
}

TEST(BruteForce, MatchesIndependentEnumeration) {
  for (unsigned seed = 0; seed < 6; ++seed) {
    const ProblemInstance inst = random_instance(20, 8, 0.2 + 0.1 * seed, 0.05 * seed, seed, 3, 1.0);
    EXPECT_NEAR(brute_force(inst).objective, enumerate_all(inst), 1e-10);
  }
}

TEST(BruteForce, LimitsOfLambda) {
  const ProblemInstance inst = random_instance(20, 6, 0.0, 0.1, 3);
  EXPECT_EQ(brute_force(inst).support.size(), 6u);
  const double big = 0.5 * inst.y().squaredNorm() + 1.0;
  const FitResult f = brute_force(inst.with_params(big, 0.1));
  EXPECT_TRUE(f.support.empty());
  EXPECT_DOUBLE_EQ(f.objective, 0.5 * inst.y().squaredNorm());
}

TEST(BruteForce, TiesPreferSmallerSupport) {
  // Two identical columns: {0} and {1} tie, {0, 1} is dominated.
  Matrix x(3, 2);
  x << 1, 1, 0, 0, 0, 0;
  Vector y(3);
  y << 2, 0, 0;
  const FitResult f = brute_force(ProblemInstance(x, y, 0.5, 0.01));
  EXPECT_EQ(f.support, std::vector<int>{0});
}

TEST(BruteForce, TooLarge) {
  const ProblemInstance inst = random_instance(30, 21, 0.1, 0.1, 1);
  EXPECT_THROW((void)brute_force(inst), TooLarge);
}

TEST(BigM, Examples) {
  Vector c(3);
  c << 1.0, -4.0, 2.0;
  EXPECT_DOUBLE_EQ(big_m(ProblemInstance(Matrix::Identity(3, 3), c, 0.1, 0.0)), 20.0);
  EXPECT_DOUBLE_EQ(big_m(ProblemInstance(Matrix::Identity(3, 3), Vector::Zero(3), 0.1, 0.0)), 1.0);
}

TEST(BranchAndBound, MatchesBruteForce) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const ProblemInstance inst = random_instance(30, 10, 0.1 + 0.05 * seed, 0.1, 70 + seed, 4, 1.0);
    BnbConfig cfg;
    cfg.tol = 1e-10;
    const BnbResult r = solve_big_m(inst, cfg);
    const double bf = brute_force(inst).objective;
    EXPECT_TRUE(r.optimal);
    EXPECT_NEAR(r.incumbent.objective, bf, 1e-8 * bf);
    EXPECT_LE(r.lower_bound, r.incumbent.objective);
  }
}

TEST(BranchAndBound, ZeroLambdaSolvesAtRoot) {
  const ProblemInstance inst = random_instance(30, 10, 0.0, 0.1, 5);
  const BnbResult r = branch_and_bound(inst, big_m(inst));
  EXPECT_TRUE(r.optimal);
  EXPECT_EQ(r.nodes, 1);
}

TEST(BranchAndBound, DoublingMLeavesOptimumUnchanged) {
  for (unsigned seed = 0; seed < 5; ++seed) {
    const ProblemInstance inst = random_instance(30, 10, 0.3, 0.1, 90 + seed, 4, 1.0);
    BnbConfig cfg;
    cfg.tol = 1e-10;
    const double m = big_m(inst);
    const double a = branch_and_bound(inst, m, cfg).incumbent.objective;
    const double b = branch_and_bound(inst, 2 * m, cfg).incumbent.objective;
    EXPECT_NEAR(a, b, 1e-8 * a);
  }
}

TEST(BranchAndBound, SmallMIsDetectedAndDoubled) {
  // With safety 1 and a tiny bound the incumbent sits at M and the solve repeats.
  Vector y(3);
  y << 4.0, 0.0, 0.0;
  const ProblemInstance inst(Matrix::Identity(3, 3), y, 0.1, 0.0);
  BnbConfig cfg;
  const BnbResult r = solve_big_m(inst, cfg, 0.5);
  EXPECT_GE(r.m_doublings, 1);
  EXPECT_NEAR(r.incumbent.objective, 0.1, 1e-9);
}

TEST(BranchAndBound, BudgetReportsBounds) {
  const ProblemInstance inst = random_instance(60, 25, 0.05, 0.05, 9, 8, 2.0);
  BnbConfig cfg;
  cfg.max_nodes = 3;
  const BnbResult r = branch_and_bound(inst, big_m(inst), cfg);
  EXPECT_FALSE(r.optimal);
  EXPECT_LE(r.nodes, 3);
  EXPECT_LE(r.lower_bound, r.incumbent.objective);
  std::ostringstream out;
  write_bnb_trace(r, out);
  EXPECT_EQ(out.str().substr(0, 37), "seconds,lower_bound,upper_bound,nodes");
}
