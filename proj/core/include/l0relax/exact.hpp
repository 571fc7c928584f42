#pragma once

// Exact solvers for the l0 problem at desk scale: support enumeration and a
// big-M branch-and-bound.

#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "l0relax/instance.hpp"

namespace l0relax {

inline constexpr int kBruteForceMaxP = 20;

/// Global optimum by enumerating all 2^p supports. Ties go to the smaller
/// support, then the lexicographically smaller one. Throws TooLarge for p > 20.
[[nodiscard]] FitResult brute_force(const ProblemInstance& inst);

/// Heuristic bound on ||b*||_inf: safety * max(||G^-1 c||_inf, max_i |c_i| / G_ii),
/// or 1 when that is zero.
[[nodiscard]] double big_m(const ProblemInstance& inst, double safety = 5.0);

struct BnbConfig {
  double tol = 1e-6;  ///< stop when (UB - LB) <= tol * max(UB, 1e-12)
  long max_nodes = 100000;
  double max_seconds = std::numeric_limits<double>::infinity();
  double node_tol = 1e-9;  ///< proximal-gradient tolerance at each node
  int node_max_iterations = 20000;
  std::optional<FitResult> initial_incumbent;
};

struct BnbTracePoint {
  double seconds = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  long nodes = 0;
};

struct BnbResult {
  FitResult incumbent;
  double lower_bound = 0.0;
  long nodes = 0;
  double seconds = 0.0;
  bool optimal = false;
  double big_m = 0.0;
  int m_doublings = 0;
  std::vector<BnbTracePoint> trace;
};

/// Best-first search over z fixings. The node bound comes from the convex
/// problem f(b) + lambda * (#fixed-one + sum_{free} |b_i| / M) with fixed-zero
/// coordinates removed, made rigorous through strong convexity, so an
/// inexact node solve only weakens the bound. Valid when M bounds the optimal
/// coefficients.
[[nodiscard]] BnbResult branch_and_bound(const ProblemInstance& inst, double m,
                                         const BnbConfig& config = {});

/// branch_and_bound with M from big_m(inst, safety), doubled and re-solved
/// while the incumbent reaches 0.99 M (at most 20 doublings).
[[nodiscard]] BnbResult solve_big_m(const ProblemInstance& inst, const BnbConfig& config = {},
                                    double safety = 5.0);

/// CSV with columns seconds, lower_bound, upper_bound, nodes.
void write_bnb_trace(const BnbResult& r, std::ostream& out);

}  // namespace l0relax
