#pragma once

// Perspective relaxations in penalized form:
//   min_b 1/2 ||X b - y||^2 + 1/2 mu ||b||^2 + sum_i mcp_value(b_i, delta_i, lambda)
// which is convex whenever G - diag(delta) >= 0, G = X^T X + mu I.

#include "l0relax/instance.hpp"

namespace l0relax {

/// Admissible perspective weights: delta >= 0 and G - diag(delta) >= 0.
struct PerspectiveParams {
  Vector delta;
};

struct PrSolution {
  Vector b;
  double value = 0.0;     ///< penalized objective at b (includes 1/2 y^T y)
  double residual = 0.0;  ///< prox-gradient residual at termination
  int iterations = 0;
  bool converged = false;
};

struct PrConfig {
  double tol = 1e-8;              ///< residual <= tol * (1 + ||X^T y||)
  double rel_change_tol = 1e-10;  ///< relative objective change
  int max_iterations = 50000;
};

/// Tolerance on lambda_min(G - diag(delta)), scaled by (1 + ||G||).
inline constexpr double kAdmissibleTolerance = 1e-8;

/// delta_i = lambda_min(G) (1 - 1e-8) for all i.
[[nodiscard]] PerspectiveParams delta_uniform(const GramCache& gram);

/// delta_i = mu for all i (the reverse Huber relaxation). Throws MuZero when mu = 0.
[[nodiscard]] PerspectiveParams delta_pwg(const ProblemInstance& inst);

[[nodiscard]] bool check_admissible(const GramCache& gram, const Vector& delta);

/// Penalized perspective objective at b.
[[nodiscard]] double pr_objective(const GramCache& gram, const Vector& delta, double lambda,
                                  const Vector& b);

/// Global minimizer of the perspective relaxation (the problem is convex for
/// admissible delta). Throws NotAdmissible. On hitting the iteration cap the
/// best iterate is returned with converged = false.
[[nodiscard]] PrSolution solve_pr(const ProblemInstance& inst, const GramCache& gram,
                                  const PerspectiveParams& params, const PrConfig& config = {});
[[nodiscard]] PrSolution solve_pr(const ProblemInstance& inst, const PerspectiveParams& params,
                                  const PrConfig& config = {});

/// Minimizes the smooth loss with the reverse Huber penalty written directly,
/// sum_i pwg_penalty(b_i, mu, lambda), with no ridge term in the loss. Used to
/// cross-check solve_pr with delta = mu.
[[nodiscard]] PrSolution solve_pwg_direct(const ProblemInstance& inst, const PrConfig& config = {});

/// Optimal value of the lasso  1/2 ||Xb - y||^2 + 1/2 mu ||b||^2 + (lambda / M) ||b||_1,
/// the continuous relaxation of the big-M formulation with z_i in [0, inf).
[[nodiscard]] double lasso_equivalence_value(const ProblemInstance& inst, double big_m,
                                             const PrConfig& config = {});

}  // namespace l0relax
