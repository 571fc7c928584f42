#pragma once

// Optimal perspective relaxation as a semidefinite program.
//
// Primal, over (b, z, B):
//   min 1/2 <G, B> - c^T b + lambda sum z_i + 1/2 y^T y
//   s.t. [1 b^T; b B] >= 0,  [z_i b_i; b_i B_ii] >= 0  for all i.
// Dual, over (eps, alpha, delta, t):
//   max 1/2 y^T y - eps / 2
//   s.t. [eps alpha^T; alpha G - diag(delta)] >= 0,  [delta_i t_i; t_i 2 lambda] >= 0,
//        alpha_i + c_i + t_i = 0.
// Here G = X^T X + mu I and c = X^T y.

#include <optional>
#include <string>
#include <variant>

#include "l0relax/conic.hpp"
#include "l0relax/instance.hpp"
#include "l0relax/perspective.hpp"

namespace l0relax {

/// Block layout: block 0 is [1 b^T; b B] of order p + 1; block 1 + i is
/// [z_i b_i; b_i B_ii]. Constraint 0 fixes the corner to 1, constraints
/// 1 + i tie b_i and 1 + p + i tie B_ii across blocks.
struct SdpProblem {
  int p = 0;
  double lambda = 0.0;
  Matrix gram;
  Vector xty;
  double yty = 0.0;
  conic::BlockProblem blocks;
};

/// Exact structural equality (dimensions, every coefficient bit-for-bit).
[[nodiscard]] bool operator==(const SdpProblem& a, const SdpProblem& b);

struct SdpPrimal {
  Vector b;
  Vector z;
  Matrix bmat;        ///< B
  double value = 0.0; ///< objective at (b, z, B), including 1/2 y^T y
  int rank = 0;       ///< numerical rank of [1 b^T; b B] at the configured tolerance
};

struct DualCertificate {
  double epsilon = 0.0;
  Vector alpha;
  Vector delta;
  Vector t;
  double value = 0.0;  ///< 1/2 y^T y - eps / 2
};

struct SolveStats {
  int iterations = 0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double relative_gap = 0.0;  ///< |primal - dual| / (1 + |primal|)
  double seconds = 0.0;
  std::string status;
  bool converged = false;
};

struct SdpConfig {
  // Interior-point iterates approach the boundary in proportion to the gap, so
  // a loose gap leaves b ~ 1e-5 where the optimum is exactly zero.
  double gap_tol = 1e-9;
  double feas_tol = 1e-8;
  int max_iterations = 100;
  double rank_tol = 1e-6;
};

struct SdpSolution {
  SdpPrimal primal;
  DualCertificate dual;
  SolveStats stats;
  conic::Iterate iterate;  ///< raw interior-point iterate, usable as a warm start
};

[[nodiscard]] SdpProblem build_sdp(const ProblemInstance& inst, const GramCache& gram);
[[nodiscard]] SdpProblem build_sdp(const ProblemInstance& inst);

/// Solves the relaxation. Never throws on non-convergence; check
/// stats.converged. `warm` is an earlier solution of the same shape (e.g. the
/// previous point on a lambda path).
[[nodiscard]] SdpSolution solve_sdp(const SdpProblem& problem, const SdpConfig& config = {},
                                    const SdpSolution* warm = nullptr);

/// delta from the certificate, projected onto [0, inf) and shrunk by a scalar
/// factor if needed so that G - diag(delta) >= 0.
[[nodiscard]] PerspectiveParams extract_delta_star(const DualCertificate& cert,
                                                   const GramCache& gram);

/// Numerical rank of [1 b^T; b B] with eigenvalues counted above tol * lambda_1.
[[nodiscard]] int lifted_rank(const Vector& b, const Matrix& bmat, double tol);

struct ExactSolution {
  Vector b;      ///< zero outside the support of z
  Vector z;      ///< binary
  double eigen_ratio = 0.0;
};
struct NotRank1 {
  double eigen_ratio = 0.0;
};

/// If lambda_2 / lambda_1 of [1 b^T; b B] is at most tol the relaxation is
/// exact and b solves the l0 problem.
[[nodiscard]] std::variant<ExactSolution, NotRank1> rank1_certificate(const SdpPrimal& primal,
                                                                      double tol = 1e-6);

/// Polishes a certified solution with a restricted least-squares solve on its support.
[[nodiscard]] FitResult certified_fit(const ProblemInstance& inst, const ExactSolution& exact);

struct LambdaMaxResult {
  double value = 0.0;
  Vector delta;
  SolveStats stats;
};

/// Smallest lambda for which b = 0 solves the relaxation:
///   min lambda  s.t.  G - diag(delta) >= 0,  [delta_i -c_i; -c_i 2 lambda] >= 0.
[[nodiscard]] LambdaMaxResult solve_lambda_max(const ProblemInstance& inst,
                                               const SdpConfig& config = {});
[[nodiscard]] double lambda_max(const ProblemInstance& inst, const SdpConfig& config = {});

/// JSON form of the block problem: block orders, objective and constraint
/// entries as [block, row, col, value] quadruples, plus the instance data
/// needed to rebuild it.
[[nodiscard]] std::string sdp_to_json(const SdpProblem& problem);
[[nodiscard]] SdpProblem sdp_from_json(const std::string& text);

}  // namespace l0relax
