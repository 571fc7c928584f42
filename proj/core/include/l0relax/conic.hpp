#pragma once

// Primal-dual interior-point solver for block-diagonal semidefinite programs
//
//   min  <C, X> + k      s.t.  <A_i, X> = b_i,  X = diag(X_1, ..., X_q) >= 0
//   max  b^T y + k       s.t.  C - sum_i y_i A_i = S >= 0
//
// with sparse symmetric data. Search directions use Nesterov-Todd scaling and
// Mehrotra's predictor-corrector; the Schur complement system is dense.

#include <string>
#include <vector>

#include "l0relax/numerics.hpp"

namespace l0relax::conic {

/// One coefficient of a symmetric matrix: `value` sits at (row, col) and,
/// when row != col, also at (col, row). Stored with row <= col.
struct Entry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

struct Constraint {
  std::vector<Entry> entries;
  double rhs = 0.0;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

struct BlockProblem {
  std::vector<int> block_orders;
  std::vector<Entry> objective;
  std::vector<Constraint> constraints;
  double objective_constant = 0.0;

  friend bool operator==(const BlockProblem&, const BlockProblem&) = default;
};

using BlockMatrix = std::vector<Matrix>;

struct Iterate {
  BlockMatrix x;
  Vector y;
  BlockMatrix s;
};

struct IpmConfig {
  double gap_tol = 1e-7;   ///< |primal - dual| / (1 + |primal|)
  double feas_tol = 1e-8;  ///< relative primal and dual residuals
  int max_iterations = 100;
  double step_fraction = 0.95;
};

enum class IpmStatus { kOptimal, kMaxIterations, kStalled, kNumericalFailure };

[[nodiscard]] std::string to_string(IpmStatus s);

struct IpmResult {
  Iterate iterate;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double relative_gap = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  IpmStatus status = IpmStatus::kMaxIterations;
};

/// Throws DimensionError on entries outside their block or with row > col.
void validate(const BlockProblem& problem);

/// <A_k, X> for every constraint.
[[nodiscard]] Vector apply_constraints(const BlockProblem& problem, const BlockMatrix& x);

/// sum_k y_k A_k as block matrices.
[[nodiscard]] BlockMatrix apply_adjoint(const BlockProblem& problem, const Vector& y);

/// The objective C as dense blocks.
[[nodiscard]] BlockMatrix objective_blocks(const BlockProblem& problem);

/// Scaled identities, y = 0.
[[nodiscard]] Iterate default_start(const BlockProblem& problem, double primal_scale = 1.0,
                                    double dual_scale = 1.0);

/// Runs the interior-point method from a start with X, S positive definite.
/// Returns the best iterate seen; the status says whether tolerances were met.
[[nodiscard]] IpmResult solve(const BlockProblem& problem, Iterate start,
                              const IpmConfig& config = {});

}  // namespace l0relax::conic
