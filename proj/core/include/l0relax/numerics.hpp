#pragma once

// Dense symmetric linear algebra shared by every solver.

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace l0relax {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Real symmetric matrix in full storage. Construction checks that the input
/// is symmetric to within 1e-12 of its norm and then symmetrizes it exactly.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix m);

  /// Wraps a matrix known to be exactly symmetric (no check).
  static SymMatrix from_trusted(Matrix m);

  [[nodiscard]] Eigen::Index order() const { return m_.rows(); }
  [[nodiscard]] const Matrix& matrix() const { return m_; }
  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Matrix m_;
};

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
struct EigenDecomp {
  Vector values;
  Matrix vectors;
};

/// Lower-triangular L with L L^T = S. Throws NotPositiveDefinite on a
/// non-positive pivot.
[[nodiscard]] Matrix cholesky(const SymMatrix& s);

[[nodiscard]] EigenDecomp sym_eigen(const SymMatrix& s);
[[nodiscard]] double min_eigenvalue(const SymMatrix& s);
[[nodiscard]] double max_eigenvalue(const SymMatrix& s);

/// Gram factor of the PSD part of S.
struct PsdFactor {
  Matrix u;       ///< order x rank, U U^T ~= S_+
  int rank = 0;   ///< number of retained columns
};

/// Factor S = U U^T. Eigenvalues in [-tol, 0) are clamped to zero; columns
/// are kept for eigenvalues above max(tol, 1e-8) * (1 + ||S||). Throws
/// NotPsd when the smallest eigenvalue is below -tol.
[[nodiscard]] PsdFactor psd_factor(const SymMatrix& s, double tol);

/// Minimizer of 1/2 ||X b - y||^2 + 1/2 mu ||b||^2 subject to b_j = 0 for
/// j outside `support`. Off-support entries are exact zeros. Throws
/// NotPositiveDefinite if the restricted system is singular.
[[nodiscard]] Vector restricted_ls(const Matrix& x, const Vector& y, double mu,
                                   std::span<const int> support);

/// Same minimizer from precomputed G = X^T X + mu I and c = X^T y.
[[nodiscard]] Vector restricted_ls_gram(const Matrix& gram, const Vector& xty,
                                        std::span<const int> support);

/// Frobenius-norm relative asymmetry ||M - M^T|| / max(1, ||M||).
[[nodiscard]] double asymmetry(const Matrix& m);

}  // namespace l0relax
