#include "l0relax/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "l0relax/error.hpp"

namespace l0relax {

double asymmetry(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("matrix is not square");
  }
  return (m - m.transpose()).norm() / std::max(1.0, m.norm());
}

SymMatrix::SymMatrix(Matrix m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("symmetric matrix must be square, got " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()));
  }
  if (!m.allFinite()) {
    throw ParseError("symmetric matrix has non-finite entries");
  }
  if (asymmetry(m) > 1e-12) {
    throw DimensionError("matrix is not symmetric");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::from_trusted(Matrix m) {
  SymMatrix s;
  s.m_ = std::move(m);
  return s;
}

Matrix cholesky(const SymMatrix& s) {
  Eigen::LLT<Matrix> llt(s.matrix());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("cholesky: non-positive pivot");
  }
  return llt.matrixL();
}

EigenDecomp sym_eigen(const SymMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.matrix());
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("sym_eigen: QL iteration did not converge");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

double min_eigenvalue(const SymMatrix& s) {
  if (s.order() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.matrix(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("min_eigenvalue: QL iteration did not converge");
  }
  return es.eigenvalues()(0);
}

double max_eigenvalue(const SymMatrix& s) {
  if (s.order() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.matrix(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("max_eigenvalue: QL iteration did not converge");
  }
  return es.eigenvalues()(s.order() - 1);
}

PsdFactor psd_factor(const SymMatrix& s, double tol) {
  const EigenDecomp ed = sym_eigen(s);
  const Eigen::Index m = s.order();
  if (m > 0 && ed.values(0) < -tol) {
    throw NotPsd("psd_factor: smallest eigenvalue " + std::to_string(ed.values(0)) +
                 " below -" + std::to_string(tol));
  }
  // Dropped eigenvalues contribute at most sqrt(m) * keep to ||U U^T - S||.
  const double keep = std::max(tol, 1e-8) * (1.0 + s.matrix().norm()) /
                      std::sqrt(static_cast<double>(std::max<Eigen::Index>(m, 1)));
  std::vector<Eigen::Index> cols;
  for (Eigen::Index k = m - 1; k >= 0; --k) {
    if (ed.values(k) > keep) cols.push_back(k);
  }
  PsdFactor f;
  f.rank = static_cast<int>(cols.size());
  f.u.resize(m, f.rank);
  for (int j = 0; j < f.rank; ++j) {
    f.u.col(j) = ed.vectors.col(cols[j]) * std::sqrt(ed.values(cols[j]));
  }
  return f;
}

namespace {

void check_support(std::span<const int> support, Eigen::Index p) {
  for (int j : support) {
    if (j < 0 || j >= p) {
      throw DimensionError("support index " + std::to_string(j) + " out of range");
    }
  }
}

// LLT only fails on a non-positive pivot; exactly dependent columns usually
// leave a tiny positive one instead.
bool factor_ok(const Eigen::LLT<Matrix>& llt, const Matrix& gs) {
  if (llt.info() != Eigen::Success) return false;
  const double scale = gs.diagonal().cwiseAbs().maxCoeff();
  const Vector piv = Matrix(llt.matrixL()).diagonal();
  return piv.cwiseAbs2().minCoeff() > 1e-14 * scale;
}

}  // namespace

Vector restricted_ls_gram(const Matrix& gram, const Vector& xty, std::span<const int> support) {
  const Eigen::Index p = gram.rows();
  check_support(support, p);
  Vector b = Vector::Zero(p);
  const auto k = static_cast<Eigen::Index>(support.size());
  if (k == 0) return b;
  Matrix gs(k, k);
  Vector cs(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    cs(a) = xty(support[a]);
    for (Eigen::Index c = 0; c < k; ++c) gs(a, c) = gram(support[a], support[c]);
  }
  Eigen::LLT<Matrix> llt(gs);
  if (!factor_ok(llt, gs)) {
    throw NotPositiveDefinite("restricted_ls: restricted gram is singular");
  }
  const Vector bs = llt.solve(cs);
  for (Eigen::Index a = 0; a < k; ++a) b(support[a]) = bs(a);
  return b;
}

Vector restricted_ls(const Matrix& x, const Vector& y, double mu, std::span<const int> support) {
  if (x.rows() != y.size()) {
    throw DimensionError("restricted_ls: X has " + std::to_string(x.rows()) + " rows but y has " +
                         std::to_string(y.size()) + " entries");
  }
  const Eigen::Index p = x.cols();
  check_support(support, p);
  Vector b = Vector::Zero(p);
  const auto k = static_cast<Eigen::Index>(support.size());
  if (k == 0) return b;
  Matrix xs(x.rows(), k);
  for (Eigen::Index a = 0; a < k; ++a) xs.col(a) = x.col(support[a]);
  Matrix gs = xs.transpose() * xs;
  gs.diagonal().array() += mu;
  Eigen::LLT<Matrix> llt(gs);
  if (!factor_ok(llt, gs)) {
    throw NotPositiveDefinite("restricted_ls: restricted gram is singular");
  }
  const Vector bs = llt.solve(xs.transpose() * y);
  for (Eigen::Index a = 0; a < k; ++a) b(support[a]) = bs(a);
  return b;
}

}  // namespace l0relax
