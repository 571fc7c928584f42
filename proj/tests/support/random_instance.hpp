#pragma once

#include <random>

#include "l0relax/instance.hpp"

namespace l0relax::fixtures {

// Gaussian design with a few nonzero coefficients; columns scaled by 1/sqrt(n).
inline ProblemInstance random_instance(int n, int p, double lambda, double mu, unsigned seed,
                                       int k = 3, double noise = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix x(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = normal(rng) / std::sqrt(static_cast<double>(n));
  }
  Vector b = Vector::Zero(p);
  for (int j = 0; j < std::min(k, p); ++j) b(j) = (j % 2 ? -1.0 : 1.0) * (1.0 + 0.5 * j);
  Vector y = x * b;
  for (int i = 0; i < n; ++i) y(i) += noise * normal(rng);
  return ProblemInstance(std::move(x), std::move(y), lambda, mu);
}

// X with orthonormal columns (X^T X = I) from a QR factorization.
inline ProblemInstance orthonormal_instance(int n, int p, double lambda, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix a(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) a(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(n, p);
  Vector y(n);
  for (int i = 0; i < n; ++i) y(i) = 2.0 * normal(rng);
  return ProblemInstance(std::move(q), std::move(y), lambda, 0.0);
}

}  // namespace l0relax::fixtures
