#pragma once

// Accelerated proximal gradient for
//   F(b) = 1/2 b^T G b - c^T b + k + sum_i h_i(b_i)
// with a separable h whose proximal map is available in closed form.

#include <cmath>
#include <limits>

#include "l0relax/numerics.hpp"

namespace l0relax::detail {

struct ProxGradOptions {
  double residual_tol = 1e-8;    ///< on ||gradient mapping||, scaled by (1 + ||c||)
  double rel_change_tol = 1e-10;
  int max_iterations = 50000;
  bool accelerate = true;
};

struct ProxGradOutcome {
  Vector b;
  double value = 0.0;
  double residual = 0.0;  ///< ||L (y - prox(y - grad/L))|| at the last step
  int iterations = 0;
  bool converged = false;
};

/// `value(i, x)` returns h_i(x); `prox(i, v, step)` returns
/// argmin_x (x - v)^2 / (2 step) + h_i(x). `lipschitz` must bound
/// lambda_max(G).
template <class Value, class Prox>
ProxGradOutcome minimize_composite(const Matrix& g, const Vector& c, double constant,
                                   double lipschitz, Value&& value, Prox&& prox, Vector start,
                                   const ProxGradOptions& opt) {
  const Eigen::Index p = c.size();
  const double step = 1.0 / lipschitz;
  const double scale = 1.0 + c.norm();

  auto objective = [&](const Vector& b) {
    double f = 0.5 * b.dot(g * b) - c.dot(b) + constant;
    for (Eigen::Index i = 0; i < p; ++i) f += value(static_cast<int>(i), b(i));
    return f;
  };
  auto prox_step = [&](const Vector& from, Vector& to) {
    const Vector v = from - step * (g * from - c);
    for (Eigen::Index i = 0; i < p; ++i) to(i) = prox(static_cast<int>(i), v(i), step);
  };

  ProxGradOutcome out;
  Vector x = std::move(start);
  Vector y = x;
  Vector x_new(p);
  double f_x = objective(x);
  double t = 1.0;
  out.b = x;
  out.value = f_x;

  for (int k = 1; k <= opt.max_iterations; ++k) {
    prox_step(y, x_new);
    double f_new = objective(x_new);
    if (f_new > f_x && opt.accelerate && y != x) {
      // Function-value restart: drop momentum and take a plain step from x.
      t = 1.0;
      y = x;
      prox_step(y, x_new);
      f_new = objective(x_new);
    }
    out.residual = lipschitz * (y - x_new).norm();
    out.iterations = k;
    const double change = std::abs(f_x - f_new);
    if (f_new < out.value) {
      out.value = f_new;
      out.b = x_new;
    }
    if (opt.accelerate) {
      const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = x_new + ((t - 1.0) / t_new) * (x_new - x);
      t = t_new;
    } else {
      y = x_new;
    }
    x.swap(x_new);
    f_x = f_new;
    if (out.residual <= opt.residual_tol * scale &&
        change <= opt.rel_change_tol * (1.0 + std::abs(f_new))) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace l0relax::detail
