#include "l0relax/perspective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "l0relax/detail/prox_gradient.hpp"
#include "l0relax/error.hpp"
#include "l0relax/penalties.hpp"

namespace l0relax {

PerspectiveParams delta_uniform(const GramCache& gram) {
  const auto p = gram.gram.rows();
  return {Vector::Constant(p, gram.lambda_min * (1.0 - 1e-8))};
}

PerspectiveParams delta_pwg(const ProblemInstance& inst) {
  if (inst.mu() == 0.0) {
    throw MuZero("the reverse Huber relaxation needs mu > 0");
  }
  return {Vector::Constant(inst.p(), inst.mu())};
}

bool check_admissible(const GramCache& gram, const Vector& delta) {
  if (delta.size() != gram.gram.rows()) {
    throw DimensionError("delta has " + std::to_string(delta.size()) + " entries, expected " +
                         std::to_string(gram.gram.rows()));
  }
  if ((delta.array() < 0.0).any() || !delta.allFinite()) return false;
  Matrix m = gram.gram;
  m.diagonal() -= delta;
  return min_eigenvalue(SymMatrix::from_trusted(std::move(m))) >=
         -kAdmissibleTolerance * (1.0 + gram.lambda_max);
}

double pr_objective(const GramCache& gram, const Vector& delta, double lambda, const Vector& b) {
  double v = smooth_loss(gram, b);
  for (Eigen::Index i = 0; i < b.size(); ++i) v += mcp_value(b(i), delta(i), lambda);
  return v;
}

namespace {

detail::ProxGradOptions options_from(const PrConfig& c) {
  detail::ProxGradOptions o;
  o.residual_tol = c.tol;
  o.rel_change_tol = c.rel_change_tol;
  o.max_iterations = c.max_iterations;
  return o;
}

PrSolution to_solution(detail::ProxGradOutcome&& r) {
  PrSolution s;
  s.b = std::move(r.b);
  s.value = r.value;
  s.residual = r.residual;
  s.iterations = r.iterations;
  s.converged = r.converged;
  return s;
}

}  // namespace

PrSolution solve_pr(const ProblemInstance& inst, const GramCache& gram,
                    const PerspectiveParams& params, const PrConfig& config) {
  const Vector& delta = params.delta;
  if (!check_admissible(gram, delta)) {
    throw NotAdmissible("delta is not admissible: G - diag(delta) is not PSD");
  }
  const double lambda = inst.lambda();
  // Keeps step * delta_i < 1 strictly, as mcp_prox requires.
  const double lip = std::max(gram.lambda_max, delta.maxCoeff()) * (1.0 + 1e-9) + 1e-12;
  auto value = [&](int i, double x) { return mcp_value(x, delta(i), lambda); };
  auto prox = [&](int i, double v, double step) { return mcp_prox(v, step, delta(i), lambda); };
  auto r = detail::minimize_composite(gram.gram, gram.xty, 0.5 * gram.yty, lip, value, prox,
                                      Vector::Zero(inst.p()), options_from(config));
  PrSolution s = to_solution(std::move(r));
  s.value = pr_objective(gram, delta, lambda, s.b);
  return s;
}

PrSolution solve_pr(const ProblemInstance& inst, const PerspectiveParams& params,
                    const PrConfig& config) {
  return solve_pr(inst, build_gram(inst), params, config);
}

PrSolution solve_pwg_direct(const ProblemInstance& inst, const PrConfig& config) {
  if (inst.mu() == 0.0) throw MuZero("the reverse Huber relaxation needs mu > 0");
  // Loss without the ridge term; the reverse Huber penalty carries mu b^2 / 2.
  const GramCache g = build_gram(inst);
  Matrix xtx = g.gram;
  xtx.diagonal().array() -= inst.mu();
  const double mu = inst.mu();
  const double lambda = inst.lambda();
  const double lip = g.lambda_max * (1.0 + 1e-9) + 1e-12;
  auto value = [&](int, double x) { return pwg_penalty(x, mu, lambda); };
  // prox of 2 lambda B(sqrt(mu / 2 lambda) x): soft threshold by step * sqrt(2 mu lambda)
  // inside the linear region, shrink by 1 / (1 + step mu) in the quadratic one.
  auto prox = [&](int, double v, double step) {
    const double a = std::sqrt(2.0 * mu * lambda);
    const double tau = lambda > 0.0 ? std::sqrt(2.0 * lambda / mu) : 0.0;
    const double av = std::abs(v);
    if (av <= step * a) return 0.0;
    if (av - step * a <= tau) return std::copysign(av - step * a, v);
    return v / (1.0 + step * mu);
  };
  auto r = detail::minimize_composite(xtx, g.xty, 0.5 * g.yty, lip, value, prox,
                                      Vector::Zero(inst.p()), options_from(config));
  return to_solution(std::move(r));
}

double lasso_equivalence_value(const ProblemInstance& inst, double big_m, const PrConfig& config) {
  if (!(big_m > 0.0)) throw ParseError("big-M must be positive");
  const GramCache g = build_gram(inst);
  const double w = inst.lambda() / big_m;
  auto value = [&](int, double x) { return w * std::abs(x); };
  auto prox = [&](int, double v, double step) { return soft_threshold(v, step * w); };
  const double lip = g.lambda_max * (1.0 + 1e-9) + 1e-12;
  auto r = detail::minimize_composite(g.gram, g.xty, 0.5 * g.yty, lip, value, prox,
                                      Vector::Zero(inst.p()), options_from(config));
  return r.value;
}

}  // namespace l0relax
