#include "l0relax/instance.hpp"

#include <cmath>
#include <string>

#include "l0relax/error.hpp"

namespace l0relax {

ProblemInstance::ProblemInstance(Matrix x, Vector y, double lambda, double mu)
    : x_(std::move(x)), y_(std::move(y)), lambda_(lambda), mu_(mu) {
  if (x_.rows() < 1 || x_.cols() < 1) {
    throw DimensionError("instance needs n >= 1 and p >= 1");
  }
  if (y_.size() != x_.rows()) {
    throw DimensionError("y has " + std::to_string(y_.size()) + " entries but X has " +
                         std::to_string(x_.rows()) + " rows");
  }
  if (!x_.allFinite() || !y_.allFinite()) {
    throw ParseError("instance data contains non-finite values");
  }
  if (!std::isfinite(lambda_) || lambda_ < 0.0) {
    throw ParseError("lambda must be finite and nonnegative");
  }
  if (!std::isfinite(mu_) || mu_ < 0.0) {
    throw ParseError("mu must be finite and nonnegative");
  }
}

ProblemInstance ProblemInstance::with_params(double lambda, double mu) const {
  ProblemInstance out(x_, y_, lambda, mu);
  out.metadata = metadata;
  return out;
}

GramCache build_gram(const ProblemInstance& inst) {
  GramCache g;
  g.gram = inst.x().transpose() * inst.x();
  g.gram.diagonal().array() += inst.mu();
  g.gram = 0.5 * (g.gram + g.gram.transpose()).eval();
  g.xty = inst.x().transpose() * inst.y();
  g.yty = inst.y().squaredNorm();
  const auto sym = SymMatrix::from_trusted(g.gram);
  g.lambda_min = min_eigenvalue(sym);
  g.lambda_max = max_eigenvalue(sym);
  if (g.lambda_min <= kPdTolerance) {
    throw NotPositiveDefinite("X^T X + mu I is not positive definite (lambda_min = " +
                              std::to_string(g.lambda_min) + "); increase mu");
  }
  return g;
}

std::vector<int> support_of(const Vector& b) {
  std::vector<int> s;
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    if (b(i) != 0.0) s.push_back(static_cast<int>(i));
  }
  return s;
}

double objective_l0(const ProblemInstance& inst, const Vector& b) {
  if (b.size() != inst.p()) {
    throw DimensionError("coefficient vector has " + std::to_string(b.size()) +
                         " entries, expected " + std::to_string(inst.p()));
  }
  const double loss = 0.5 * (inst.x() * b - inst.y()).squaredNorm();
  const double ridge = 0.5 * inst.mu() * b.squaredNorm();
  return loss + ridge + inst.lambda() * static_cast<double>(support_of(b).size());
}

double smooth_loss(const GramCache& g, const Vector& b) {
  return 0.5 * b.dot(g.gram * b) - g.xty.dot(b) + 0.5 * g.yty;
}

FitResult make_fit(const ProblemInstance& inst, Vector b, std::string method) {
  FitResult f;
  f.objective = objective_l0(inst, b);
  f.support = support_of(b);
  f.b = std::move(b);
  f.method = std::move(method);
  return f;
}

}  // namespace l0relax
