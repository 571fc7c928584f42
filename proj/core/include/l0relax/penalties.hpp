#pragma once

// Scalar penalties that arise as continuous relaxations of lambda * 1{b != 0}.

#include <variant>
#include <vector>

namespace l0relax {

/// Minimax concave penalty in perspective form:
///   sqrt(2 delta lambda) |b| - delta b^2 / 2   if delta b^2 <= 2 lambda,
///   lambda                                     otherwise.
/// Zero when delta = 0 or b = 0.
[[nodiscard]] double mcp_value(double b, double delta, double lambda);

/// The same penalty under the (gamma, lambda~) parameterization common in the
/// statistics literature: delta = 1/gamma, lambda = gamma lambda~^2 / 2.
[[nodiscard]] double mcp_value_mcp_parameterization(double b, double gamma_tilde,
                                                    double lambda_tilde);

/// Reverse Huber: |t| for |t| <= 1, (t^2 + 1)/2 otherwise.
[[nodiscard]] double reverse_huber(double t);

/// 2 lambda B(sqrt(mu / (2 lambda)) b); equals mcp_value(b, mu, lambda) + mu b^2 / 2.
[[nodiscard]] double pwg_penalty(double b, double mu, double lambda);

/// argmin_x (x - v)^2 / (2 step) + mcp_value(x, delta, lambda).
///
/// With a = sqrt(2 delta lambda) and tau = sqrt(2 lambda / delta) the map is
///   0                                    for |v| <= step * a,
///   sign(v) (|v| - step a) / (1 - step delta)   for step * a < |v| <= tau,
///   v                                    for |v| > tau.
/// Throws StepTooLarge when step * delta >= 1.
[[nodiscard]] double mcp_prox(double v, double step, double delta, double lambda);

/// Soft thresholding, the proximal map of weight * |x|.
[[nodiscard]] double soft_threshold(double v, double weight);

struct L1Penalty {
  double weight = 0.0;
};
struct McpPenalty {
  std::vector<double> delta;
  double lambda = 0.0;
};
struct ReverseHuberPenalty {
  double mu = 0.0;
  double lambda = 0.0;
};
struct IndicatorPenalty {
  double lambda = 0.0;
};

/// Tagged penalty description; validate() enforces the per-kind invariants.
using PenaltySpec = std::variant<L1Penalty, McpPenalty, ReverseHuberPenalty, IndicatorPenalty>;

void validate(const PenaltySpec& spec);

/// Penalty of coordinate i at value b.
[[nodiscard]] double penalty_value(const PenaltySpec& spec, std::size_t i, double b);

}  // namespace l0relax
