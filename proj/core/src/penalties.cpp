#include "l0relax/penalties.hpp"

#include <cmath>
#include <string>

#include "l0relax/error.hpp"

namespace l0relax {

double mcp_value(double b, double delta, double lambda) {
  if (delta == 0.0 || b == 0.0) return 0.0;
  const double q = delta * b * b;
  if (q <= 2.0 * lambda) {
    return std::sqrt(2.0 * delta * lambda) * std::abs(b) - 0.5 * q;
  }
  return lambda;
}

double mcp_value_mcp_parameterization(double b, double gamma_tilde, double lambda_tilde) {
  return mcp_value(b, 1.0 / gamma_tilde, 0.5 * gamma_tilde * lambda_tilde * lambda_tilde);
}

double reverse_huber(double t) {
  const double a = std::abs(t);
  return a <= 1.0 ? a : 0.5 * (t * t + 1.0);
}

double pwg_penalty(double b, double mu, double lambda) {
  // 2 lambda B(t) with t^2 = mu b^2 / (2 lambda), expanded per branch so that
  // t is never formed and squared back.
  const double q = mu * b * b;
  if (q <= 2.0 * lambda) return std::sqrt(2.0 * mu * lambda) * std::abs(b);
  return lambda + 0.5 * mu * b * b;
}

double soft_threshold(double v, double weight) {
  if (v > weight) return v - weight;
  if (v < -weight) return v + weight;
  return 0.0;
}

double mcp_prox(double v, double step, double delta, double lambda) {
  if (step * delta >= 1.0) {
    throw StepTooLarge("mcp_prox: step * delta = " + std::to_string(step * delta) + " >= 1");
  }
  if (delta == 0.0 || lambda == 0.0) return v;
  const double a = std::sqrt(2.0 * delta * lambda);
  const double tau = std::sqrt(2.0 * lambda / delta);
  const double av = std::abs(v);
  if (av <= step * a) return 0.0;
  if (av > tau) return v;
  return std::copysign((av - step * a) / (1.0 - step * delta), v);
}

void validate(const PenaltySpec& spec) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, L1Penalty>) {
          if (!(p.weight >= 0.0)) throw ParseError("L1 weight must be nonnegative");
        } else if constexpr (std::is_same_v<T, McpPenalty>) {
          if (!(p.lambda >= 0.0)) throw ParseError("MCP lambda must be nonnegative");
          for (double d : p.delta) {
            if (!(d >= 0.0)) throw ParseError("MCP delta entries must be nonnegative");
          }
        } else if constexpr (std::is_same_v<T, ReverseHuberPenalty>) {
          if (!(p.mu > 0.0) || !(p.lambda > 0.0)) {
            throw ParseError("reverse Huber penalty needs mu > 0 and lambda > 0");
          }
        } else {
          if (!(p.lambda >= 0.0)) throw ParseError("indicator lambda must be nonnegative");
        }
      },
      spec);
}

double penalty_value(const PenaltySpec& spec, std::size_t i, double b) {
  return std::visit(
      [i, b](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, L1Penalty>) {
          return p.weight * std::abs(b);
        } else if constexpr (std::is_same_v<T, McpPenalty>) {
          return mcp_value(b, p.delta.at(i), p.lambda);
        } else if constexpr (std::is_same_v<T, ReverseHuberPenalty>) {
          return pwg_penalty(b, p.mu, p.lambda);
        } else {
          return b != 0.0 ? p.lambda : 0.0;
        }
      },
      spec);
}

}  // namespace l0relax
