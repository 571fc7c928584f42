#pragma once

// Randomized hyperplane rounding of the SDP relaxation into feasible supports.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "l0relax/instance.hpp"
#include "l0relax/sdp.hpp"

namespace l0relax {

/// z_i = b_i^2 / B_ii, Z_ij = B_ij b_i b_j / (B_ii B_jj) on coordinates with
/// B_ii > tol (zero elsewhere), and the +-1 correlation matrix
/// T = P [1 z^T; z Z] P^T with P = [1 0; -e 2I], factored as T = U U^T.
struct CorrelationLift {
  Vector z;
  Matrix zmat;
  Matrix t;
  Matrix u;
  int rank = 0;
};

inline constexpr double kLiftTolerance = 1e-6;

/// Throws NotPsd when T has an eigenvalue below -1e-7.
[[nodiscard]] CorrelationLift build_lift(const SdpPrimal& primal, double tol = kLiftTolerance);

struct RoundingResult {
  std::vector<int> support;
  Vector z;                              ///< 0/1 indicator of `support`
  Vector b;                              ///< restricted least squares on `support`
  double objective = 0.0;                ///< objective_l0 at b
  int samples = 0;
  int best_sample = -1;                  ///< first sample attaining the minimum
  std::vector<double> sample_objectives; ///< NaN for skipped samples
  std::vector<std::string> sample_masks; ///< '0'/'1' per coordinate
  std::vector<int> skipped;              ///< samples whose support was singular
  std::uint64_t seed = 0;
};

/// Draws `samples` hyperplanes; sample k uses stream ("gw", k) under `seed`.
/// Throws std::invalid_argument when samples < 1 and NumericalFailure when
/// every sample is singular.
[[nodiscard]] RoundingResult gw_round(const ProblemInstance& inst, const CorrelationLift& lift,
                                      int samples, std::uint64_t seed);
[[nodiscard]] RoundingResult gw_round(const ProblemInstance& inst, const SdpPrimal& primal,
                                      int samples, std::uint64_t seed);

/// One row per sample: k, support mask, objective.
void write_rounding_trace(const RoundingResult& r, std::ostream& out);

}  // namespace l0relax
