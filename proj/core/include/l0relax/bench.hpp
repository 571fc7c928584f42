#pragma once

// Simulated experiments: data generation, relaxation gap tables, rounding
// quality and lambda paths.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "l0relax/instance.hpp"
#include "l0relax/sdp.hpp"

namespace l0relax {

/// How the noise level is read: as a variance (sd = sqrt(level)) or as the
/// standard deviation itself.
enum class NoiseConvention { kVariance, kSd };

[[nodiscard]] double noise_sd_for(double level, NoiseConvention convention);
[[nodiscard]] std::string to_string(NoiseConvention c);
[[nodiscard]] NoiseConvention noise_convention_from(const std::string& s);

struct SimSpec {
  int n = 100;
  int p = 60;
  int k = 10;
  double noise_sd = 2.23606797749979;  // sqrt(5)
  std::uint64_t seed = 1;
  int count = 10;
};

void validate(const SimSpec& spec);

struct Simulated {
  Matrix x;
  Vector y;
  Vector b_true;
};

/// X_ij ~ N(0, 1) / sqrt(n); the first k true coefficients are uniform on
/// [-1, -0.5] U [0.5, 1], the rest zero; y = X b_true + noise_sd * N(0, 1).
/// Depends only on (spec.seed, index), so every (lambda, mu) cell shares data.
[[nodiscard]] Simulated simulate(const SimSpec& spec, int index);
[[nodiscard]] ProblemInstance generate_instance(const SimSpec& spec, double lambda, double mu,
                                                int index);

struct GapBudgets {
  long bnb_nodes = 100000;
  double bnb_seconds = 10.0;
  int samples = 1000;           ///< rounding samples per instance
  std::uint64_t round_seed = 7;
  int workers = 1;
  SdpConfig sdp;
};

struct InstanceRecord {
  double lambda = 0.0;
  double mu = 0.0;
  int index = 0;
  bool ok = false;
  std::string error;
  double tau_sdp = 0.0;
  double tau_pwg = 0.0;
  double tau_bnb_lb = 0.0;
  double tau_bnb_ub = 0.0;
  double tau_gw = 0.0;
  double tau_ub = 0.0;
  double sdp_gap = 0.0;  ///< percent
  double pwg_gap = 0.0;
  double bnb_gap = 0.0;
  long nodes = 0;
  bool bnb_optimal = false;
  int sdp_iterations = 0;
  int sdp_rank = 0;
  double sdp_seconds = 0.0;
  double bnb_seconds = 0.0;
  double gw_seconds = 0.0;
};

struct GapCell {
  double lambda = 0.0;
  double mu = 0.0;
  int instances = 0;
  int failures = 0;
  double sdp_gap = 0.0;  ///< mean percent over successful instances
  double pwg_gap = 0.0;
  double bnb_gap = 0.0;
  double nodes = 0.0;
  double sdp_seconds = 0.0;
  double bnb_seconds = 0.0;
};

struct GapReport {
  SimSpec spec;
  GapBudgets budgets;
  std::vector<GapCell> cells;          ///< lambda-major
  std::vector<InstanceRecord> records; ///< cell order, then index
};

/// Every instance gets an SDP bound, a reverse Huber (delta = mu) bound,
/// hyperplane rounding and a branch-and-bound seeded with the rounded
/// support; tau_UB is the better of the two feasible values.
[[nodiscard]] GapReport gap_table(const SimSpec& spec, const std::vector<double>& lambda_grid,
                                  const std::vector<double>& mu_grid, const GapBudgets& budgets);

/// Cell means. Wall-clock columns are left out so the file depends only on
/// the configuration.
void write_gap_csv(const GapReport& r, std::ostream& out);
void write_gap_records_csv(const GapReport& r, std::ostream& out);
/// Wall-clock times per instance.
void write_gap_timings_csv(const GapReport& r, std::ostream& out);

struct RoundingCell {
  double lambda = 0.0;
  double mu = 0.0;
  int instances = 0;
  int failures = 0;
  int exact_matches = 0;   ///< tau_GW == tau_UB to 1e-9 relative
  double mean_gap = 0.0;   ///< mean (tau_GW - tau_UB) / tau_UB, percent
  double max_gap = 0.0;
};

struct RoundingReport {
  SimSpec spec;
  int samples = 0;
  std::uint64_t seed = 0;
  bool brute_force_reference = false;
  std::vector<RoundingCell> cells;
};

/// tau_UB from brute force when p <= 20, otherwise from branch-and-bound
/// under `budgets`.
[[nodiscard]] RoundingReport rounding_quality_table(const SimSpec& spec,
                                                    const std::vector<double>& lambda_grid,
                                                    const std::vector<double>& mu_grid,
                                                    const GapBudgets& budgets);
void write_rounding_csv(const RoundingReport& r, std::ostream& out);

struct PathPoint {
  double lambda = 0.0;
  double zeta_sdp = 0.0;
  double nu_gw = 0.0;
  std::vector<int> support;
  bool converged = false;
  int iterations = 0;
};

struct LambdaPath {
  double lambda_max = 0.0;
  std::vector<PathPoint> points;  ///< ascending lambda
  bool monotone = true;           ///< zeta_SDP nondecreasing to 1e-7 relative
};

/// Geometric grid from 1e-3 lambda_max to lambda_max; each SDP is warm
/// started from the previous grid point.
[[nodiscard]] LambdaPath lambda_path(const ProblemInstance& inst, int grid_size, int samples,
                                     std::uint64_t seed, const SdpConfig& config = {});
void write_path_csv(const LambdaPath& path, std::ostream& out);

/// Run manifest: spec, grids, budgets, library version.
[[nodiscard]] std::string manifest_json(const SimSpec& spec, const std::vector<double>& lambda_grid,
                                        const std::vector<double>& mu_grid,
                                        const GapBudgets& budgets, const std::string& kind);

[[nodiscard]] std::string version_string();

}  // namespace l0relax
