#pragma once

// Problem data for  min_b 1/2 ||X b - y||^2 + 1/2 mu ||b||^2 + lambda ||b||_0.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "l0relax/numerics.hpp"

namespace l0relax {

/// Immutable, validated problem data. X is n x p, y has n entries.
class ProblemInstance {
 public:
  /// Validates shapes, finiteness and lambda, mu >= 0. Positive definiteness
  /// of X^T X + mu I is checked by build_gram.
  ProblemInstance(Matrix x, Vector y, double lambda, double mu);

  [[nodiscard]] const Matrix& x() const { return x_; }
  [[nodiscard]] const Vector& y() const { return y_; }
  [[nodiscard]] double lambda() const { return lambda_; }
  [[nodiscard]] double mu() const { return mu_; }
  [[nodiscard]] Eigen::Index n() const { return x_.rows(); }
  [[nodiscard]] Eigen::Index p() const { return x_.cols(); }

  /// Same data with a different penalty pair.
  [[nodiscard]] ProblemInstance with_params(double lambda, double mu) const;

  /// Free-form string metadata carried through save/load.
  std::map<std::string, std::string> metadata;

 private:
  Matrix x_;
  Vector y_;
  double lambda_;
  double mu_;
};

/// Precomputed quadratic data. gram = X^T X + mu I, xty = X^T y.
struct GramCache {
  Matrix gram;
  Vector xty;
  double yty = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

/// Smallest eigenvalue below this is treated as singular.
inline constexpr double kPdTolerance = 1e-10;

/// Throws NotPositiveDefinite when lambda_min(X^T X + mu I) <= 1e-10.
[[nodiscard]] GramCache build_gram(const ProblemInstance& inst);

/// Indices with b_i != 0 exactly.
[[nodiscard]] std::vector<int> support_of(const Vector& b);

/// 1/2 ||X b - y||^2 + 1/2 mu ||b||^2 + lambda * #{i : b_i != 0}.
[[nodiscard]] double objective_l0(const ProblemInstance& inst, const Vector& b);

/// Smooth part 1/2 b^T G b - c^T b + 1/2 y^T y evaluated through the Gram cache.
[[nodiscard]] double smooth_loss(const GramCache& g, const Vector& b);

/// A feasible point of the l0 problem with its objective.
struct FitResult {
  Vector b;
  std::vector<int> support;
  double objective = 0.0;
  std::string method;
};

/// Builds a FitResult whose support and objective are computed from b.
[[nodiscard]] FitResult make_fit(const ProblemInstance& inst, Vector b, std::string method);

// ---------------------------------------------------------------------------
// Serialization

enum class InstanceFormat { kCsv, kJson };

/// Picks the format from the file extension (.csv or .json).
[[nodiscard]] InstanceFormat format_from_path(const std::filesystem::path& path);

/// CSV instances keep lambda, mu and metadata in "<stem>.meta.json" next to
/// the CSV file.
[[nodiscard]] std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

[[nodiscard]] ProblemInstance load_instance(const std::filesystem::path& path, InstanceFormat format);
[[nodiscard]] ProblemInstance load_instance(const std::filesystem::path& path);

void save_instance(const ProblemInstance& inst, const std::filesystem::path& path, InstanceFormat format);
void save_instance(const ProblemInstance& inst, const std::filesystem::path& path);

/// Shortest round-trip text for a double (17 significant digits).
[[nodiscard]] std::string format_double(double v);

}  // namespace l0relax
