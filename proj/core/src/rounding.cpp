#include "l0relax/rounding.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include "l0relax/error.hpp"
#include "l0relax/rng.hpp"

namespace l0relax {

CorrelationLift build_lift(const SdpPrimal& primal, double tol) {
  const auto p = primal.b.size();
  CorrelationLift lift;
  lift.z = Vector::Zero(p);
  lift.zmat = Matrix::Zero(p, p);
  // u_i = b_i / B_ii on active coordinates.
  Vector u = Vector::Zero(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double bii = primal.bmat(i, i);
    if (bii > tol) {
      u(i) = primal.b(i) / bii;
      lift.z(i) = primal.b(i) * u(i);
    }
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    if (u(i) == 0.0) continue;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (u(j) != 0.0) lift.zmat(i, j) = u(i) * primal.bmat(i, j) * u(j);
    }
  }
  // Keep the diagonal identity Z_ii = z_i exact.
  lift.zmat.diagonal() = lift.z;
  lift.zmat = 0.5 * (lift.zmat + lift.zmat.transpose());

  lift.t.resize(p + 1, p + 1);
  lift.t(0, 0) = 1.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    lift.t(0, j + 1) = lift.t(j + 1, 0) = 2.0 * lift.z(j) - 1.0;
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      lift.t(i + 1, j + 1) = 1.0 - 2.0 * lift.z(i) - 2.0 * lift.z(j) + 4.0 * lift.zmat(i, j);
    }
  }
  PsdFactor f = psd_factor(SymMatrix::from_trusted(lift.t), 1e-7);
  lift.u = std::move(f.u);
  lift.rank = f.rank;
  return lift;
}

RoundingResult gw_round(const ProblemInstance& inst, const CorrelationLift& lift, int samples,
                        std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("rounding needs at least one sample");
  const auto p = inst.p();
  if (lift.u.rows() != p + 1) throw DimensionError("lift does not match the instance");
  RoundingResult res;
  res.seed = seed;
  res.samples = samples;
  res.objective = std::numeric_limits<double>::infinity();
  res.sample_objectives.reserve(samples);
  res.sample_masks.reserve(samples);

  struct Cached {
    bool ok = false;
    double value = 0.0;
    Vector b;
  };
  std::map<std::string, Cached> cache;
  const auto r = lift.u.cols();
  Vector v(r);
  for (int k = 0; k < samples; ++k) {
    Rng rng = substream(seed, "gw", static_cast<std::uint64_t>(k));
    std::normal_distribution<double> normal;
    for (Eigen::Index j = 0; j < r; ++j) v(j) = normal(rng);
    const Vector proj = lift.u * v;
    const double flip = proj(0) >= 0.0 ? 1.0 : -1.0;
    std::string mask(static_cast<std::size_t>(p), '0');
    for (Eigen::Index j = 0; j < p; ++j) {
      const double t = proj(j + 1) >= 0.0 ? 1.0 : -1.0;  // sign(0) = +1
      if (flip * t > 0.0) mask[static_cast<std::size_t>(j)] = '1';
    }
    auto [it, fresh] = cache.try_emplace(mask);
    if (fresh) {
      std::vector<int> support;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (mask[static_cast<std::size_t>(j)] == '1') support.push_back(static_cast<int>(j));
      }
      try {
        it->second.b = restricted_ls(inst.x(), inst.y(), inst.mu(), support);
        it->second.value = objective_l0(inst, it->second.b);
        it->second.ok = true;
      } catch (const NotPositiveDefinite&) {
        it->second.ok = false;
      }
    }
    res.sample_masks.push_back(mask);
    if (!it->second.ok) {
      res.skipped.push_back(k);
      res.sample_objectives.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    res.sample_objectives.push_back(it->second.value);
    if (it->second.value < res.objective) {
      res.objective = it->second.value;
      res.best_sample = k;
      res.b = it->second.b;
    }
  }
  if (res.best_sample < 0) throw NumericalFailure("every rounding sample had a singular support");
  res.support = support_of(res.b);
  res.z = Vector::Zero(p);
  for (const int j : res.support) res.z(j) = 1.0;
  return res;
}

RoundingResult gw_round(const ProblemInstance& inst, const SdpPrimal& primal, int samples,
                        std::uint64_t seed) {
  return gw_round(inst, build_lift(primal), samples, seed);
}

void write_rounding_trace(const RoundingResult& r, std::ostream& out) {
  out << "k,support,objective\n";
  for (std::size_t k = 0; k < r.sample_masks.size(); ++k) {
    out << k << ',' << r.sample_masks[k] << ',';
    if (std::isnan(r.sample_objectives[k])) {
      out << "nan";
    } else {
      out << format_double(r.sample_objectives[k]);
    }
    out << '\n';
  }
}

}  // namespace l0relax
