#include "l0relax/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "l0relax/error.hpp"
#include "l0relax/exact.hpp"
#include "l0relax/perspective.hpp"
#include "l0relax/rng.hpp"
#include "l0relax/rounding.hpp"

#ifndef L0RELAX_VERSION
#define L0RELAX_VERSION "unknown"
#endif

namespace l0relax {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs job(i) for i in [0, count) on `workers` threads. Results are written
// by index, so the outcome does not depend on scheduling.
void parallel_for(int count, int workers, const std::function<void(int)>& job) {
  workers = std::clamp(workers, 1, std::max(count, 1));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) job(i);
    });
  }
  for (auto& t : pool) t.join();
}

double gap_pct(double ub, double bound) { return (ub - bound) / ub * 100.0; }

std::uint64_t cell_seed(std::uint64_t root, int index) {
  // Same rounding stream for an instance in every cell.
  return substream(root, "round", static_cast<std::uint64_t>(index))();
}

void evaluate(const SimSpec& spec, const GapBudgets& budgets, InstanceRecord& rec) {
  const ProblemInstance inst = generate_instance(spec, rec.lambda, rec.mu, rec.index);
  const GramCache g = build_gram(inst);

  auto t0 = std::chrono::steady_clock::now();
  const SdpSolution sdp = solve_sdp(build_sdp(inst, g), budgets.sdp);
  rec.sdp_seconds = seconds_since(t0);
  rec.sdp_iterations = sdp.stats.iterations;
  rec.sdp_rank = sdp.primal.rank;
  if (!sdp.stats.converged) throw NumericalFailure("SDP did not converge: " + sdp.stats.status);
  rec.tau_sdp = sdp.dual.value;

  rec.tau_pwg = solve_pr(inst, g, delta_pwg(inst)).value;

  t0 = std::chrono::steady_clock::now();
  const RoundingResult gw =
      gw_round(inst, sdp.primal, budgets.samples, cell_seed(budgets.round_seed, rec.index));
  rec.gw_seconds = seconds_since(t0);
  rec.tau_gw = gw.objective;

  BnbConfig bc;
  bc.max_nodes = budgets.bnb_nodes;
  bc.max_seconds = budgets.bnb_seconds;
  bc.initial_incumbent = make_fit(inst, gw.b, "rounding");
  const BnbResult bnb = solve_big_m(inst, bc);
  rec.bnb_seconds = bnb.seconds;
  rec.nodes = bnb.nodes;
  rec.bnb_optimal = bnb.optimal;
  rec.tau_bnb_lb = bnb.lower_bound;
  rec.tau_bnb_ub = bnb.incumbent.objective;
  rec.tau_ub = std::min(rec.tau_bnb_ub, rec.tau_gw);

  rec.sdp_gap = gap_pct(rec.tau_ub, rec.tau_sdp);
  rec.pwg_gap = gap_pct(rec.tau_ub, rec.tau_pwg);
  rec.bnb_gap = gap_pct(rec.tau_ub, rec.tau_bnb_lb);
  rec.ok = true;
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

double noise_sd_for(double level, NoiseConvention convention) {
  if (level < 0.0) throw std::invalid_argument("noise level must be nonnegative");
  return convention == NoiseConvention::kVariance ? std::sqrt(level) : level;
}

std::string to_string(NoiseConvention c) {
  return c == NoiseConvention::kVariance ? "variance" : "sd";
}

NoiseConvention noise_convention_from(const std::string& s) {
  if (s == "variance") return NoiseConvention::kVariance;
  if (s == "sd") return NoiseConvention::kSd;
  throw UsageError("noise convention must be 'variance' or 'sd', got '" + s + "'");
}

void validate(const SimSpec& spec) {
  if (spec.n < 1 || spec.p < 1) throw DimensionError("n and p must be positive");
  if (spec.k < 1 || spec.k > spec.p) throw DimensionError("need 1 <= k <= p");
  if (!(spec.noise_sd >= 0.0) || !std::isfinite(spec.noise_sd)) {
    throw std::invalid_argument("noise_sd must be finite and nonnegative");
  }
  if (spec.count < 1) throw std::invalid_argument("count must be positive");
}

Simulated simulate(const SimSpec& spec, int index) {
  validate(spec);
  Rng rng = substream(spec.seed, "instance", static_cast<std::uint64_t>(index));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> magnitude(0.5, 1.0);
  std::bernoulli_distribution coin(0.5);
  Simulated s;
  s.x.resize(spec.n, spec.p);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.n));
  // Row-major fill so the draw order is fixed.
  for (int i = 0; i < spec.n; ++i) {
    for (int j = 0; j < spec.p; ++j) s.x(i, j) = normal(rng) * scale;
  }
  s.b_true = Vector::Zero(spec.p);
  for (int j = 0; j < spec.k; ++j) {
    const double m = magnitude(rng);
    s.b_true(j) = coin(rng) ? m : -m;
  }
  s.y = s.x * s.b_true;
  for (int i = 0; i < spec.n; ++i) s.y(i) += spec.noise_sd * normal(rng);
  return s;
}

ProblemInstance generate_instance(const SimSpec& spec, double lambda, double mu, int index) {
  Simulated s = simulate(spec, index);
  ProblemInstance inst(std::move(s.x), std::move(s.y), lambda, mu);
  inst.metadata["generator"] = "simulated";
  inst.metadata["seed"] = std::to_string(spec.seed);
  inst.metadata["index"] = std::to_string(index);
  inst.metadata["k"] = std::to_string(spec.k);
  inst.metadata["noise_sd"] = fmt(spec.noise_sd);
  return inst;
}

GapReport gap_table(const SimSpec& spec, const std::vector<double>& lambda_grid,
                    const std::vector<double>& mu_grid, const GapBudgets& budgets) {
  validate(spec);
  GapReport rep;
  rep.spec = spec;
  rep.budgets = budgets;
  for (const double lam : lambda_grid) {
    for (const double mu : mu_grid) {
      for (int i = 0; i < spec.count; ++i) {
        InstanceRecord r;
        r.lambda = lam;
        r.mu = mu;
        r.index = i;
        rep.records.push_back(r);
      }
    }
  }
  parallel_for(static_cast<int>(rep.records.size()), budgets.workers, [&](int j) {
    InstanceRecord& r = rep.records[static_cast<std::size_t>(j)];
    try {
      evaluate(spec, budgets, r);
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
  });
  // Fixed-order reduction.
  std::size_t j = 0;
  for (const double lam : lambda_grid) {
    for (const double mu : mu_grid) {
      GapCell c;
      c.lambda = lam;
      c.mu = mu;
      for (int i = 0; i < spec.count; ++i, ++j) {
        const InstanceRecord& r = rep.records[j];
        if (!r.ok) {
          ++c.failures;
          continue;
        }
        ++c.instances;
        c.sdp_gap += r.sdp_gap;
        c.pwg_gap += r.pwg_gap;
        c.bnb_gap += r.bnb_gap;
        c.nodes += static_cast<double>(r.nodes);
        c.sdp_seconds += r.sdp_seconds;
        c.bnb_seconds += r.bnb_seconds;
      }
      if (c.instances > 0) {
        const double k = c.instances;
        c.sdp_gap /= k;
        c.pwg_gap /= k;
        c.bnb_gap /= k;
        c.nodes /= k;
        c.sdp_seconds /= k;
        c.bnb_seconds /= k;
      }
      rep.cells.push_back(c);
    }
  }
  return rep;
}

void write_gap_csv(const GapReport& r, std::ostream& out) {
  out << "lambda,mu,instances,failures,sdp_gap_pct,pwg_gap_pct,bnb_gap_pct,bnb_nodes\n";
  for (const auto& c : r.cells) {
    out << fmt(c.lambda) << ',' << fmt(c.mu) << ',' << c.instances << ',' << c.failures << ','
        << fmt(c.sdp_gap) << ',' << fmt(c.pwg_gap) << ',' << fmt(c.bnb_gap) << ','
        << fmt(c.nodes) << '\n';
  }
}

void write_gap_records_csv(const GapReport& r, std::ostream& out) {
  out << "lambda,mu,index,ok,tau_sdp,tau_pwg,tau_gw,tau_bnb_ub,tau_bnb_lb,tau_ub,"
         "sdp_gap_pct,pwg_gap_pct,bnb_gap_pct,nodes,bnb_optimal,sdp_iterations,sdp_rank,error\n";
  for (const auto& x : r.records) {
    std::string err = x.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << fmt(x.lambda) << ',' << fmt(x.mu) << ',' << x.index << ',' << (x.ok ? 1 : 0) << ','
        << fmt(x.tau_sdp) << ',' << fmt(x.tau_pwg) << ',' << fmt(x.tau_gw) << ','
        << fmt(x.tau_bnb_ub) << ',' << fmt(x.tau_bnb_lb) << ',' << fmt(x.tau_ub) << ','
        << fmt(x.sdp_gap) << ',' << fmt(x.pwg_gap) << ',' << fmt(x.bnb_gap) << ',' << x.nodes
        << ',' << (x.bnb_optimal ? 1 : 0) << ',' << x.sdp_iterations << ',' << x.sdp_rank << ','
        << err << '\n';
  }
}

void write_gap_timings_csv(const GapReport& r, std::ostream& out) {
  out << "lambda,mu,index,sdp_seconds,gw_seconds,bnb_seconds\n";
  for (const auto& x : r.records) {
    out << fmt(x.lambda) << ',' << fmt(x.mu) << ',' << x.index << ',' << fmt(x.sdp_seconds)
        << ',' << fmt(x.gw_seconds) << ',' << fmt(x.bnb_seconds) << '\n';
  }
}

RoundingReport rounding_quality_table(const SimSpec& spec, const std::vector<double>& lambda_grid,
                                      const std::vector<double>& mu_grid,
                                      const GapBudgets& budgets) {
  validate(spec);
  RoundingReport rep;
  rep.spec = spec;
  rep.samples = budgets.samples;
  rep.seed = budgets.round_seed;
  rep.brute_force_reference = spec.p <= kBruteForceMaxP;
  for (const double lam : lambda_grid) {
    for (const double mu : mu_grid) {
      std::vector<double> gaps(static_cast<std::size_t>(spec.count), 0.0);
      std::vector<char> ok(static_cast<std::size_t>(spec.count), 0);
      parallel_for(spec.count, budgets.workers, [&](int i) {
        try {
          const ProblemInstance inst = generate_instance(spec, lam, mu, i);
          const SdpSolution sdp = solve_sdp(build_sdp(inst), budgets.sdp);
          const RoundingResult gw =
              gw_round(inst, sdp.primal, budgets.samples, cell_seed(budgets.round_seed, i));
          double ub = 0.0;
          if (rep.brute_force_reference) {
            ub = brute_force(inst).objective;
          } else {
            BnbConfig bc;
            bc.max_nodes = budgets.bnb_nodes;
            bc.max_seconds = budgets.bnb_seconds;
            bc.initial_incumbent = make_fit(inst, gw.b, "rounding");
            ub = solve_big_m(inst, bc).incumbent.objective;
          }
          ub = std::min(ub, gw.objective);
          gaps[static_cast<std::size_t>(i)] = (gw.objective - ub) / ub * 100.0;
          ok[static_cast<std::size_t>(i)] = 1;
        } catch (const std::exception&) {
          ok[static_cast<std::size_t>(i)] = 0;
        }
      });
      RoundingCell c;
      c.lambda = lam;
      c.mu = mu;
      for (int i = 0; i < spec.count; ++i) {
        if (!ok[static_cast<std::size_t>(i)]) {
          ++c.failures;
          continue;
        }
        const double gp = gaps[static_cast<std::size_t>(i)];
        ++c.instances;
        c.mean_gap += gp;
        c.max_gap = std::max(c.max_gap, gp);
        if (gp <= 1e-7) ++c.exact_matches;  // percent, i.e. 1e-9 relative
      }
      if (c.instances > 0) c.mean_gap /= c.instances;
      rep.cells.push_back(c);
    }
  }
  return rep;
}

void write_rounding_csv(const RoundingReport& r, std::ostream& out) {
  out << "lambda,mu,instances,failures,exact_matches,mean_gw_gap_pct,max_gw_gap_pct\n";
  for (const auto& c : r.cells) {
    out << fmt(c.lambda) << ',' << fmt(c.mu) << ',' << c.instances << ',' << c.failures << ','
        << c.exact_matches << ',' << fmt(c.mean_gap) << ',' << fmt(c.max_gap) << '\n';
  }
}

LambdaPath lambda_path(const ProblemInstance& inst, int grid_size, int samples,
                       std::uint64_t seed, const SdpConfig& config) {
  if (grid_size < 2) throw std::invalid_argument("lambda path needs at least two grid points");
  LambdaPath path;
  path.lambda_max = lambda_max(inst, config);
  if (path.lambda_max == 0.0) {
    // b = 0 is optimal for every lambda > 0.
    PathPoint pt;
    pt.zeta_sdp = 0.5 * inst.y().squaredNorm();
    pt.nu_gw = pt.zeta_sdp;
    pt.converged = true;
    path.points.push_back(pt);
    return path;
  }
  const double lo = 1e-3 * path.lambda_max;
  const double ratio = std::pow(path.lambda_max / lo, 1.0 / (grid_size - 1));
  const GramCache g = build_gram(inst);
  SdpSolution prev;
  bool have_prev = false;
  for (int k = 0; k < grid_size; ++k) {
    const double lam = k == grid_size - 1 ? path.lambda_max : lo * std::pow(ratio, k);
    const ProblemInstance at = inst.with_params(lam, inst.mu());
    const SdpProblem sp = build_sdp(at, g);
    SdpSolution sol = solve_sdp(sp, config, have_prev ? &prev : nullptr);
    if (!sol.stats.converged && have_prev) sol = solve_sdp(sp, config);
    PathPoint pt;
    pt.lambda = lam;
    pt.zeta_sdp = sol.dual.value;
    pt.converged = sol.stats.converged;
    pt.iterations = sol.stats.iterations;
    const RoundingResult gw = gw_round(at, sol.primal, samples, seed);
    pt.nu_gw = gw.objective;
    pt.support = gw.support;
    if (!path.points.empty()) {
      const double before = path.points.back().zeta_sdp;
      if (pt.zeta_sdp < before - 1e-7 * (1.0 + std::abs(before))) path.monotone = false;
    }
    path.points.push_back(std::move(pt));
    prev = std::move(sol);
    have_prev = true;
  }
  return path;
}

void write_path_csv(const LambdaPath& path, std::ostream& out) {
  out << "lambda,zeta_sdp,nu_gw,support_size,support,converged,iterations\n";
  for (const auto& pt : path.points) {
    out << fmt(pt.lambda) << ',' << fmt(pt.zeta_sdp) << ',' << fmt(pt.nu_gw) << ','
        << pt.support.size() << ',';
    for (std::size_t i = 0; i < pt.support.size(); ++i) {
      out << (i ? " " : "") << pt.support[i];
    }
    out << ',' << (pt.converged ? 1 : 0) << ',' << pt.iterations << '\n';
  }
}

std::string manifest_json(const SimSpec& spec, const std::vector<double>& lambda_grid,
                          const std::vector<double>& mu_grid, const GapBudgets& budgets,
                          const std::string& kind) {
  nlohmann::ordered_json j;
  j["kind"] = kind;
  j["version"] = version_string();
  j["spec"] = {{"n", spec.n},         {"p", spec.p},         {"k", spec.k},
               {"noise_sd", spec.noise_sd}, {"seed", spec.seed}, {"count", spec.count}};
  j["lambda_grid"] = lambda_grid;
  j["mu_grid"] = mu_grid;
  j["budgets"] = {{"bnb_nodes", budgets.bnb_nodes},
                  {"bnb_seconds", std::isfinite(budgets.bnb_seconds)
                                      ? nlohmann::ordered_json(budgets.bnb_seconds)
                                      : nlohmann::ordered_json(nullptr)},
                  {"samples", budgets.samples},
                  {"round_seed", budgets.round_seed},
                  {"sdp_gap_tol", budgets.sdp.gap_tol},
                  {"sdp_feas_tol", budgets.sdp.feas_tol},
                  {"sdp_max_iterations", budgets.sdp.max_iterations}};
  return j.dump(2);
}

std::string version_string() { return L0RELAX_VERSION; }

}  // namespace l0relax
