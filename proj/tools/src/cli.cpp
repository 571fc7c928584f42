#include "l0relax_cli/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "l0relax/bench.hpp"
#include "l0relax/error.hpp"
#include "l0relax/exact.hpp"
#include "l0relax/perspective.hpp"
#include "l0relax/rounding.hpp"
#include "l0relax/sdp.hpp"

namespace l0relax::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct Common {
  std::string instance;
  std::optional<double> lambda;
  std::optional<double> mu;
  std::uint64_t seed = 1;
  std::optional<double> tol;
  std::string out_dir;
  // Simulated input.
  std::optional<int> n;
  std::optional<int> p;
  int k = 0;
  int index = 0;
  double noise = 5.0;
  std::string noise_convention = "variance";
};

struct Options {
  Common common;
  std::string delta_mode = "sdp-optimal";
  std::string delta_file;
  int samples = 1000;
  std::string method = "auto";
  std::optional<long> budget_nodes;
  std::optional<double> budget_secs;
  std::string trace_file;
  std::string export_sdp;
  int grid = 20;
  std::string preset = "paper-desk";
  std::string table = "gap";
  std::optional<int> workers;
  std::optional<int> count;
  bool samples_set = false;
};

Json vec(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

void add_common(CLI::App* app, Common& c) {
  app->add_option("--instance", c.instance, "Instance file (.csv with .meta.json sidecar, or .json)");
  app->add_option("--lambda", c.lambda, "l0 weight (overrides the file)")->check(CLI::NonNegativeNumber);
  app->add_option("--mu", c.mu, "ridge weight (overrides the file)")->check(CLI::NonNegativeNumber);
  app->add_option("--seed", c.seed, "root seed");
  app->add_option("--tol", c.tol, "solver tolerance")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out_dir, "directory for result files");
  app->add_option("--n", c.n, "simulate: rows")->check(CLI::PositiveNumber);
  app->add_option("--p", c.p, "simulate: columns")->check(CLI::PositiveNumber);
  app->add_option("--k", c.k, "simulate: true sparsity (default min(p, 10))");
  app->add_option("--index", c.index, "simulate: instance index")->check(CLI::NonNegativeNumber);
  app->add_option("--noise", c.noise, "simulate: noise level")->check(CLI::NonNegativeNumber);
  app->add_option("--noise-convention", c.noise_convention, "noise level is a variance or an sd")
      ->check(CLI::IsMember({"variance", "sd"}));
}

ProblemInstance load_input(const Common& c) {
  const bool simulated = c.n.has_value() || c.p.has_value();
  if (simulated == !c.instance.empty()) {
    throw UsageError("give exactly one input: --instance FILE or --n/--p for a simulated instance");
  }
  if (!simulated) {
    if (!fs::exists(c.instance)) throw UsageError("instance file not found: " + c.instance);
    ProblemInstance inst = load_instance(c.instance);
    return inst.with_params(c.lambda.value_or(inst.lambda()), c.mu.value_or(inst.mu()));
  }
  if (!c.n || !c.p) throw UsageError("a simulated instance needs both --n and --p");
  if (!c.lambda || !c.mu) throw UsageError("a simulated instance needs --lambda and --mu");
  SimSpec spec;
  spec.n = *c.n;
  spec.p = *c.p;
  spec.k = c.k > 0 ? c.k : std::min(*c.p, 10);
  spec.noise_sd = noise_sd_for(c.noise, noise_convention_from(c.noise_convention));
  spec.seed = c.seed;
  spec.count = 1;
  return generate_instance(spec, *c.lambda, *c.mu, c.index);
}

Json instance_json(const ProblemInstance& inst) {
  return {{"n", inst.n()}, {"p", inst.p()}, {"lambda", inst.lambda()}, {"mu", inst.mu()}};
}

Json fit_json(const FitResult& f) {
  return {{"objective", f.objective}, {"support", f.support}, {"b", vec(f.b)}, {"method", f.method}};
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path.string());
  f << text;
}

void emit(const Common& c, const std::string& command, Json body, std::ostream& out) {
  Json j;
  j["command"] = command;
  j["version"] = version_string();
  for (auto& [key, value] : body.items()) j[key] = value;
  const std::string text = j.dump(2) + "\n";
  out << text;
  if (!c.out_dir.empty()) write_text(fs::path(c.out_dir) / (command + ".json"), text);
}

SdpConfig sdp_config(const Common& c) {
  SdpConfig cfg;
  if (c.tol) cfg.gap_tol = *c.tol;
  return cfg;
}

Vector read_delta_file(const std::string& path, Eigen::Index p) {
  std::ifstream f(path);
  if (!f) throw UsageError("delta file not found: " + path);
  std::vector<double> vals;
  std::string tok;
  while (f >> tok) {
    std::stringstream parts(tok);
    std::string item;
    while (std::getline(parts, item, ',')) {
      if (item.empty()) continue;
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw ParseError("bad number in delta file: '" + item + "'");
      }
    }
  }
  if (static_cast<Eigen::Index>(vals.size()) != p) {
    throw DimensionError("delta file has " + std::to_string(vals.size()) + " values, expected " +
                         std::to_string(p));
  }
  return Eigen::Map<Vector>(vals.data(), p);
}

int cmd_relax(const Options& o, std::ostream& out, std::ostream& err) {
  const ProblemInstance inst = load_input(o.common);
  const GramCache g = build_gram(inst);
  const SdpProblem sp = build_sdp(inst, g);
  if (!o.export_sdp.empty()) write_text(o.export_sdp, sdp_to_json(sp));
  const SdpSolution sol = solve_sdp(sp, sdp_config(o.common));
  const PerspectiveParams dstar = extract_delta_star(sol.dual, g);
  const auto cert = rank1_certificate(sol.primal);
  Json body;
  body["status"] = sol.stats.converged ? "ok" : "not_converged";
  body["instance"] = instance_json(inst);
  body["zeta_sdp"] = sol.dual.value;
  body["primal_value"] = sol.primal.value;
  body["relative_gap"] = sol.stats.relative_gap;
  body["primal_infeasibility"] = sol.stats.primal_infeasibility;
  body["dual_infeasibility"] = sol.stats.dual_infeasibility;
  body["iterations"] = sol.stats.iterations;
  body["solver_status"] = sol.stats.status;
  body["rank"] = sol.primal.rank;
  body["b"] = vec(sol.primal.b);
  body["z"] = vec(sol.primal.z);
  body["delta_star"] = vec(dstar.delta);
  if (const auto* ex = std::get_if<ExactSolution>(&cert)) {
    body["rank1"] = true;
    body["eigen_ratio"] = ex->eigen_ratio;
    body["certified"] = fit_json(certified_fit(inst, *ex));
  } else {
    body["rank1"] = false;
    body["eigen_ratio"] = std::get<NotRank1>(cert).eigen_ratio;
  }
  emit(o.common, "relax", std::move(body), out);
  err << "SDP bound " << format_double(sol.dual.value) << ", relative gap "
      << sol.stats.relative_gap << ", rank " << sol.primal.rank << ", "
      << (std::holds_alternative<ExactSolution>(cert) ? "rank-1 (exact)" : "not rank-1") << ", "
      << sol.stats.iterations << " iterations, " << sol.stats.seconds << " s\n";
  return sol.stats.converged ? kExitOk : kExitNotConverged;
}

int cmd_pr(const Options& o, std::ostream& out, std::ostream& err) {
  const ProblemInstance inst = load_input(o.common);
  const GramCache g = build_gram(inst);
  PerspectiveParams params;
  bool sdp_ok = true;
  if (o.delta_mode == "uniform") {
    params = delta_uniform(g);
  } else if (o.delta_mode == "pwg") {
    params = delta_pwg(inst);
  } else if (o.delta_mode == "sdp-optimal") {
    const SdpSolution sol = solve_sdp(build_sdp(inst, g), sdp_config(o.common));
    sdp_ok = sol.stats.converged;
    params = extract_delta_star(sol.dual, g);
  } else {
    if (o.delta_file.empty()) throw UsageError("--delta file needs --delta-file PATH");
    params.delta = read_delta_file(o.delta_file, inst.p());
  }
  if (o.delta_mode != "file" && !o.delta_file.empty()) {
    throw UsageError("--delta-file is only valid with --delta file");
  }
  PrConfig cfg;
  if (o.common.tol) cfg.tol = *o.common.tol;
  const PrSolution s = solve_pr(inst, g, params, cfg);
  const bool ok = s.converged && sdp_ok;
  Json body;
  body["status"] = ok ? "ok" : "not_converged";
  body["instance"] = instance_json(inst);
  body["delta_mode"] = o.delta_mode;
  body["delta"] = vec(params.delta);
  body["zeta_pr"] = s.value;
  body["residual"] = s.residual;
  body["iterations"] = s.iterations;
  body["b"] = vec(s.b);
  emit(o.common, "pr", std::move(body), out);
  err << "perspective bound (" << o.delta_mode << ") " << format_double(s.value) << ", "
      << s.iterations << " iterations" << (ok ? "" : ", NOT converged") << "\n";
  return ok ? kExitOk : kExitNotConverged;
}

int cmd_round(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.samples < 1) throw UsageError("--samples must be at least 1");
  const ProblemInstance inst = load_input(o.common);
  const SdpSolution sol = solve_sdp(build_sdp(inst), sdp_config(o.common));
  const RoundingResult r = gw_round(inst, sol.primal, o.samples, o.common.seed);
  if (!o.trace_file.empty()) {
    std::ostringstream s;
    write_rounding_trace(r, s);
    write_text(o.trace_file, s.str());
  }
  Json body;
  body["status"] = sol.stats.converged ? "ok" : "not_converged";
  body["instance"] = instance_json(inst);
  body["zeta_sdp"] = sol.dual.value;
  body["samples"] = r.samples;
  body["seed"] = r.seed;
  body["best_sample"] = r.best_sample;
  body["skipped"] = r.skipped;
  body["objective"] = r.objective;
  body["support"] = r.support;
  body["b"] = vec(r.b);
  emit(o.common, "round", std::move(body), out);
  err << "rounded objective " << format_double(r.objective) << " with " << r.support.size()
      << " nonzeros (SDP bound " << format_double(sol.dual.value) << ")\n";
  return sol.stats.converged ? kExitOk : kExitNotConverged;
}

int cmd_exact(const Options& o, std::ostream& out, std::ostream& err) {
  const ProblemInstance inst = load_input(o.common);
  std::string method = o.method;
  if (method == "auto") method = inst.p() <= 16 ? "brute" : "bnb";
  Json body;
  body["instance"] = instance_json(inst);
  body["method"] = method;
  bool ok = true;
  if (method == "brute") {
    if (o.budget_nodes || o.budget_secs || !o.trace_file.empty()) {
      throw UsageError("--budget-nodes, --budget-secs and --trace apply to --method bnb only");
    }
    const FitResult f = brute_force(inst);
    body["status"] = "ok";
    body["optimal"] = true;
    body["lower_bound"] = f.objective;
    body["zeta_l0"] = f.objective;
    body["incumbent"] = fit_json(f);
    err << "optimum " << format_double(f.objective) << " with " << f.support.size()
        << " nonzeros (enumeration)\n";
  } else {
    BnbConfig cfg;
    if (o.common.tol) cfg.tol = *o.common.tol;
    if (o.budget_nodes) cfg.max_nodes = *o.budget_nodes;
    if (o.budget_secs) cfg.max_seconds = *o.budget_secs;
    const BnbResult r = solve_big_m(inst, cfg);
    if (!o.trace_file.empty()) {
      std::ostringstream s;
      write_bnb_trace(r, s);
      write_text(o.trace_file, s.str());
    }
    ok = r.optimal;
    body["status"] = ok ? "ok" : "not_converged";
    body["optimal"] = r.optimal;
    body["lower_bound"] = r.lower_bound;
    body["zeta_l0"] = r.incumbent.objective;
    body["nodes"] = r.nodes;
    body["big_m"] = r.big_m;
    body["m_doublings"] = r.m_doublings;
    body["incumbent"] = fit_json(r.incumbent);
    err << "incumbent " << format_double(r.incumbent.objective) << ", lower bound "
        << format_double(r.lower_bound) << ", " << r.nodes << " nodes, " << r.seconds << " s"
        << (ok ? "" : ", budget exhausted") << "\n";
  }
  emit(o.common, "exact", std::move(body), out);
  return ok ? kExitOk : kExitNotConverged;
}

int cmd_lambda_max(const Options& o, std::ostream& out, std::ostream& err) {
  const ProblemInstance inst = load_input(o.common);
  const LambdaMaxResult r = solve_lambda_max(inst, sdp_config(o.common));
  Json body;
  body["status"] = r.stats.converged ? "ok" : "not_converged";
  body["instance"] = instance_json(inst);
  body["lambda_max"] = r.value;
  body["delta"] = vec(r.delta);
  emit(o.common, "lambda-max", std::move(body), out);
  err << "lambda_max " << format_double(r.value) << "\n";
  return r.stats.converged ? kExitOk : kExitNotConverged;
}

int cmd_path(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.grid < 2) throw UsageError("--grid must be at least 2");
  if (o.samples < 1) throw UsageError("--samples must be at least 1");
  const ProblemInstance inst = load_input(o.common);
  const LambdaPath path = lambda_path(inst, o.grid, o.samples, o.common.seed, sdp_config(o.common));
  bool ok = true;
  Json pts = Json::array();
  for (const auto& pt : path.points) {
    ok = ok && pt.converged;
    pts.push_back({{"lambda", pt.lambda},
                   {"zeta_sdp", pt.zeta_sdp},
                   {"nu_gw", pt.nu_gw},
                   {"support", pt.support},
                   {"converged", pt.converged}});
  }
  if (!o.common.out_dir.empty()) {
    std::ostringstream s;
    write_path_csv(path, s);
    write_text(fs::path(o.common.out_dir) / "path.csv", s.str());
  }
  Json body;
  body["status"] = ok ? "ok" : "not_converged";
  body["instance"] = instance_json(inst);
  body["lambda_max"] = path.lambda_max;
  body["monotone"] = path.monotone;
  body["points"] = std::move(pts);
  emit(o.common, "path", std::move(body), out);
  err << path.points.size() << " grid points up to lambda_max " << format_double(path.lambda_max)
      << (path.monotone ? "" : " (bound not monotone)") << "\n";
  return ok ? kExitOk : kExitNotConverged;
}

struct Preset {
  SimSpec gap_spec;
  SimSpec rounding_spec;
  std::vector<double> lambdas;
  std::vector<double> mus;
  GapBudgets budgets;
};

Preset make_preset(const std::string& name) {
  Preset p;
  if (name == "paper-desk") {
    p.gap_spec = SimSpec{100, 60, 10, std::sqrt(5.0), 1, 10};
    p.rounding_spec = SimSpec{100, 20, 5, std::sqrt(5.0), 1, 10};
    p.lambdas = {0.1, 0.3, 0.5};
    p.mus = {0.1, 0.3, 0.5};
    p.budgets.bnb_nodes = 100000;
    p.budgets.bnb_seconds = 10.0;
    p.budgets.samples = 1000;
  } else if (name == "smoke") {
    p.gap_spec = SimSpec{30, 8, 3, std::sqrt(5.0), 1, 2};
    p.rounding_spec = p.gap_spec;
    p.lambdas = {0.1, 0.5};
    p.mus = {0.1, 0.5};
    p.budgets.bnb_nodes = 2000;
    p.budgets.bnb_seconds = std::numeric_limits<double>::infinity();
    p.budgets.samples = 100;
  } else {
    throw UsageError("unknown preset '" + name + "'");
  }
  return p;
}

int cmd_bench(const Options& o, std::ostream& out, std::ostream& err) {
  const Common& c = o.common;
  if (!c.instance.empty() || c.n || c.p) {
    throw UsageError("bench generates its own instances; drop --instance/--n/--p");
  }
  if (c.lambda || c.mu) throw UsageError("bench uses the preset grids; drop --lambda/--mu");
  Preset pr = make_preset(o.preset);
  const double sd = noise_sd_for(c.noise, noise_convention_from(c.noise_convention));
  for (SimSpec* s : {&pr.gap_spec, &pr.rounding_spec}) {
    s->noise_sd = sd;
    s->seed = c.seed;
    if (o.count) s->count = *o.count;
  }
  GapBudgets& b = pr.budgets;
  b.round_seed = c.seed;
  if (o.budget_nodes) b.bnb_nodes = *o.budget_nodes;
  if (o.budget_secs) b.bnb_seconds = *o.budget_secs;
  if (o.workers) b.workers = *o.workers;
  if (o.samples_set) b.samples = o.samples;
  if (c.tol) b.sdp.gap_tol = *c.tol;
  const fs::path dir = c.out_dir.empty() ? fs::path("bench-out") : fs::path(c.out_dir);

  Json body;
  body["status"] = "ok";
  body["preset"] = o.preset;
  body["noise_convention"] = c.noise_convention;
  int failures = 0;
  if (o.table == "gap" || o.table == "both") {
    const GapReport rep = gap_table(pr.gap_spec, pr.lambdas, pr.mus, b);
    std::ostringstream cells, recs, times;
    write_gap_csv(rep, cells);
    write_gap_records_csv(rep, recs);
    write_gap_timings_csv(rep, times);
    write_text(dir / "gap.csv", cells.str());
    write_text(dir / "gap_instances.csv", recs.str());
    write_text(dir / "gap_timings.csv", times.str());
    Json manifest = Json::parse(manifest_json(pr.gap_spec, pr.lambdas, pr.mus, b, "gap"));
    manifest["noise_convention"] = c.noise_convention;
    write_text(dir / "gap_manifest.json", manifest.dump(2) + "\n");
    Json cj = Json::array();
    for (const auto& cell : rep.cells) {
      failures += cell.failures;
      cj.push_back({{"lambda", cell.lambda},
                    {"mu", cell.mu},
                    {"instances", cell.instances},
                    {"failures", cell.failures},
                    {"sdp_gap_pct", cell.sdp_gap},
                    {"pwg_gap_pct", cell.pwg_gap},
                    {"bnb_gap_pct", cell.bnb_gap},
                    {"bnb_nodes", cell.nodes}});
      err << "lambda " << cell.lambda << " mu " << cell.mu << ": SDPGap " << cell.sdp_gap
          << "%  PWGGap " << cell.pwg_gap << "%  BnBGap " << cell.bnb_gap << "%\n";
    }
    body["gap_cells"] = std::move(cj);
  }
  if (o.table == "rounding" || o.table == "both") {
    const RoundingReport rep = rounding_quality_table(pr.rounding_spec, pr.lambdas, pr.mus, b);
    std::ostringstream s;
    write_rounding_csv(rep, s);
    write_text(dir / "rounding.csv", s.str());
    Json manifest =
        Json::parse(manifest_json(pr.rounding_spec, pr.lambdas, pr.mus, b, "rounding"));
    manifest["noise_convention"] = c.noise_convention;
    manifest["brute_force_reference"] = rep.brute_force_reference;
    write_text(dir / "rounding_manifest.json", manifest.dump(2) + "\n");
    Json cj = Json::array();
    for (const auto& cell : rep.cells) {
      failures += cell.failures;
      cj.push_back({{"lambda", cell.lambda},
                    {"mu", cell.mu},
                    {"instances", cell.instances},
                    {"failures", cell.failures},
                    {"exact_matches", cell.exact_matches},
                    {"mean_gw_gap_pct", cell.mean_gap}});
      err << "lambda " << cell.lambda << " mu " << cell.mu << ": GW gap " << cell.mean_gap
          << "%, exact " << cell.exact_matches << "/" << cell.instances << "\n";
    }
    body["rounding_cells"] = std::move(cj);
  }
  body["failures"] = failures;
  if (failures > 0) body["status"] = "not_converged";
  emit(c, "bench", std::move(body), out);
  return failures > 0 ? kExitNotConverged : kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse regression with l0 penalties: relaxations, rounding and exact solvers"};
  app.require_subcommand(1);
  Options o;

  auto* relax = app.add_subcommand("relax", "solve the SDP relaxation");
  add_common(relax, o.common);
  relax->add_option("--export-sdp", o.export_sdp, "write the block SDP as JSON");

  auto* pr = app.add_subcommand("pr", "solve a perspective relaxation");
  add_common(pr, o.common);
  pr->add_option("--delta", o.delta_mode, "diagonal choice")
      ->check(CLI::IsMember({"uniform", "pwg", "sdp-optimal", "file"}));
  pr->add_option("--delta-file", o.delta_file, "p numbers, whitespace or comma separated");

  auto* round = app.add_subcommand("round", "randomized hyperplane rounding of the SDP");
  add_common(round, o.common);
  round->add_option("--samples", o.samples, "number of hyperplanes");
  round->add_option("--trace", o.trace_file, "per-sample CSV");

  auto* exact = app.add_subcommand("exact", "solve the l0 problem exactly");
  add_common(exact, o.common);
  exact->add_option("--method", o.method, "auto, brute or bnb")
      ->check(CLI::IsMember({"auto", "brute", "bnb"}));
  exact->add_option("--budget-nodes", o.budget_nodes, "node limit")->check(CLI::PositiveNumber);
  exact->add_option("--budget-secs", o.budget_secs, "time limit")->check(CLI::PositiveNumber);
  exact->add_option("--trace", o.trace_file, "bounds trace CSV");

  auto* lmax = app.add_subcommand("lambda-max", "smallest lambda with an all-zero SDP solution");
  add_common(lmax, o.common);

  auto* path = app.add_subcommand("path", "SDP bound and rounded fits along a lambda grid");
  add_common(path, o.common);
  path->add_option("--grid", o.grid, "number of grid points");
  path->add_option("--samples", o.samples, "rounding samples per point");

  auto* bench = app.add_subcommand("bench", "simulated gap and rounding tables");
  add_common(bench, o.common);
  bench->add_option("--preset", o.preset, "paper-desk or smoke")
      ->check(CLI::IsMember({"paper-desk", "smoke"}));
  bench->add_option("--table", o.table, "gap, rounding or both")
      ->check(CLI::IsMember({"gap", "rounding", "both"}));
  auto* bench_samples = bench->add_option("--samples", o.samples, "rounding samples per instance");
  bench->add_option("--budget-nodes", o.budget_nodes, "B&B node limit")->check(CLI::PositiveNumber);
  bench->add_option("--budget-secs", o.budget_secs, "B&B time limit")->check(CLI::PositiveNumber);
  bench->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  bench->add_option("--count", o.count, "instances per cell")->check(CLI::PositiveNumber);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  o.samples_set = bench_samples->count() > 0;

  try {
    if (relax->parsed()) return cmd_relax(o, out, err);
    if (pr->parsed()) return cmd_pr(o, out, err);
    if (round->parsed()) return cmd_round(o, out, err);
    if (exact->parsed()) return cmd_exact(o, out, err);
    if (lmax->parsed()) return cmd_lambda_max(o, out, err);
    if (path->parsed()) return cmd_path(o, out, err);
    return cmd_bench(o, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace l0relax::cli
