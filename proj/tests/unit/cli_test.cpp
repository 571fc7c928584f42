#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "l0relax/instance.hpp"
#include "l0relax_cli/cli.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "l0relax");
  std::ostringstream out, err;
  CliRun r;
  r.code = l0relax::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("l0relax_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

const std::vector<std::string> kSim = {"--n", "40", "--p", "10", "--k", "4", "--lambda", "0.3",
                                       "--mu", "0.1", "--seed", "5"};

std::vector<std::string> with_sim(std::vector<std::string> head) {
  head.insert(head.end(), kSim.begin(), kSim.end());
  return head;
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, l0relax::cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, l0relax::cli::kExitUsage);
  EXPECT_EQ(run({"relax", "--bogus"}).code, l0relax::cli::kExitUsage);
  EXPECT_EQ(run({"relax"}).code, l0relax::cli::kExitUsage);
  EXPECT_EQ(run({"relax", "--instance", "/nonexistent.csv"}).code, l0relax::cli::kExitUsage);
  EXPECT_EQ(run(with_sim({"relax", "--instance", "x.csv"})).code, l0relax::cli::kExitUsage);
  EXPECT_EQ(run(with_sim({"pr", "--delta", "nonsense"})).code, l0relax::cli::kExitUsage);
  EXPECT_EQ(run(with_sim({"pr", "--delta", "file"})).code, l0relax::cli::kExitUsage);
  EXPECT_EQ(run({"bench", "--preset", "unknown"}).code, l0relax::cli::kExitUsage);
}

TEST(Cli, LambdaMaxOfZeroResponse) {
  const fs::path d = scratch("lmax");
  const l0relax::ProblemInstance inst(l0relax::Matrix::Identity(5, 3), l0relax::Vector::Zero(5),
                                      0.1, 0.0);
  l0relax::save_instance(inst, d / "zero.json");
  const CliRun r = run({"lambda-max", "--instance", (d / "zero.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).at("lambda_max").get<double>(), 0.0);
}

TEST(Cli, RelaxBoundBelowExactValue) {
  const CliRun relax = run(with_sim({"relax"}));
  const CliRun exact = run(with_sim({"exact"}));
  ASSERT_EQ(relax.code, 0) << relax.err;
  ASSERT_EQ(exact.code, 0) << exact.err;
  const json a = json::parse(relax.out);
  const json b = json::parse(exact.out);
  EXPECT_LE(a.at("zeta_sdp").get<double>(), b.at("zeta_l0").get<double>() + 1e-9);
  EXPECT_EQ(a.at("delta_star").size(), 10u);
}

TEST(Cli, ExactMethodsAgree) {
  const CliRun brute = run(with_sim({"exact", "--method", "brute"}));
  const CliRun bnb = run(with_sim({"exact", "--method", "bnb", "--tol", "1e-10"}));
  ASSERT_EQ(brute.code, 0);
  ASSERT_EQ(bnb.code, 0) << bnb.err;
  EXPECT_NEAR(json::parse(brute.out).at("zeta_l0").get<double>(),
              json::parse(bnb.out).at("zeta_l0").get<double>(), 1e-8);
  EXPECT_EQ(run(with_sim({"exact", "--method", "brute", "--budget-nodes", "5"})).code,
            l0relax::cli::kExitUsage);
}

TEST(Cli, NodeBudgetExhaustionIsNonConvergence) {
  const CliRun r = run({"exact", "--method", "bnb", "--n", "80", "--p", "30", "--lambda", "0.05",
                     "--mu", "0.05", "--budget-nodes", "2"});
  EXPECT_EQ(r.code, l0relax::cli::kExitNotConverged);
  EXPECT_EQ(json::parse(r.out).at("status"), "not_converged");
}

TEST(Cli, PerspectiveModes) {
  const fs::path d = scratch("pr");
  std::ofstream(d / "delta.txt") << "0.01, 0.01 0.01\n0.01 0.01 0.01 0.01 0.01 0.01 0.01\n";
  double prev = -1e300;
  for (const std::string mode : {"file", "pwg", "sdp-optimal"}) {
    std::vector<std::string> a = with_sim({"pr", "--delta", mode});
    if (mode == "file") {
      a.push_back("--delta-file");
      a.push_back((d / "delta.txt").string());
    }
    const CliRun r = run(a);
    ASSERT_EQ(r.code, 0) << mode << ": " << r.err;
    const double v = json::parse(r.out).at("zeta_pr").get<double>();
    EXPECT_GE(v, prev - 1e-9);
    prev = v;
  }
  EXPECT_EQ(run(with_sim({"pr", "--delta", "uniform"})).code, 0);
}

TEST(Cli, RoundIsReproducible) {
  const fs::path d = scratch("round");
  const auto a = with_sim({"round", "--samples", "200", "--out", (d / "a").string(), "--trace",
                           (d / "a" / "trace.csv").string()});
  const auto b = with_sim({"round", "--samples", "200", "--out", (d / "b").string(), "--trace",
                           (d / "b" / "trace.csv").string()});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  EXPECT_EQ(slurp(d / "a" / "round.json"), slurp(d / "b" / "round.json"));
  EXPECT_EQ(slurp(d / "a" / "trace.csv"), slurp(d / "b" / "trace.csv"));
}

TEST(Cli, BenchSmokeWritesTables) {
  const fs::path d = scratch("bench");
  const CliRun r = run({"bench", "--preset", "smoke", "--table", "both", "--out", d.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string gap = slurp(d / "gap.csv");
  EXPECT_EQ(gap.substr(0, gap.find('\n')),
            "lambda,mu,instances,failures,sdp_gap_pct,pwg_gap_pct,bnb_gap_pct,bnb_nodes");
  EXPECT_TRUE(fs::exists(d / "rounding.csv"));
  EXPECT_TRUE(fs::exists(d / "gap_manifest.json"));
  EXPECT_TRUE(fs::exists(d / "gap_timings.csv"));
  EXPECT_EQ(json::parse(slurp(d / "bench.json")).at("command"), "bench");
}

TEST(Cli, PathWritesCsv) {
  const fs::path d = scratch("path");
  const CliRun r = run(with_sim({"path", "--grid", "4", "--samples", "50", "--out", d.string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j.at("points").size(), 4u);
  EXPECT_TRUE(j.at("monotone").get<bool>());
  EXPECT_TRUE(fs::exists(d / "path.csv"));
}

TEST(Cli, ExportedSdpRoundTrips) {
  const fs::path d = scratch("export");
  const CliRun r = run(with_sim({"relax", "--export-sdp", (d / "sdp.json").string()}));
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(slurp(d / "sdp.json"));
  EXPECT_EQ(j.at("p"), 10);
  EXPECT_EQ(j.at("constraints").size(), 21u);
}
