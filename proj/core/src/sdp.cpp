#include "l0relax/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <json.hpp>

#include "l0relax/error.hpp"

namespace l0relax {

using conic::BlockProblem;
using conic::Entry;

namespace {

// Objective entries of the [1 b^T; b B] block: 1/2 <G, B> - c^T b.
void add_lifted_objective(BlockProblem& bp, const Matrix& gram, const Vector& xty) {
  const int p = static_cast<int>(xty.size());
  for (int i = 0; i < p; ++i) {
    bp.objective.push_back({0, 0, i + 1, -0.5 * xty(i)});
  }
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) bp.objective.push_back({0, i + 1, j + 1, 0.5 * gram(i, j)});
  }
}

SolveStats stats_from(const conic::IpmResult& r) {
  SolveStats s;
  s.iterations = r.iterations;
  s.primal_infeasibility = r.primal_infeasibility;
  s.dual_infeasibility = r.dual_infeasibility;
  s.relative_gap = r.relative_gap;
  s.seconds = r.seconds;
  s.status = conic::to_string(r.status);
  s.converged = r.status == conic::IpmStatus::kOptimal;
  return s;
}

bool blocks_pd(const conic::BlockMatrix& m) {
  for (const auto& b : m) {
    Eigen::LLT<Matrix> llt(b);
    if (llt.info() != Eigen::Success) return false;
  }
  return true;
}

// Dual slack C - A^T y for a given y.
conic::BlockMatrix dual_slack(const BlockProblem& bp, const Vector& y) {
  conic::BlockMatrix s = conic::objective_blocks(bp);
  const conic::BlockMatrix aty = conic::apply_adjoint(bp, y);
  for (std::size_t j = 0; j < s.size(); ++j) s[j] -= aty[j];
  return s;
}

// Corner multiplier making [-y0, -(c + t)^T / 2; -(c + t) / 2, (G - diag(delta)) / 2]
// positive definite with unit margin.
double corner_multiplier(const Matrix& gram, const Vector& delta, const Vector& shifted_c) {
  Matrix h = gram;
  h.diagonal() -= delta;
  h *= 0.5;
  const Eigen::LLT<Matrix> llt(h);
  const double q = 0.25 * shifted_c.dot(llt.solve(shifted_c));
  return -(q + 1.0 + q);
}

conic::Iterate cold_start(const SdpProblem& sp) {
  const int p = sp.p;
  const BlockProblem& bp = sp.blocks;
  conic::Iterate it;
  it.x.push_back(Matrix::Identity(p + 1, p + 1));
  for (int i = 0; i < p; ++i) {
    Matrix w(2, 2);
    w << 0.5, 0.0, 0.0, 1.0;
    it.x.push_back(w);
  }
  const double lmin =
      min_eigenvalue(SymMatrix::from_trusted(sp.gram));
  const Vector delta = Vector::Constant(p, 0.5 * lmin);
  it.y = Vector::Zero(2 * p + 1);
  it.y(0) = corner_multiplier(sp.gram, delta, sp.xty);
  it.y.segment(1 + p, p) = 0.5 * delta;
  it.s = dual_slack(bp, it.y);
  return it;
}

BlockProblem reduced_problem(const SdpProblem& sp) {
  BlockProblem bp;
  bp.block_orders = {sp.p + 1};
  add_lifted_objective(bp, sp.gram, sp.xty);
  bp.objective_constant = 0.5 * sp.yty;
  bp.constraints.push_back({{{0, 0, 0, 1.0}}, 1.0});
  return bp;
}

void finish_primal(const SdpProblem& sp, const Matrix& lifted, const Vector* z_block,
                   double rank_tol, SdpPrimal& out) {
  const int p = sp.p;
  out.b = lifted.col(0).tail(p);
  out.bmat = lifted.bottomRightCorner(p, p);
  out.z.resize(p);
  for (int i = 0; i < p; ++i) {
    const double bii = out.bmat(i, i);
    // Smallest z compatible with [z_i b_i; b_i B_ii] >= 0.
    out.z(i) = bii > 1e-12 ? out.b(i) * out.b(i) / bii : 0.0;
  }
  (void)z_block;
  out.value = 0.5 * (sp.gram.cwiseProduct(out.bmat)).sum() - sp.xty.dot(out.b) +
              sp.lambda * out.z.sum() + 0.5 * sp.yty;
  out.rank = lifted_rank(out.b, out.bmat, rank_tol);
}

}  // namespace

bool operator==(const SdpProblem& a, const SdpProblem& b) {
  auto same = [](const auto& u, const auto& v) {
    return u.rows() == v.rows() && u.cols() == v.cols() && u == v;
  };
  return a.p == b.p && a.lambda == b.lambda && a.yty == b.yty && same(a.gram, b.gram) &&
         same(a.xty, b.xty) && a.blocks == b.blocks;
}

SdpProblem build_sdp(const ProblemInstance& inst, const GramCache& gram) {
  SdpProblem sp;
  sp.p = static_cast<int>(inst.p());
  sp.lambda = inst.lambda();
  sp.gram = gram.gram;
  sp.xty = gram.xty;
  sp.yty = gram.yty;
  const int p = sp.p;

  BlockProblem& bp = sp.blocks;
  bp.block_orders.push_back(p + 1);
  for (int i = 0; i < p; ++i) bp.block_orders.push_back(2);
  add_lifted_objective(bp, sp.gram, sp.xty);
  for (int i = 0; i < p; ++i) bp.objective.push_back({1 + i, 0, 0, sp.lambda});
  bp.objective_constant = 0.5 * sp.yty;

  bp.constraints.push_back({{{0, 0, 0, 1.0}}, 1.0});
  for (int i = 0; i < p; ++i) {
    bp.constraints.push_back({{{0, 0, i + 1, 0.5}, {1 + i, 0, 1, -0.5}}, 0.0});
  }
  for (int i = 0; i < p; ++i) {
    bp.constraints.push_back({{{0, i + 1, i + 1, 1.0}, {1 + i, 1, 1, -1.0}}, 0.0});
  }
  return sp;
}

SdpProblem build_sdp(const ProblemInstance& inst) { return build_sdp(inst, build_gram(inst)); }

int lifted_rank(const Vector& b, const Matrix& bmat, double tol) {
  const auto p = b.size();
  Matrix y(p + 1, p + 1);
  y(0, 0) = 1.0;
  y.col(0).tail(p) = b;
  y.row(0).tail(p) = b.transpose();
  y.bottomRightCorner(p, p) = bmat;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (y + y.transpose()), Eigen::EigenvaluesOnly);
  const Vector ev = es.eigenvalues();
  const double top = ev(p);
  int r = 0;
  for (Eigen::Index k = 0; k <= p; ++k) {
    if (ev(k) > tol * top) ++r;
  }
  return r;
}

SdpSolution solve_sdp(const SdpProblem& sp, const SdpConfig& config, const SdpSolution* warm) {
  const int p = sp.p;
  conic::IpmConfig ipm;
  ipm.gap_tol = config.gap_tol;
  ipm.feas_tol = config.feas_tol;
  ipm.max_iterations = config.max_iterations;

  SdpSolution sol;
  if (sp.lambda == 0.0) {
    // Without the l0 term the z-blocks can always be satisfied and the dual
    // has no interior; solve the lifted block alone.
    const BlockProblem bp = reduced_problem(sp);
    conic::Iterate start;
    start.x.push_back(Matrix::Identity(p + 1, p + 1));
    start.y = Vector::Constant(1, corner_multiplier(sp.gram, Vector::Zero(p), sp.xty));
    start.s = dual_slack(bp, start.y);
    const conic::IpmResult r = conic::solve(bp, std::move(start), ipm);
    finish_primal(sp, r.iterate.x[0], nullptr, config.rank_tol, sol.primal);
    sol.dual.epsilon = -2.0 * r.iterate.y(0);
    sol.dual.alpha = -sp.xty;
    sol.dual.delta = Vector::Zero(p);
    sol.dual.t = Vector::Zero(p);
    sol.dual.value = 0.5 * sp.yty + r.iterate.y(0);
    sol.stats = stats_from(r);
    sol.iterate = r.iterate;
  } else {
    conic::Iterate start = cold_start(sp);
    if (warm != nullptr && warm->iterate.x.size() == sp.blocks.block_orders.size() &&
        warm->iterate.x[0].rows() == p + 1) {
      // Blend with the cold start; both are feasible, so the blend is too.
      constexpr double keep = 0.5;
      conic::Iterate blended = start;
      for (std::size_t j = 0; j < blended.x.size(); ++j) {
        blended.x[j] = keep * warm->iterate.x[j] + (1.0 - keep) * start.x[j];
      }
      blended.y = keep * warm->iterate.y + (1.0 - keep) * start.y;
      blended.s = dual_slack(sp.blocks, blended.y);
      if (blocks_pd(blended.x) && blocks_pd(blended.s)) start = std::move(blended);
    }
    const conic::IpmResult r = conic::solve(sp.blocks, std::move(start), ipm);
    finish_primal(sp, r.iterate.x[0], nullptr, config.rank_tol, sol.primal);
    const Vector& y = r.iterate.y;
    sol.dual.epsilon = -2.0 * y(0);
    sol.dual.t = y.segment(1, p);
    sol.dual.alpha = -sp.xty - sol.dual.t;
    sol.dual.delta = 2.0 * y.segment(1 + p, p);
    sol.dual.value = 0.5 * sp.yty + y(0);
    sol.stats = stats_from(r);
    sol.iterate = r.iterate;
  }
  sol.stats.relative_gap =
      std::abs(sol.primal.value - sol.dual.value) / (1.0 + std::abs(sol.primal.value));
  return sol;
}

PerspectiveParams extract_delta_star(const DualCertificate& cert, const GramCache& gram) {
  Vector delta = cert.delta.cwiseMax(0.0);
  auto lmin_at = [&](double s) {
    Matrix m = gram.gram;
    m.diagonal() -= s * delta;
    return min_eigenvalue(SymMatrix::from_trusted(std::move(m)));
  };
  if (lmin_at(1.0) >= 0.0) return {delta};
  // lambda_min(G - s diag(delta)) is concave in s, positive at 0, negative at 1.
  double lo = 0.0;
  double hi = 1.0;
  for (int k = 0; k < 200 && hi - lo > 1e-16; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (lmin_at(mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {lo * delta};
}

std::variant<ExactSolution, NotRank1> rank1_certificate(const SdpPrimal& primal, double tol) {
  const auto p = primal.b.size();
  Matrix y(p + 1, p + 1);
  y(0, 0) = 1.0;
  y.col(0).tail(p) = primal.b;
  y.row(0).tail(p) = primal.b.transpose();
  y.bottomRightCorner(p, p) = primal.bmat;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (y + y.transpose()), Eigen::EigenvaluesOnly);
  const Vector ev = es.eigenvalues();
  const double ratio = p > 0 ? std::max(ev(p - 1), 0.0) / ev(p) : 0.0;
  if (ratio > tol) return NotRank1{ratio};
  ExactSolution ex;
  ex.eigen_ratio = ratio;
  ex.z.resize(p);
  ex.b = Vector::Zero(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    ex.z(i) = primal.z(i) >= 0.5 ? 1.0 : 0.0;
    if (ex.z(i) == 1.0) ex.b(i) = primal.b(i);
  }
  return ex;
}

FitResult certified_fit(const ProblemInstance& inst, const ExactSolution& exact) {
  std::vector<int> support;
  for (Eigen::Index i = 0; i < exact.z.size(); ++i) {
    if (exact.z(i) == 1.0) support.push_back(static_cast<int>(i));
  }
  return make_fit(inst, restricted_ls(inst.x(), inst.y(), inst.mu(), support), "sdp-rank1");
}

LambdaMaxResult solve_lambda_max(const ProblemInstance& inst, const SdpConfig& config) {
  const GramCache g = build_gram(inst);
  const int p = static_cast<int>(inst.p());
  LambdaMaxResult out;
  if (g.xty.isZero(0.0)) {
    out.value = 0.0;
    out.delta = Vector::Zero(p);
    out.stats.status = "trivial";
    out.stats.converged = true;
    return out;
  }
  // Written as the dual of a block SDP with y = (delta_1..delta_p, lambda),
  // maximizing -lambda.
  BlockProblem bp;
  bp.block_orders.push_back(p);
  for (int i = 0; i < p; ++i) bp.block_orders.push_back(2);
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) bp.objective.push_back({0, i, j, g.gram(i, j)});
  }
  for (int i = 0; i < p; ++i) {
    if (g.xty(i) != 0.0) bp.objective.push_back({1 + i, 0, 1, -g.xty(i)});
  }
  for (int i = 0; i < p; ++i) {
    bp.constraints.push_back({{{0, i, i, 1.0}, {1 + i, 0, 0, -1.0}}, 0.0});
  }
  conic::Constraint lam;
  lam.rhs = -1.0;
  for (int i = 0; i < p; ++i) lam.entries.push_back({1 + i, 1, 1, -2.0});
  bp.constraints.push_back(std::move(lam));

  conic::Iterate start;
  start.x.push_back(Matrix::Identity(p, p));
  for (int i = 0; i < p; ++i) {
    Matrix w(2, 2);
    w << 1.0, 0.0, 0.0, 0.5 / p;
    start.x.push_back(w);
  }
  const Vector delta0 = Vector::Constant(p, 0.5 * g.lambda_min);
  start.y.resize(p + 1);
  start.y.head(p) = delta0;
  start.y(p) = (g.xty.array().square() / delta0.array()).maxCoeff() + 1.0;
  start.s = dual_slack(bp, start.y);

  conic::IpmConfig ipm;
  ipm.gap_tol = config.gap_tol;
  ipm.feas_tol = config.feas_tol;
  ipm.max_iterations = config.max_iterations;
  const conic::IpmResult r = conic::solve(bp, std::move(start), ipm);
  out.value = r.iterate.y(p);
  out.delta = r.iterate.y.head(p);
  out.stats = stats_from(r);
  return out;
}

double lambda_max(const ProblemInstance& inst, const SdpConfig& config) {
  return solve_lambda_max(inst, config).value;
}

namespace {

using nlohmann::json;

json entry_json(const Entry& e) { return json::array({e.block, e.row, e.col, e.value}); }

Entry entry_from(const json& j) {
  return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<double>()};
}

}  // namespace

std::string sdp_to_json(const SdpProblem& sp) {
  json j;
  j["format"] = "l0relax-block-sdp";
  j["version"] = 1;
  j["p"] = sp.p;
  j["lambda"] = sp.lambda;
  j["blocks"] = sp.blocks.block_orders;
  j["objective_constant"] = sp.blocks.objective_constant;
  json obj = json::array();
  for (const auto& e : sp.blocks.objective) obj.push_back(entry_json(e));
  j["objective"] = std::move(obj);
  json cons = json::array();
  for (const auto& c : sp.blocks.constraints) {
    json ents = json::array();
    for (const auto& e : c.entries) ents.push_back(entry_json(e));
    cons.push_back({{"rhs", c.rhs}, {"entries", std::move(ents)}});
  }
  j["constraints"] = std::move(cons);
  json gram = json::array();
  for (Eigen::Index i = 0; i < sp.gram.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < sp.gram.cols(); ++k) row.push_back(sp.gram(i, k));
    gram.push_back(std::move(row));
  }
  j["gram"] = std::move(gram);
  j["xty"] = std::vector<double>(sp.xty.data(), sp.xty.data() + sp.xty.size());
  j["yty"] = sp.yty;
  return j.dump(1);
}

SdpProblem sdp_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid SDP JSON: ") + e.what());
  }
  if (j.value("format", "") != "l0relax-block-sdp") throw ParseError("not an l0relax block SDP");
  SdpProblem sp;
  sp.p = j.at("p").get<int>();
  sp.lambda = j.at("lambda").get<double>();
  sp.blocks.block_orders = j.at("blocks").get<std::vector<int>>();
  sp.blocks.objective_constant = j.at("objective_constant").get<double>();
  for (const auto& e : j.at("objective")) sp.blocks.objective.push_back(entry_from(e));
  for (const auto& c : j.at("constraints")) {
    conic::Constraint con;
    con.rhs = c.at("rhs").get<double>();
    for (const auto& e : c.at("entries")) con.entries.push_back(entry_from(e));
    sp.blocks.constraints.push_back(std::move(con));
  }
  const auto& g = j.at("gram");
  sp.gram.resize(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.at(i).size() != g.size()) throw DimensionError("gram must be square");
    for (std::size_t k = 0; k < g.size(); ++k) {
      sp.gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = g.at(i).at(k).get<double>();
    }
  }
  const auto xty = j.at("xty").get<std::vector<double>>();
  sp.xty = Eigen::Map<const Vector>(xty.data(), static_cast<Eigen::Index>(xty.size()));
  sp.yty = j.at("yty").get<double>();
  conic::validate(sp.blocks);
  return sp;
}

}  // namespace l0relax
