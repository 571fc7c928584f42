#include "l0relax/exact.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>

#include "l0relax/detail/prox_gradient.hpp"
#include "l0relax/error.hpp"
#include "l0relax/penalties.hpp"

namespace l0relax {

namespace {

// Depth-first enumeration of supports in increasing index order, growing a
// Cholesky factor of G_SS one column at a time.
class Enumerator {
 public:
  Enumerator(const GramCache& g, double lambda)
      : g_(g), lambda_(lambda), p_(static_cast<int>(g.xty.size())),
        l_(Matrix::Zero(p_, p_)), w_(Vector::Zero(p_)) {}

  std::vector<int> run() {
    best_value_ = 0.5 * g_.yty;  // empty support
    best_.clear();
    visit(0, 0.0);
    return best_;
  }

 private:
  void consider(double value) {
    const double slack = 1e-12 * (1.0 + std::abs(best_value_));
    if (value < best_value_ - slack) {
      best_value_ = value;
      best_ = current_;
      return;
    }
    if (value <= best_value_ + slack && (current_.size() < best_.size() ||
                                         (current_.size() == best_.size() && current_ < best_))) {
      best_value_ = std::min(best_value_, value);
      best_ = current_;
    }
  }

  // `norm2` is ||L^-1 c_S||^2 for the current support.
  void visit(int next, double norm2) {
    const int k = static_cast<int>(current_.size());
    for (int j = next; j < p_; ++j) {
      // New row of the factor: l = L^-1 G_{S,j}, d^2 = G_jj - ||l||^2.
      double d2 = g_.gram(j, j);
      for (int a = 0; a < k; ++a) {
        double s = g_.gram(current_[a], j);
        for (int b = 0; b < a; ++b) s -= l_(a, b) * l_(k, b);
        l_(k, a) = s / l_(a, a);
        d2 -= l_(k, a) * l_(k, a);
      }
      // Column j is (numerically) in the span of S: every superset is
      // dominated by the same support without j.
      if (d2 <= 1e-14 * g_.gram(j, j)) continue;
      const double d = std::sqrt(d2);
      l_(k, k) = d;
      double s = g_.xty(j);
      for (int a = 0; a < k; ++a) s -= l_(k, a) * w_(a);
      w_(k) = s / d;
      const double n2 = norm2 + w_(k) * w_(k);
      current_.push_back(j);
      consider(0.5 * g_.yty - 0.5 * n2 + lambda_ * static_cast<double>(k + 1));
      visit(j + 1, n2);
      current_.pop_back();
    }
  }

  const GramCache& g_;
  double lambda_;
  int p_;
  Matrix l_;
  Vector w_;
  std::vector<int> current_;
  std::vector<int> best_;
  double best_value_ = 0.0;
};

struct Node {
  std::vector<signed char> state;  // -1 free, 0 fixed zero, 1 fixed one
  Vector start;                    // warm start on all p coordinates
  double lower_bound = 0.0;
  long order = 0;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.lower_bound != b.lower_bound) return a.lower_bound > b.lower_bound;
    return a.order > b.order;
  }
};

struct NodeSolve {
  Vector b;           // full length, zero on fixed-zero coordinates
  double bound = 0.0; // rigorous lower bound on the node relaxation
};

}  // namespace

FitResult brute_force(const ProblemInstance& inst) {
  if (inst.p() > kBruteForceMaxP) {
    throw TooLarge("brute force supports p <= " + std::to_string(kBruteForceMaxP) + ", got " +
                   std::to_string(inst.p()));
  }
  const GramCache g = build_gram(inst);
  const std::vector<int> support = Enumerator(g, inst.lambda()).run();
  return make_fit(inst, restricted_ls(inst.x(), inst.y(), inst.mu(), support), "brute-force");
}

double big_m(const ProblemInstance& inst, double safety) {
  const GramCache g = build_gram(inst);
  const Vector ols = Eigen::LLT<Matrix>(g.gram).solve(g.xty);
  double m = ols.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < g.xty.size(); ++i) {
    m = std::max(m, std::abs(g.xty(i)) / g.gram(i, i));
  }
  m *= safety;
  return m > 0.0 ? m : 1.0;
}

BnbResult branch_and_bound(const ProblemInstance& inst, double m, const BnbConfig& config) {
  if (!(m > 0.0)) throw std::invalid_argument("big-M must be positive");
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  const GramCache g = build_gram(inst);
  const int p = static_cast<int>(inst.p());
  const double lambda = inst.lambda();
  const double weight = lambda / m;
  const double support_tol = 1e-6 * m;

  detail::ProxGradOptions opt;
  opt.residual_tol = config.node_tol;
  opt.rel_change_tol = 1e-3 * config.node_tol;
  opt.max_iterations = config.node_max_iterations;

  BnbResult res;
  res.big_m = m;
  double ub = std::numeric_limits<double>::infinity();
  auto offer = [&](const Vector& b, const char* method) {
    const double v = smooth_loss(g, b) + lambda * static_cast<double>(support_of(b).size());
    if (v < ub) {
      ub = v;
      res.incumbent.b = b;
      res.incumbent.method = method;
      return true;
    }
    return false;
  };
  auto polish = [&](const std::vector<int>& support) -> std::optional<Vector> {
    try {
      return restricted_ls_gram(g.gram, g.xty, support);
    } catch (const NotPositiveDefinite&) {
      return std::nullopt;
    }
  };
  if (config.initial_incumbent) offer(config.initial_incumbent->b, "initial");

  auto solve_node = [&](const Node& node) {
    std::vector<int> idx;
    int fixed_one = 0;
    for (int i = 0; i < p; ++i) {
      if (node.state[i] != 0) idx.push_back(i);
      if (node.state[i] == 1) ++fixed_one;
    }
    const int q = static_cast<int>(idx.size());
    Matrix gs(q, q);
    Vector cs(q);
    Vector start(q);
    Eigen::VectorXi is_free(q);
    for (int a = 0; a < q; ++a) {
      cs(a) = g.xty(idx[a]);
      start(a) = node.start(idx[a]);
      is_free(a) = node.state[idx[a]] == -1;
      for (int b = 0; b < q; ++b) gs(a, b) = g.gram(idx[a], idx[b]);
    }
    const double constant = 0.5 * g.yty + lambda * fixed_one;
    // Eigenvalues of a principal submatrix interlace those of G.
    const double lip = g.lambda_max * (1.0 + 1e-9) + 1e-12;
    auto value = [&](int a, double x) { return is_free(a) ? weight * std::abs(x) : 0.0; };
    auto prox = [&](int a, double v, double step) {
      return is_free(a) ? soft_threshold(v, step * weight) : v;
    };
    NodeSolve out;
    out.b = Vector::Zero(p);
    double bound = constant;
    if (q > 0) {
      const auto r = detail::minimize_composite(gs, cs, constant, lip, value, prox,
                                                std::move(start), opt);
      // One more step x -> x+; (lip I - G)(x - x+) is a subgradient of the
      // node objective at x+, and strong convexity turns it into a bound.
      const Vector& x = r.b;
      const Vector v = x - (gs * x - cs) / lip;
      Vector xp(q);
      for (int a = 0; a < q; ++a) xp(a) = prox(a, v(a), 1.0 / lip);
      const Vector d = x - xp;
      const Vector sub = lip * d - gs * d;
      double f = 0.5 * xp.dot(gs * xp) - cs.dot(xp) + constant;
      for (int a = 0; a < q; ++a) f += value(a, xp(a));
      bound = f - sub.squaredNorm() / (2.0 * g.lambda_min) - 1e-12 * (1.0 + std::abs(f));
      for (int a = 0; a < q; ++a) out.b(idx[a]) = xp(a);
    }
    out.bound = bound;
    return out;
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long order = 0;
  Node root;
  root.state.assign(p, -1);
  root.start = Vector::Zero(p);
  root.lower_bound = -std::numeric_limits<double>::infinity();
  open.push(root);
  double pruned_min = std::numeric_limits<double>::infinity();
  auto gap_closed = [&](double lb) {
    return std::isfinite(ub) && std::isfinite(lb) && ub - lb <= config.tol * std::max(ub, 1e-12);
  };
  auto record = [&](double lb) {
    res.trace.push_back({elapsed(), lb, ub, res.nodes});
  };

  bool budget_hit = false;
  while (!open.empty()) {
    const double lb_now = std::min(open.top().lower_bound, pruned_min);
    if (gap_closed(lb_now)) break;
    if (res.nodes >= config.max_nodes || elapsed() >= config.max_seconds) {
      budget_hit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    ++res.nodes;

    std::vector<int> free_idx;
    std::vector<int> ones;
    for (int i = 0; i < p; ++i) {
      if (node.state[i] == -1) free_idx.push_back(i);
      if (node.state[i] == 1) ones.push_back(i);
    }
    if (free_idx.empty()) {
      // Leaf: the relaxation is the restricted least-squares problem itself.
      if (auto b = polish(ones)) {
        const double v = smooth_loss(g, *b) + lambda * static_cast<double>(ones.size());
        if (offer(*b, "branch-and-bound")) record(lb_now);
        pruned_min = std::min(pruned_min, v);
      } else {
        pruned_min = std::min(pruned_min, node.lower_bound);
      }
      continue;
    }

    const NodeSolve ns = solve_node(node);
    const double node_lb = std::max(node.lower_bound, ns.bound);

    std::vector<int> support = ones;
    for (const int i : free_idx) {
      if (std::abs(ns.b(i)) > support_tol) support.push_back(i);
    }
    std::sort(support.begin(), support.end());
    if (auto b = polish(support)) {
      if (offer(*b, "branch-and-bound")) record(std::min(lb_now, node_lb));
    }
    if (ub - node_lb <= config.tol * std::max(ub, 1e-12)) {
      pruned_min = std::min(pruned_min, node_lb);
      continue;
    }

    // Most fractional |b_i| / M, ties to the larger |b_i|.
    int branch = free_idx.front();
    double best_score = std::numeric_limits<double>::infinity();
    for (const int i : free_idx) {
      const double score = std::abs(std::abs(ns.b(i)) / m - 0.5);
      if (score < best_score ||
          (score == best_score && std::abs(ns.b(i)) > std::abs(ns.b(branch)))) {
        best_score = score;
        branch = i;
      }
    }
    for (const signed char v : {static_cast<signed char>(0), static_cast<signed char>(1)}) {
      Node child;
      child.state = node.state;
      child.state[branch] = v;
      child.start = ns.b;
      if (v == 0) child.start(branch) = 0.0;
      child.lower_bound = node_lb;
      child.order = ++order;
      open.push(std::move(child));
    }
  }

  double lb = pruned_min;
  if (!open.empty()) lb = std::min(lb, open.top().lower_bound);
  lb = std::min(lb, ub);
  res.lower_bound = lb;
  res.optimal = !budget_hit && gap_closed(lb);
  res.seconds = elapsed();
  if (!std::isfinite(ub)) {
    res.incumbent.b = Vector::Zero(p);
    res.incumbent.method = "branch-and-bound";
  }
  res.incumbent = make_fit(inst, res.incumbent.b, res.incumbent.method);
  // The recomputed objective can differ from ub in the last bits.
  lb = std::min(lb, res.incumbent.objective);
  res.lower_bound = lb;
  record(lb);
  res.trace.back().upper_bound = res.incumbent.objective;
  return res;
}

BnbResult solve_big_m(const ProblemInstance& inst, const BnbConfig& config, double safety) {
  double m = big_m(inst, safety);
  int doublings = 0;
  while (true) {
    BnbResult r = branch_and_bound(inst, m, config);
    const double top = r.incumbent.b.size() > 0 ? r.incumbent.b.cwiseAbs().maxCoeff() : 0.0;
    if (top <= 0.99 * m || doublings >= 20) {
      r.m_doublings = doublings;
      return r;
    }
    m *= 2.0;
    ++doublings;
  }
}

void write_bnb_trace(const BnbResult& r, std::ostream& out) {
  out << "seconds,lower_bound,upper_bound,nodes\n";
  for (const auto& t : r.trace) {
    out << format_double(t.seconds) << ',' << format_double(t.lower_bound) << ','
        << format_double(t.upper_bound) << ',' << t.nodes << '\n';
  }
}

}  // namespace l0relax
