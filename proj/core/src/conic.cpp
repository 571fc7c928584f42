#include "l0relax/conic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "l0relax/error.hpp"

namespace l0relax::conic {

std::string to_string(IpmStatus s) {
  switch (s) {
    case IpmStatus::kOptimal: return "optimal";
    case IpmStatus::kMaxIterations: return "max_iterations";
    case IpmStatus::kStalled: return "stalled";
    case IpmStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

void validate(const BlockProblem& problem) {
  const auto nb = static_cast<int>(problem.block_orders.size());
  auto check = [&](const Entry& e, const std::string& where) {
    if (e.block < 0 || e.block >= nb) {
      throw DimensionError(where + ": block index " + std::to_string(e.block) + " out of range");
    }
    const int n = problem.block_orders[e.block];
    if (e.row < 0 || e.col < 0 || e.row >= n || e.col >= n) {
      throw DimensionError(where + ": entry outside block " + std::to_string(e.block));
    }
    if (e.row > e.col) throw DimensionError(where + ": entries must have row <= col");
  };
  for (int n : problem.block_orders) {
    if (n < 1) throw DimensionError("block orders must be positive");
  }
  for (const auto& e : problem.objective) check(e, "objective");
  for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
    for (const auto& e : problem.constraints[k].entries) check(e, "constraint " + std::to_string(k));
  }
}

Vector apply_constraints(const BlockProblem& problem, const BlockMatrix& x) {
  Vector out(static_cast<Eigen::Index>(problem.constraints.size()));
  for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
    double v = 0.0;
    for (const auto& e : problem.constraints[k].entries) {
      const double mult = e.row == e.col ? 1.0 : 2.0;
      v += mult * e.value * x[e.block](e.row, e.col);
    }
    out(static_cast<Eigen::Index>(k)) = v;
  }
  return out;
}

namespace {

BlockMatrix zero_blocks(const BlockProblem& problem) {
  BlockMatrix out;
  out.reserve(problem.block_orders.size());
  for (int n : problem.block_orders) out.push_back(Matrix::Zero(n, n));
  return out;
}

void add_entry(BlockMatrix& m, const Entry& e, double scale) {
  m[e.block](e.row, e.col) += scale * e.value;
  if (e.row != e.col) m[e.block](e.col, e.row) += scale * e.value;
}

double inner(const BlockMatrix& a, const BlockMatrix& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j].array() * b[j].array()).sum();
  return s;
}

double frob(const BlockMatrix& a) { return std::sqrt(inner(a, a)); }

void symmetrize(Matrix& m) { m = (0.5 * (m + m.transpose())).eval(); }

struct Scaling {
  Matrix lx;    // chol(X)
  Matrix ls;    // chol(S)
  Matrix g;     // W = G G^T, G^T S G = diag(d) = G^{-1} X G^{-T}
  Matrix ginv;
  Matrix w;
  Vector d;
};

bool chol_lower(const Matrix& m, Matrix& l) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return false;
  l = llt.matrixL();
  return l.diagonal().minCoeff() > 0.0;
}

bool nt_scaling(const Matrix& x, const Matrix& s, Scaling& sc) {
  if (!chol_lower(x, sc.lx) || !chol_lower(s, sc.ls)) return false;
  const Matrix prod = sc.ls.transpose() * sc.lx;
  Eigen::BDCSVD<Matrix> svd(prod, Eigen::ComputeFullU | Eigen::ComputeFullV);
  sc.d = svd.singularValues();
  if (!(sc.d.minCoeff() > 0.0)) return false;
  const Matrix& v = svd.matrixV();
  const Vector isq = sc.d.array().rsqrt();
  const Vector sq = sc.d.array().sqrt();
  sc.g = sc.lx * v * isq.asDiagonal();
  const Matrix lx_inv =
      sc.lx.triangularView<Eigen::Lower>().solve(Matrix::Identity(x.rows(), x.rows()));
  sc.ginv = sq.asDiagonal() * v.transpose() * lx_inv;
  sc.w = sc.g * sc.g.transpose();
  symmetrize(sc.w);
  return true;
}

// Largest alpha with L L^T + alpha D >= 0 (infinity if unbounded).
double max_step(const Matrix& l, const Matrix& d) {
  const auto tri = l.triangularView<Eigen::Lower>();
  Matrix t = tri.solve(d);
  t = tri.solve(t.transpose()).transpose();
  symmetrize(t);
  Eigen::SelfAdjointEigenSolver<Matrix> es(t, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

struct Touch {
  int constraint;
  const Entry* entry;
};

// <sym(E_e), W sym(E_f) W> summed over the ordered index pairs of both entries.
double pair_term(const Entry& e, const Entry& f, const Matrix& w) {
  const int ea[2] = {e.row, e.col};
  const int eb[2] = {e.col, e.row};
  const int fc[2] = {f.row, f.col};
  const int fd[2] = {f.col, f.row};
  const int ne = e.row == e.col ? 1 : 2;
  const int nf = f.row == f.col ? 1 : 2;
  double s = 0.0;
  for (int u = 0; u < ne; ++u) {
    for (int v = 0; v < nf; ++v) s += w(eb[u], fc[v]) * w(fd[v], ea[u]);
  }
  return s;
}

struct Direction {
  BlockMatrix dx;
  Vector dy;
  BlockMatrix ds;
};

}  // namespace

BlockMatrix apply_adjoint(const BlockProblem& problem, const Vector& y) {
  BlockMatrix out = zero_blocks(problem);
  for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
    const double yk = y(static_cast<Eigen::Index>(k));
    if (yk == 0.0) continue;
    for (const auto& e : problem.constraints[k].entries) add_entry(out, e, yk);
  }
  return out;
}

BlockMatrix objective_blocks(const BlockProblem& problem) {
  BlockMatrix out = zero_blocks(problem);
  for (const auto& e : problem.objective) add_entry(out, e, 1.0);
  return out;
}

Iterate default_start(const BlockProblem& problem, double primal_scale, double dual_scale) {
  Iterate it;
  for (int n : problem.block_orders) {
    it.x.push_back(primal_scale * Matrix::Identity(n, n));
    it.s.push_back(dual_scale * Matrix::Identity(n, n));
  }
  it.y = Vector::Zero(static_cast<Eigen::Index>(problem.constraints.size()));
  return it;
}

IpmResult solve(const BlockProblem& problem, Iterate start, const IpmConfig& config) {
  validate(problem);
  const auto t0 = std::chrono::steady_clock::now();
  const auto nb = problem.block_orders.size();
  const auto m = static_cast<Eigen::Index>(problem.constraints.size());
  if (start.x.size() != nb || start.s.size() != nb || start.y.size() != m) {
    throw DimensionError("interior-point start does not match the problem shape");
  }

  const BlockMatrix c = objective_blocks(problem);
  Vector b(m);
  for (Eigen::Index k = 0; k < m; ++k) b(k) = problem.constraints[k].rhs;
  const double norm_b = b.norm();
  const double norm_c = frob(c);
  double total_order = 0.0;
  for (int n : problem.block_orders) total_order += n;

  std::vector<std::vector<Touch>> touching(nb);
  for (Eigen::Index k = 0; k < m; ++k) {
    for (const auto& e : problem.constraints[k].entries) {
      touching[e.block].push_back({static_cast<int>(k), &e});
    }
  }

  Iterate it = std::move(start);
  IpmResult result;
  double best_merit = std::numeric_limits<double>::infinity();
  int stalls = 0;

  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  std::vector<Scaling> sc(nb);
  for (int iter = 0;; ++iter) {
    const Vector rp = b - apply_constraints(problem, it.x);
    BlockMatrix rd = apply_adjoint(problem, it.y);
    for (std::size_t j = 0; j < nb; ++j) rd[j] = c[j] - rd[j] - it.s[j];

    const double pobj = inner(c, it.x) + problem.objective_constant;
    const double dobj = b.dot(it.y) + problem.objective_constant;
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
    const double pinf = rp.norm() / (1.0 + norm_b);
    const double dinf = frob(rd) / (1.0 + norm_c);
    const double merit = std::max({gap / config.gap_tol, pinf / config.feas_tol, dinf / config.feas_tol});
    if (merit < best_merit) {
      best_merit = merit;
      result.iterate = it;
      result.primal_objective = pobj;
      result.dual_objective = dobj;
      result.relative_gap = gap;
      result.primal_infeasibility = pinf;
      result.dual_infeasibility = dinf;
      result.iterations = iter;
    }
    if (merit <= 1.0) {
      result.status = IpmStatus::kOptimal;
      break;
    }
    if (iter >= config.max_iterations) {
      result.status = IpmStatus::kMaxIterations;
      break;
    }

    const double mu = inner(it.x, it.s) / total_order;
    bool ok = true;
    for (std::size_t j = 0; j < nb && ok; ++j) ok = nt_scaling(it.x[j], it.s[j], sc[j]);
    if (!ok) {
      result.status = IpmStatus::kNumericalFailure;
      break;
    }

    // Schur complement M_kl = sum_j <A_kj, W_j A_lj W_j>.
    Matrix schur = Matrix::Zero(m, m);
    for (std::size_t j = 0; j < nb; ++j) {
      const auto& list = touching[j];
      const Matrix& w = sc[j].w;
      for (std::size_t u = 0; u < list.size(); ++u) {
        for (std::size_t v = u; v < list.size(); ++v) {
          const double val =
              list[u].entry->value * list[v].entry->value * pair_term(*list[u].entry, *list[v].entry, w);
          schur(list[u].constraint, list[v].constraint) += val;
          if (u != v) schur(list[v].constraint, list[u].constraint) += val;
        }
      }
    }
    Eigen::LLT<Matrix> llt(schur);
    Eigen::LDLT<Matrix> ldlt;
    const bool use_llt = llt.info() == Eigen::Success;
    if (!use_llt) {
      ldlt.compute(schur);
      if (ldlt.info() != Eigen::Success) {
        result.status = IpmStatus::kNumericalFailure;
        break;
      }
    }

    BlockMatrix w_rd_w(nb);
    for (std::size_t j = 0; j < nb; ++j) w_rd_w[j] = sc[j].w * rd[j] * sc[j].w;
    const Vector a_wrdw = apply_constraints(problem, w_rd_w);

    // Solves V K + K V = R blockwise, maps back and eliminates dX, dS.
    auto direction = [&](const BlockMatrix& r) {
      Direction dir;
      BlockMatrix kx(nb);
      for (std::size_t j = 0; j < nb; ++j) {
        const Vector& d = sc[j].d;
        Matrix k = r[j];
        for (Eigen::Index a = 0; a < k.rows(); ++a) {
          for (Eigen::Index q = 0; q < k.cols(); ++q) k(a, q) /= d(a) + d(q);
        }
        kx[j] = sc[j].g * k * sc[j].g.transpose();
        symmetrize(kx[j]);
      }
      const Vector rhs = rp - apply_constraints(problem, kx) + a_wrdw;
      dir.dy = use_llt ? Vector(llt.solve(rhs)) : Vector(ldlt.solve(rhs));
      dir.ds = apply_adjoint(problem, dir.dy);
      dir.dx.resize(nb);
      for (std::size_t j = 0; j < nb; ++j) {
        dir.ds[j] = rd[j] - dir.ds[j];
        symmetrize(dir.ds[j]);
        dir.dx[j] = kx[j] - sc[j].w * dir.ds[j] * sc[j].w;
        symmetrize(dir.dx[j]);
      }
      return dir;
    };
    auto step_lengths = [&](const Direction& dir) {
      double ap = std::numeric_limits<double>::infinity();
      double ad = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < nb; ++j) {
        ap = std::min(ap, max_step(sc[j].lx, dir.dx[j]));
        ad = std::min(ad, max_step(sc[j].ls, dir.ds[j]));
      }
      return std::pair{ap, ad};
    };

    // Predictor (sigma = 0).
    BlockMatrix r(nb);
    for (std::size_t j = 0; j < nb; ++j) {
      r[j] = Matrix((-2.0 * sc[j].d.array().square()).matrix().asDiagonal());
    }
    const Direction pred = direction(r);
    auto [ap_aff, ad_aff] = step_lengths(pred);
    ap_aff = std::min(1.0, ap_aff);
    ad_aff = std::min(1.0, ad_aff);
    double mu_aff = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      mu_aff += ((it.x[j] + ap_aff * pred.dx[j]).array() * (it.s[j] + ad_aff * pred.ds[j]).array()).sum();
    }
    mu_aff /= total_order;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    // Corrector with the second-order term of the predictor.
    for (std::size_t j = 0; j < nb; ++j) {
      const Matrix dxt = sc[j].ginv * pred.dx[j] * sc[j].ginv.transpose();
      const Matrix dst = sc[j].g.transpose() * pred.ds[j] * sc[j].g;
      r[j] = -(dxt * dst + dst * dxt);
      r[j].diagonal().array() += 2.0 * sigma * mu - 2.0 * sc[j].d.array().square();
    }
    const Direction corr = direction(r);
    auto [ap, ad] = step_lengths(corr);
    ap = std::min(1.0, config.step_fraction * ap);
    ad = std::min(1.0, config.step_fraction * ad);

    for (std::size_t j = 0; j < nb; ++j) {
      it.x[j] += ap * corr.dx[j];
      it.s[j] += ad * corr.ds[j];
      symmetrize(it.x[j]);
      symmetrize(it.s[j]);
    }
    it.y += ad * corr.dy;

    if (ap < 1e-8 && ad < 1e-8) {
      if (++stalls >= 3) {
        result.status = IpmStatus::kStalled;
        break;
      }
    } else {
      stalls = 0;
    }
  }
  result.seconds = elapsed();
  return result;
}

}  // namespace l0relax::conic
