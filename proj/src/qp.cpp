/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "opf/qp.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "opf/errors.hpp"

namespace opf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using SpMat = Eigen::SparseMatrix<double>;
using SpTriplet = Eigen::Triplet<double>;

struct Equilibration {
  Vector dz;   // variable scaling
  Vector er;   // row scaling
  double c = 1.0;  // cost scaling
};

// Modified Ruiz equilibration on [[P, G'], [G, 0]].
Equilibration ruiz(const QpProblem& p) {
  const int n = p.nvar, m = p.nrows;
  Equilibration eq;
  eq.dz = Vector::Ones(n);
  eq.er = Vector::Ones(m);

  Vector col(n), row(m);
  for (int it = 0; it < 10; ++it) {
    col.setZero();
    row.setZero();
    for (const Triplet& t : p.p.entries()) {
      const double v = std::abs(eq.dz[t.row] * t.value * eq.dz[t.col]);
      col[t.row] = std::max(col[t.row], v);
      col[t.col] = std::max(col[t.col], v);
    }
    for (const Triplet& t : p.g) {
      const double v = std::abs(eq.er[t.row] * t.value * eq.dz[t.col]);
      col[t.col] = std::max(col[t.col], v);
      row[t.row] = std::max(row[t.row], v);
    }
    for (int i = 0; i < n; ++i)
      eq.dz[i] *= 1.0 / std::sqrt(std::clamp(col[i], 1e-8, 1e8));
    for (int k = 0; k < m; ++k)
      eq.er[k] *= 1.0 / std::sqrt(std::clamp(row[k], 1e-8, 1e8));
  }

  // cost scaling as in operator-splitting practice: balance P and q
  double pnorm = 0.0;
  for (const Triplet& t : p.p.entries())
    pnorm = std::max(pnorm, std::abs(eq.dz[t.row] * t.value * eq.dz[t.col]));
  double qnorm = 0.0;
  for (int i = 0; i < n; ++i) qnorm = std::max(qnorm, std::abs(eq.dz[i] * p.q[i]));
  eq.c = 1.0 / std::max(1.0, std::max(pnorm, qnorm));
  return eq;
}

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::IterLimit: return "iter_limit";
  }
  return "unknown";
}

std::array<McCormickRow, 4> mccormick_rows(double lo_i, double hi_i, double lo_j,
                                           double hi_j) {
  if (lo_i > hi_i || lo_j > hi_j) throw EmptyBox("mccormick_rows: inverted interval");
  std::array<McCormickRow, 4> rows;
  // y <= hi_j x_i + lo_i x_j - lo_i hi_j
  rows[0] = {1.0, -hi_j, -lo_i, -lo_i * hi_j};
  // y <= lo_j x_i + hi_i x_j - hi_i lo_j
  rows[1] = {1.0, -lo_j, -hi_i, -hi_i * lo_j};
  // y >= hi_j x_i + hi_i x_j - hi_i hi_j
  rows[2] = {-1.0, hi_j, hi_i, hi_i * hi_j};
  // y >= lo_j x_i + lo_i x_j - lo_i lo_j
  rows[3] = {-1.0, lo_j, lo_i, lo_i * lo_j};
  return rows;
}

QpSolution solve_qp(const QpProblem& p, const QpOptions& opts, const Vector* warm_z,
                    const Vector* warm_duals) {
  const int n = p.nvar, m = p.nrows;
  QpSolution sol;
  sol.z = Vector::Zero(n);
  sol.row_duals = Vector::Zero(m);

  // unscaled operators for residual checks
  kernels::CsrMatrix g_csr = kernels::CsrMatrix::from_triplets(m, n, p.g);
  kernels::CsrMatrix gt_csr = g_csr.transposed();

  const Equilibration eq = ruiz(p);

  // scaled data
  std::vector<Triplet> gs = p.g;
  for (Triplet& t : gs) t.value *= eq.er[t.row] * eq.dz[t.col];
  kernels::CsrMatrix gbar = kernels::CsrMatrix::from_triplets(m, n, gs);
  Vector qbar = eq.c * eq.dz.cwiseProduct(p.q);
  Vector lbar(m), ubar(m);
  for (int k = 0; k < m; ++k) {
    lbar[k] = p.row_lower[k] * eq.er[k];
    ubar[k] = p.row_upper[k] * eq.er[k];
  }

  const double sigma = 1e-6;
  double rho_bar = 0.1;
  Vector rho(m), rho_inv(m);
  auto set_rho = [&](double r) {
    for (int k = 0; k < m; ++k) {
      const bool equality = std::isfinite(p.row_lower[k]) &&
                            std::isfinite(p.row_upper[k]) &&
                            p.row_lower[k] == p.row_upper[k];
      rho[k] = equality ? 1e3 * r : r;
      rho_inv[k] = 1.0 / rho[k];
    }
  };
  set_rho(rho_bar);

  // KKT = [[cDPD + sigma I, Gbar'], [Gbar, -diag(1/rho)]]
  SpMat kkt(n + m, n + m);
  std::vector<SpTriplet> ktrip;
  auto assemble_kkt = [&]() {
    ktrip.clear();
    for (const Triplet& t : p.p.entries()) {
      const double v = eq.c * eq.dz[t.row] * t.value * eq.dz[t.col];
      ktrip.emplace_back(t.row, t.col, v);
    }
    for (int i = 0; i < n; ++i) ktrip.emplace_back(i, i, sigma);
    for (const Triplet& t : gs) {
      ktrip.emplace_back(n + t.row, t.col, t.value);
      ktrip.emplace_back(t.col, n + t.row, t.value);
    }
    for (int k = 0; k < m; ++k) ktrip.emplace_back(n + k, n + k, -rho_inv[k]);
    kkt.setFromTriplets(ktrip.begin(), ktrip.end());
  };
  assemble_kkt();

  Eigen::SimplicialLDLT<SpMat> ldlt;
  ldlt.analyzePattern(kkt);
  ldlt.factorize(kkt);
  if (ldlt.info() != Eigen::Success) {
    sol.status = QpStatus::IterLimit;
    return sol;
  }

  // iterates (scaled)
  Vector z = Vector::Zero(n), s = Vector::Zero(m), w = Vector::Zero(m);
  if (opts.warm_start && warm_z && warm_z->size() == n) {
    z = warm_z->cwiseQuotient(eq.dz);
    Vector gz(m);
    kernels::csr_matvec(gbar, z.data(), gz.data(), false);
    s = gz.cwiseMax(lbar).cwiseMin(ubar);
    if (warm_duals && warm_duals->size() == m)
      w = eq.c * warm_duals->cwiseQuotient(eq.er);
  } else {
    s = lbar.cwiseMax(Vector::Zero(m)).cwiseMin(ubar);
  }

  const double gamma = 1.6;
  Vector rhs(n + m), sol_kkt(n + m), ztil(n), stil(m), gz(m), delta_w(m);
  Vector zu(n), su(m), wu(m), gzu(m), gtw(n), pz(n);
  Vector w_window = w;  // dual iterate 25 checks ago, for the certificate

  auto unscale = [&]() {
    zu = eq.dz.cwiseProduct(z);
    su = s.cwiseQuotient(eq.er);
    wu = eq.er.cwiseProduct(w) / eq.c;
  };

  int iter = 0;
  bool converged = false;
  int last_refactor_check = 0;

  for (iter = 1; iter <= opts.max_iterations; ++iter) {
    rhs.head(n) = sigma * z - qbar;
    rhs.tail(m) = s - rho_inv.cwiseProduct(w);
    sol_kkt = ldlt.solve(rhs);
    ztil = sol_kkt.head(n);
    stil = s + rho_inv.cwiseProduct(sol_kkt.tail(m) - w);

    const Vector z_prev = z;
    const Vector w_prev = w;
    z = gamma * ztil + (1.0 - gamma) * z_prev;
    Vector s_arg = gamma * stil + (1.0 - gamma) * s + rho_inv.cwiseProduct(w);
    Vector s_new = s_arg.cwiseMax(lbar).cwiseMin(ubar);
    w += rho.cwiseProduct(gamma * stil + (1.0 - gamma) * s - s_new);
    s = s_new;

    if (iter % 25 != 0 && iter != opts.max_iterations) continue;

    unscale();
    kernels::csr_matvec(g_csr, zu.data(), gzu.data(), false);
    kernels::csr_matvec(gt_csr, wu.data(), gtw.data(), false);
    pz = p.p.multiply(zu);

    const double rp = inf_norm(gzu - su);
    const double rd = inf_norm(pz + p.q + gtw);
    const double eps_p =
        opts.eps_abs + opts.eps_rel * std::max(inf_norm(gzu), inf_norm(su));
    const double eps_d =
        opts.eps_abs +
        opts.eps_rel * std::max({inf_norm(pz), inf_norm(p.q), inf_norm(gtw)});

    if (opts.verbosity > 1)
      std::printf("qp it %6d  rp %.3e  rd %.3e  rho %.2e\n", iter, rp, rd, rho_bar);

    if (rp <= eps_p && rd <= eps_d) {
      converged = true;
      sol.primal_residual = rp;
      sol.dual_residual = rd;
      break;
    }

    // primal infeasibility certificate from the dual increment, tried on the
    // one-step and the windowed direction
    auto certifies = [&](const Vector& dw_scaled) {
      delta_w = eq.er.cwiseProduct(dw_scaled) / eq.c;
      const double dwn = inf_norm(delta_w);
      if (dwn <= 1e-14) return false;
      Vector gtdw(n);
      kernels::csr_matvec(gt_csr, delta_w.data(), gtdw.data(), false);
      const double eps_inf = 1e-8 * dwn;
      if (inf_norm(gtdw) > eps_inf) return false;
      double support = 0.0;
      for (int k = 0; k < m; ++k) {
        const double d = delta_w[k];
        if (d > 0.0) {
          if (!std::isfinite(p.row_upper[k])) return false;
          support += p.row_upper[k] * d;
        } else if (d < 0.0) {
          if (!std::isfinite(p.row_lower[k])) return false;
          support += p.row_lower[k] * d;
        }
      }
      return support <= -eps_inf;
    };
    if (certifies(w - w_prev) || certifies(w - w_window)) {
      sol.status = QpStatus::Infeasible;
      sol.iterations = iter;
      return sol;
    }
    w_window = w;

    // adaptive rho
    if (iter - last_refactor_check >= 100) {
      const double rp_rel = rp / std::max(1e-12, std::max(inf_norm(gzu), inf_norm(su)));
      const double rd_rel =
          rd / std::max(1e-12, std::max({inf_norm(pz), inf_norm(p.q), inf_norm(gtw)}));
      const double ratio = std::sqrt(rp_rel / std::max(1e-16, rd_rel));
      if (ratio > 5.0 || ratio < 0.2) {
        rho_bar = std::clamp(rho_bar * ratio, 1e-6, 1e6);
        set_rho(rho_bar);
        assemble_kkt();
        ldlt.factorize(kkt);
        if (ldlt.info() != Eigen::Success) break;
        last_refactor_check = iter;
      }
    }
  }

  unscale();
  sol.z = zu;
  sol.row_duals = wu;
  sol.iterations = std::min(iter, opts.max_iterations);
  sol.status = converged ? QpStatus::Optimal : QpStatus::IterLimit;

  if (converged && opts.polish) {
    // active rows: slack pinned at a bound with the right dual sign
    kernels::csr_matvec(g_csr, zu.data(), gzu.data(), false);
    std::vector<int> active;
    std::vector<double> target;
    for (int k = 0; k < m; ++k) {
      const bool lower_act = std::isfinite(p.row_lower[k]) && wu[k] < 0.0;
      const bool upper_act = std::isfinite(p.row_upper[k]) && wu[k] > 0.0;
      if (lower_act) {
        active.push_back(k);
        target.push_back(p.row_lower[k]);
      } else if (upper_act) {
        active.push_back(k);
        target.push_back(p.row_upper[k]);
      }
    }
    const int na = static_cast<int>(active.size());
    if (na > 0) {
      const double delta = 1e-9;
      SpMat kp(n + na, n + na);
      std::vector<SpTriplet> tr;
      for (const Triplet& t : p.p.entries()) tr.emplace_back(t.row, t.col, t.value);
      for (int i = 0; i < n; ++i) tr.emplace_back(i, i, delta);
      for (int a = 0; a < na; ++a) {
        const int k = active[a];
        for (std::int64_t e = g_csr.ptr[k]; e < g_csr.ptr[k + 1]; ++e) {
          tr.emplace_back(n + a, g_csr.idx[e], g_csr.val[e]);
          tr.emplace_back(g_csr.idx[e], n + a, g_csr.val[e]);
        }
        tr.emplace_back(n + a, n + a, -delta);
      }
      kp.setFromTriplets(tr.begin(), tr.end());
      Eigen::SimplicialLDLT<SpMat> pl;
      pl.compute(kp);
      if (pl.info() == Eigen::Success) {
        Vector prhs(n + na);
        prhs.head(n) = -p.q;
        for (int a = 0; a < na; ++a) prhs[n + a] = target[a];
        Vector psol = pl.solve(prhs);
        // a couple of refinement sweeps against the unregularized system
        for (int r = 0; r < 3; ++r) {
          Vector resid(n + na);
          resid.head(n) = -p.q - p.p.multiply(psol.head(n));
          for (int a = 0; a < na; ++a) {
            const int k = active[a];
            double gv = 0.0;
            for (std::int64_t e = g_csr.ptr[k]; e < g_csr.ptr[k + 1]; ++e)
              gv += g_csr.val[e] * psol[g_csr.idx[e]];
            resid[n + a] = target[a] - gv;
          }
          // subtract G_act' nu from the stationarity residual
          for (int a = 0; a < na; ++a) {
            const int k = active[a];
            for (std::int64_t e = g_csr.ptr[k]; e < g_csr.ptr[k + 1]; ++e)
              resid[g_csr.idx[e]] -= g_csr.val[e] * psol[n + a];
          }
          psol += pl.solve(resid);
        }
        Vector z_pol = psol.head(n);
        Vector w_pol = Vector::Zero(m);
        for (int a = 0; a < na; ++a) w_pol[active[a]] = psol[n + a];

        Vector gz_pol(m), gtw_pol(n);
        kernels::csr_matvec(g_csr, z_pol.data(), gz_pol.data(), false);
        kernels::csr_matvec(gt_csr, w_pol.data(), gtw_pol.data(), false);
        double viol = 0.0;
        for (int k = 0; k < m; ++k) {
          if (std::isfinite(p.row_lower[k]))
            viol = std::max(viol, p.row_lower[k] - gz_pol[k]);
          if (std::isfinite(p.row_upper[k]))
            viol = std::max(viol, gz_pol[k] - p.row_upper[k]);
        }
        const double rd_pol = inf_norm(p.p.multiply(z_pol) + p.q + gtw_pol);
        if (viol <= std::max(sol.primal_residual, opts.eps_abs) &&
            rd_pol <= std::max(sol.dual_residual, opts.eps_abs)) {
          sol.z = z_pol;
          sol.row_duals = w_pol;
          sol.primal_residual = viol;
          sol.dual_residual = rd_pol;
          sol.polished = true;
        }
      }
    }
  }

  sol.value = 0.5 * sol.z.dot(p.p.multiply(sol.z)) + p.q.dot(sol.z);
  return sol;
}

NodeRelaxation::NodeRelaxation(const Reformulation& r, const QcqpModel& model)
    : reform_(&r), nx_(r.dim) {
  const int nx = nx_;
  const int ny = static_cast<int>(r.pair_set.size());
  const int m = static_cast<int>(model.constraints.size());

  problem_.nvar = nx + ny;
  // objective: x'S*x + residual-weights . y  ->  P = 2 S*, q on the y block
  SymSparse pmat(problem_.nvar);
  for (const Triplet& t : r.s_star.entries())
    if (t.row <= t.col) pmat.add(t.row, t.col, 2.0 * t.value);
  pmat.compress();
  problem_.p = std::move(pmat);
  problem_.q = Vector::Zero(problem_.nvar);
  problem_.q.tail(ny) = r.residual_pair_weights;

  std::vector<double> lo, up;
  // static rows <A_k, Y> <= b_k over the y block
  for (int k = 0; k < m; ++k) {
    for (const Triplet& t : model.constraints[k].a_matrix.entries()) {
      if (t.row > t.col) continue;
      const int e = r.pair_index(t.row, t.col);
      const double wgt = (t.row == t.col ? 1.0 : 2.0) * t.value;
      problem_.g.push_back({k, nx + e, wgt});
    }
    lo.push_back(-kInf);
    up.push_back(model.constraints[k].rhs);
  }

  // McCormick rows, coefficients rewritten per node
  int row = m;
  for (int e = 0; e < ny; ++e) {
    const auto [i, j] = r.pair_set[e];
    PairSlots ps;
    ps.i = i;
    ps.j = j;
    for (int c = 0; c < 4; ++c) {
      ps.row_base[c] = problem_.g.size();
      ps.row_id[c] = row;
      problem_.g.push_back({row, nx + e, 0.0});
      problem_.g.push_back({row, i, 0.0});
      if (i != j) problem_.g.push_back({row, j, 0.0});
      lo.push_back(-kInf);
      up.push_back(0.0);
      ++row;
    }
    slots_.push_back(ps);
  }

  // box rows on x
  for (int t = 0; t < nx; ++t) {
    problem_.g.push_back({row, t, 1.0});
    lo.push_back(r.lower[t]);
    up.push_back(r.upper[t]);
    ++row;
  }

  problem_.nrows = row;
  problem_.row_lower = Eigen::Map<Vector>(lo.data(), static_cast<Eigen::Index>(lo.size()));
  problem_.row_upper = Eigen::Map<Vector>(up.data(), static_cast<Eigen::Index>(up.size()));
}

QpSolution NodeRelaxation::solve(const Vector& lower, const Vector& upper,
                                 const QpOptions& opts, const Vector* warm_z) const {
  const int nx = nx_;
  if (lower.size() != nx || upper.size() != nx)
    throw DimensionMismatch("node relaxation: box length mismatch");
  for (int t = 0; t < nx; ++t)
    if (lower[t] > upper[t]) throw EmptyBox("node relaxation: inverted box interval");

  // refresh McCormick coefficients for this box
  for (const PairSlots& ps : slots_) {
    const auto rows = mccormick_rows(lower[ps.i], upper[ps.i], lower[ps.j], upper[ps.j]);
    for (int c = 0; c < 4; ++c) {
      std::size_t base = ps.row_base[c];
      problem_.g[base].value = rows[c].coef_y;
      if (ps.i != ps.j) {
        problem_.g[base + 1].value = rows[c].coef_xi;
        problem_.g[base + 2].value = rows[c].coef_xj;
      } else {
        problem_.g[base + 1].value = rows[c].coef_xi + rows[c].coef_xj;
      }
      problem_.row_upper[ps.row_id[c]] = rows[c].rhs;
    }
  }
  // refresh box rows (they sit at the tail)
  const int first_box_row = problem_.nrows - nx;
  for (int t = 0; t < nx; ++t) {
    problem_.row_lower[first_box_row + t] = lower[t];
    problem_.row_upper[first_box_row + t] = upper[t];
  }

  Vector warm;
  const Vector* warm_ptr = nullptr;
  if (warm_z && warm_z->size() == problem_.nvar) {
    warm = *warm_z;
    // project the x block into the node box
    for (int t = 0; t < nx; ++t) warm[t] = std::clamp(warm[t], lower[t], upper[t]);
    warm_ptr = &warm;
  }

  QpSolution sol = solve_qp(problem_, opts, warm_ptr);
  sol.x_bar = sol.z.head(nx);
  sol.y_bar = sol.z.tail(problem_.nvar - nx);
  return sol;
}

QpSolution solve_node_relaxation(const NodeRelaxation& node, const Vector& lower,
                                 const Vector& upper, const QpOptions& opts,
                                 const Vector* warm_z) {
  return node.solve(lower, upper, opts, warm_z);
}

std::pair<std::pair<int, int>, double> bilinear_violation(const Reformulation& r,
                                                          const QpSolution& sol) {
  if (sol.status != QpStatus::Optimal)
    throw NotOptimal("bilinear_violation: relaxation is not optimal");
  std::pair<int, int> arg{0, 0};
  double best = -1.0;
  for (std::size_t e = 0; e < r.pair_set.size(); ++e) {
    const auto [i, j] = r.pair_set[e];
    const double v =
        std::abs(sol.y_bar[static_cast<Eigen::Index>(e)] - sol.x_bar[i] * sol.x_bar[j]);
    if (v > best) {
      best = v;
      arg = {i, j};
    }
  }
  if (best < 0.0) best = 0.0;
  return {arg, best};
}

}  // namespace opf
