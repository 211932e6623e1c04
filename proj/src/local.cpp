/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "opf/local.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

namespace opf {

namespace {

// The lifted model splits balance equalities into +/- inequality pairs for
// the dual sign structure. A slack interior-point method on the split rows
// has unbounded paired multipliers, so the local solver works on the natural
// NLP: true equalities for the pairs, inequalities for the rest.
struct Nlp {
  int dim = 0;
  std::vector<const SymSparse*> eq_a;
  Vector eq_b;
  std::vector<const SymSparse*> in_a;
  Vector in_b;
};

Nlp split_to_nlp(const QcqpModel& model) {
  Nlp nlp;
  nlp.dim = model.dim();
  std::vector<double> eb, ib;
  const int m = static_cast<int>(model.constraints.size());
  std::vector<char> used(m, 0);
  for (int k = 0; k < m; ++k) {
    if (used[k]) continue;
    const auto& c = model.constraints[k];
    const auto kind = c.tag.kind;
    // upper/lower pairs that encode an equality collapse into one row
    auto pair_kind = [&](ConstraintKind up, ConstraintKind lo) {
      if (kind != up || k + 1 >= m) return false;
      const auto& d = model.constraints[k + 1];
      if (d.tag.kind != lo || d.tag.bus_id != c.tag.bus_id) return false;
      if (d.rhs != -c.rhs) return false;  // equality iff bounds coincide
      return true;
    };
    const bool eq = pair_kind(ConstraintKind::ActiveBalanceUpper,
                              ConstraintKind::ActiveBalanceLower) ||
                    pair_kind(ConstraintKind::ReactiveBalanceUpper,
                              ConstraintKind::ReactiveBalanceLower) ||
                    pair_kind(ConstraintKind::ActiveGenUpper,
                              ConstraintKind::ActiveGenLower) ||
                    pair_kind(ConstraintKind::ReactiveGenUpper,
                              ConstraintKind::ReactiveGenLower) ||
                    pair_kind(ConstraintKind::VmagUpper, ConstraintKind::VmagLower);
    if (eq) {
      nlp.eq_a.push_back(&c.a_matrix);
      eb.push_back(c.rhs);
      used[k] = used[k + 1] = 1;
    } else {
      nlp.in_a.push_back(&c.a_matrix);
      ib.push_back(c.rhs);
      used[k] = 1;
    }
  }
  nlp.eq_b = Eigen::Map<Vector>(eb.data(), static_cast<Eigen::Index>(eb.size()));
  nlp.in_b = Eigen::Map<Vector>(ib.data(), static_cast<Eigen::Index>(ib.size()));
  return nlp;
}

struct Residuals {
  double stat = 0.0, comp = 0.0, viol = 0.0;
};

// slack interior-point Newton iteration on the equality/inequality NLP
bool ipm_solve(const QcqpModel& model, const Nlp& nlp, Vector& x,
               const LocalOptions& opts, int* iters_used) {
  const int nx = nlp.dim;
  const int ne = static_cast<int>(nlp.eq_a.size());
  const int mi = static_cast<int>(nlp.in_a.size());
  const Matrix c_dense = model.c_matrix.to_dense();

  Vector h(ne), g(mi);
  Matrix je(ne, nx), ji(mi, nx);
  auto eval_all = [&](const Vector& xx, bool with_jac) {
    for (int k = 0; k < ne; ++k) {
      Vector ax = nlp.eq_a[k]->multiply(xx);
      h[k] = xx.dot(ax) - nlp.eq_b[k];
      if (with_jac) je.row(k) = 2.0 * ax;
    }
    for (int k = 0; k < mi; ++k) {
      Vector ax = nlp.in_a[k]->multiply(xx);
      g[k] = xx.dot(ax) - nlp.in_b[k];
      if (with_jac) ji.row(k) = 2.0 * ax;
    }
  };
  eval_all(x, true);

  Vector s(mi), lam = Vector::Ones(mi), nu = Vector::Zero(ne);
  for (int k = 0; k < mi; ++k) s[k] = std::max(1e-4, -g[k]);

  const double tight = std::min(opts.kkt_tol, 1e-10);
  bool acceptable = false;
  double best_err = std::numeric_limits<double>::infinity();
  int no_progress = 0;

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    if (iters_used) *iters_used = iter;
    Vector grad_f = 2.0 * (c_dense * x);
    Vector r_stat = grad_f + je.transpose() * nu + ji.transpose() * lam;
    const double scale = std::max({1.0, grad_f.cwiseAbs().maxCoeff(),
                                   lam.size() ? lam.cwiseAbs().maxCoeff() : 0.0,
                                   nu.size() ? nu.cwiseAbs().maxCoeff() : 0.0});

    Residuals r;
    r.stat = r_stat.cwiseAbs().maxCoeff() / scale;
    r.comp = mi ? s.cwiseProduct(lam).cwiseAbs().maxCoeff() / scale : 0.0;
    r.viol = ne ? h.cwiseAbs().maxCoeff() : 0.0;
    for (int k = 0; k < mi; ++k) r.viol = std::max(r.viol, g[k]);

    if (opts.verbosity > 1)
      std::printf("local it %3d stat %.2e comp %.2e viol %.2e mu %.2e\n", iter,
                  r.stat, r.comp, r.viol,
                  mi ? 0.1 * s.dot(lam) / std::max(1, mi) : 0.0);
    acceptable = r.stat <= opts.kkt_tol && r.comp <= opts.kkt_tol &&
                 r.viol <= opts.feasibility_tol;
    if (r.stat <= tight && r.comp <= tight && r.viol <= opts.feasibility_tol)
      return true;
    const double err = r.stat + r.comp + std::max(r.viol - opts.feasibility_tol, 0.0);
    if (err < 0.5 * best_err) {
      best_err = std::min(best_err, err);
      no_progress = 0;
    } else if (++no_progress >= 8) {
      return acceptable;
    }

    const double mu =
        mi ? std::max(1e-14, 0.1 * s.dot(lam) / std::max(1, mi)) : 0.0;

    // condensed Hessian over x
    Matrix hc = 2.0 * c_dense;
    for (int k = 0; k < ne; ++k)
      for (const Triplet& t : nlp.eq_a[k]->entries())
        hc(t.row, t.col) += 2.0 * nu[k] * t.value;
    for (int k = 0; k < mi; ++k) {
      for (const Triplet& t : nlp.in_a[k]->entries())
        hc(t.row, t.col) += 2.0 * lam[k] * t.value;
      hc.noalias() += (lam[k] / s[k]) * ji.row(k).transpose() * ji.row(k);
    }

    Vector r1 = -grad_f - je.transpose() * nu - ji.transpose() * lam;
    for (int k = 0; k < mi; ++k)
      r1 -= ji.row(k).transpose() * ((lam[k] * (g[k] + s[k]) + mu) / s[k] - lam[k]);

    // factor with a ramped shift until positive definite
    Eigen::LLT<Matrix> llt;
    double delta = 0.0;
    const double base = std::max(1e-12, hc.diagonal().cwiseAbs().mean());
    for (int attempt = 0; attempt < 14; ++attempt) {
      Matrix hreg = hc;
      if (delta > 0.0) hreg.diagonal().array() += delta;
      llt.compute(hreg);
      if (llt.info() == Eigen::Success) break;
      delta = delta == 0.0 ? 1e-8 * base : delta * 10.0;
    }
    if (llt.info() != Eigen::Success) return false;

    Vector dx, dnu = Vector::Zero(ne);
    if (ne > 0) {
      Matrix hej = llt.solve(je.transpose());           // Hc^{-1} Je'
      Matrix schur = je * hej;                          // Je Hc^{-1} Je'
      schur.diagonal().array() += 1e-12 * std::max(1.0, schur.diagonal().cwiseAbs().mean());
      Vector rhs_nu = je * llt.solve(r1) + h;           // Je Hc^{-1} r1 - (-h)
      Eigen::LLT<Matrix> sll(schur);
      if (sll.info() != Eigen::Success) return false;
      dnu = sll.solve(rhs_nu);
      dx = llt.solve(r1 - je.transpose() * dnu);
    } else {
      dx = llt.solve(r1);
    }

    Vector jdx = ji * dx;
    Vector dlam(mi), ds(mi);
    for (int k = 0; k < mi; ++k) {
      dlam[k] = (lam[k] / s[k]) * (jdx[k] + g[k]) + mu / s[k];
      // slack step from the linearized row J dx + ds = -(g+s); the
      // complementarity form divides by lambda and is unstable when a row
      // goes inactive
      ds[k] = -(g[k] + s[k]) - jdx[k];
    }

    const double tau = 0.995;
    double a_max = 1.0;
    for (int k = 0; k < mi; ++k) {
      if (ds[k] < 0.0) a_max = std::min(a_max, -tau * s[k] / ds[k]);
      if (dlam[k] < 0.0) a_max = std::min(a_max, -tau * lam[k] / dlam[k]);
    }

    // backtrack on the perturbed KKT residual; a barrier merit would reject
    // the very slack reductions the adaptive-mu step is built to take
    auto kkt_err = [&](const Vector& xx, const Vector& ss, const Vector& ll,
                       const Vector& nn) {
      eval_all(xx, true);
      Vector rs = 2.0 * (c_dense * xx) + je.transpose() * nn + ji.transpose() * ll;
      double e = rs.cwiseAbs().maxCoeff();
      for (int k = 0; k < ne; ++k) e = std::max(e, std::abs(h[k]));
      for (int k = 0; k < mi; ++k) {
        e = std::max(e, std::abs(g[k] + ss[k]));
        e = std::max(e, std::abs(ss[k] * ll[k] - mu));
      }
      return e;
    };

    const double err0 = kkt_err(x, s, lam, nu);
    double alpha = a_max;
    bool accepted = false;
    Vector xt, st, lt, nt;
    for (int ls = 0; ls < 30; ++ls) {
      xt = x + alpha * dx;
      st = s + alpha * ds;
      lt = lam + alpha * dlam;
      nt = nu + alpha * dnu;
      bool interior = true;
      for (int k = 0; k < mi; ++k)
        if (st[k] <= 0.0 || lt[k] <= 0.0) { interior = false; break; }
      if (interior && kkt_err(xt, st, lt, nt) <= (1.0 - 1e-4 * alpha) * err0) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
      if (alpha < 1e-12) break;
    }
    if (!accepted) return acceptable;
    if (opts.verbosity > 2)
      std::printf("          a_max %.2e alpha %.2e\n", a_max, alpha);

    x = xt;
    s = st;
    lam = lt.cwiseMax(1e-14);
    nu = nt;
    eval_all(x, true);
  }
  return acceptable;
}

// augmented Lagrangian fallback: equality terms are quadratic penalties with
// free multipliers, inequalities use the clipped form
bool al_solve(const QcqpModel& model, const Nlp& nlp, Vector& x,
              const LocalOptions& opts) {
  const int ne = static_cast<int>(nlp.eq_a.size());
  const int mi = static_cast<int>(nlp.in_a.size());
  const Matrix c_dense = model.c_matrix.to_dense();

  Vector nu = Vector::Zero(ne), lam = Vector::Zero(mi);
  double rho = 10.0;
  double best_viol = std::numeric_limits<double>::infinity();

  Vector h(ne), g(mi);
  auto eval_cons = [&](const Vector& xx) {
    for (int k = 0; k < ne; ++k) h[k] = nlp.eq_a[k]->quad_form(xx) - nlp.eq_b[k];
    for (int k = 0; k < mi; ++k) g[k] = nlp.in_a[k]->quad_form(xx) - nlp.in_b[k];
  };

  auto psi = [&](const Vector& xx) {
    eval_cons(xx);
    double val = model.c_matrix.quad_form(xx);
    for (int k = 0; k < ne; ++k) val += nu[k] * h[k] + 0.5 * rho * h[k] * h[k];
    for (int k = 0; k < mi; ++k) {
      const double t = std::max(0.0, lam[k] + rho * g[k]);
      val += (t * t - lam[k] * lam[k]) / (2.0 * rho);
    }
    return val;
  };

  for (int outer = 0; outer < 30; ++outer) {
    for (int inner = 0; inner < 50; ++inner) {
      eval_cons(x);
      Vector grad = 2.0 * (c_dense * x);
      Matrix hess = 2.0 * c_dense;
      for (int k = 0; k < ne; ++k) {
        Vector ax = 2.0 * nlp.eq_a[k]->multiply(x);
        const double w = nu[k] + rho * h[k];
        grad += w * ax;
        hess.noalias() += rho * ax * ax.transpose();
        for (const Triplet& t : nlp.eq_a[k]->entries())
          hess(t.row, t.col) += 2.0 * w * t.value;
      }
      for (int k = 0; k < mi; ++k) {
        const double w = std::max(0.0, lam[k] + rho * g[k]);
        if (w <= 0.0) continue;
        Vector ax = 2.0 * nlp.in_a[k]->multiply(x);
        grad += w * ax;
        hess.noalias() += rho * ax * ax.transpose();
        for (const Triplet& t : nlp.in_a[k]->entries())
          hess(t.row, t.col) += 2.0 * w * t.value;
      }
      if (grad.cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, rho)) break;

      Eigen::LLT<Matrix> llt;
      Matrix hreg = hess;
      double delta = 1e-8 * std::max(1.0, hess.diagonal().cwiseAbs().mean());
      for (int attempt = 0; attempt < 12; ++attempt) {
        llt.compute(hreg);
        if (llt.info() == Eigen::Success) break;
        hreg.diagonal().array() += delta;
        delta *= 10.0;
      }
      if (llt.info() != Eigen::Success) return false;
      Vector dx = -llt.solve(grad);

      const double p0 = psi(x);
      double alpha = 1.0;
      for (int ls = 0; ls < 40; ++ls) {
        if (psi(x + alpha * dx) < p0 - 1e-12 * alpha) break;
        alpha *= 0.5;
      }
      x += alpha * dx;
    }

    eval_cons(x);
    double viol = ne ? h.cwiseAbs().maxCoeff() : 0.0;
    for (int k = 0; k < mi; ++k) viol = std::max(viol, g[k]);
    for (int k = 0; k < ne; ++k) nu[k] += rho * h[k];
    for (int k = 0; k < mi; ++k) lam[k] = std::max(0.0, lam[k] + rho * g[k]);
    if (viol <= opts.feasibility_tol) {
      Vector grad = 2.0 * (c_dense * x);
      for (int k = 0; k < ne; ++k) grad += nu[k] * 2.0 * nlp.eq_a[k]->multiply(x);
      for (int k = 0; k < mi; ++k)
        if (lam[k] > 0.0) grad += lam[k] * 2.0 * nlp.in_a[k]->multiply(x);
      const double scale = std::max({1.0, nu.size() ? nu.cwiseAbs().maxCoeff() : 0.0,
                                     lam.size() ? lam.cwiseAbs().maxCoeff() : 0.0});
      if (grad.cwiseAbs().maxCoeff() <= 1e-4 * scale) return true;
    }
    if (viol > 0.25 * best_viol) rho *= 3.0;
    best_viol = std::min(best_viol, viol);
  }
  return false;
}

}  // namespace

Vector flat_start(const QcqpModel& model) {
  Vector x = Vector::Zero(model.dim());
  for (int i = 0; i < model.n; ++i) x[i] = std::min(1.0, model.upper[i]);
  return x;
}

LocalPoint local_solve(const QcqpModel& model, const Vector& start,
                       const LocalOptions& opts) {
  LocalPoint p;
  if (start.size() != model.dim()) {
    p.converged = false;
    return p;
  }
  const Nlp nlp = split_to_nlp(model);

  Vector x = start;
  int iters = 0;
  bool ok = ipm_solve(model, nlp, x, opts, &iters);
  if (!ok) {
    Vector x2 = start;
    if (al_solve(model, nlp, x2, opts)) {
      x = x2;
      ok = true;
    }
  }

  EvalResult ev = evaluate(model, x);
  p.x = x;
  p.objective = ev.objective;
  p.max_violation = ev.max_violation;
  p.iterations = iters;
  p.converged = ok && ev.max_violation <= opts.feasibility_tol;
  return p;
}

}  // namespace opf
