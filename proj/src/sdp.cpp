/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "opf/sdp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "opf/errors.hpp"
#include "opf/kernels.hpp"

namespace opf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// largest beta with M + beta*D >= 0, for M = L L' > 0
double max_psd_step(const Eigen::LLT<Matrix>& llt, const Matrix& d) {
  Matrix t = llt.matrixL().solve(d);
  t = llt.matrixL().solve(t.transpose()).transpose();
  t = 0.5 * (t + t.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(t, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  return lmin < 0.0 ? -1.0 / lmin : kInf;
}

double max_positive_step(const Vector& v, const Vector& dv) {
  double beta = kInf;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) beta = std::min(beta, -v[i] / dv[i]);
  return beta;
}

struct Scaling {
  Matrix r, rinv, w;
  Vector lambda;
  bool ok = false;
};

// Nesterov-Todd point: W Z W = X with W = R R', lambda the scaled spectrum.
Scaling nt_scaling(const Matrix& x, const Matrix& z) {
  Scaling s;
  Eigen::LLT<Matrix> lx(x), lz(z);
  if (lx.info() != Eigen::Success || lz.info() != Eigen::Success) return s;
  Matrix lxm = lx.matrixL();
  Matrix lzm = lz.matrixL();
  Eigen::BDCSVD<Matrix> svd(lzm.transpose() * lxm,
                            Eigen::ComputeFullU | Eigen::ComputeFullV);
  s.lambda = svd.singularValues();
  if (s.lambda.minCoeff() <= 0.0) return s;
  Vector inv_sqrt = s.lambda.cwiseSqrt().cwiseInverse();
  s.r = lxm * svd.matrixV() * inv_sqrt.asDiagonal();
  s.rinv = s.lambda.cwiseSqrt().asDiagonal() * svd.matrixV().transpose() *
           lxm.triangularView<Eigen::Lower>().solve(Matrix::Identity(x.rows(), x.rows()));
  s.w = s.r * s.r.transpose();
  s.ok = true;
  return s;
}

}  // namespace

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::Infeasible: return "infeasible";
    case SdpStatus::IterLimit: return "iter_limit";
    case SdpStatus::NumericalTrouble: return "numerical_trouble";
  }
  return "unknown";
}

SdpResult solve_sdp_problem(const SdpProblem& p, const SdpOptions& opts,
                            const Vector* alpha0) {
  const int n = p.dim;
  const int m = static_cast<int>(p.a.size());
  std::vector<char> is_eq = p.is_equality;
  if (is_eq.empty()) is_eq.assign(m, 0);
  int m_ineq = 0;
  for (int k = 0; k < m; ++k) m_ineq += is_eq[k] ? 0 : 1;

  std::vector<const SymSparse*> mats;
  for (const SymSparse& a : p.a) mats.push_back(&a);
  const ConstraintPack pack = ConstraintPack::pack(mats);

  // objective scaling keeps the SDP and LP cone blocks comparable
  double cscale = 1.0;
  for (const Triplet& t : p.c.entries()) cscale = std::max(cscale, std::abs(t.value));
  const Matrix c_dense = p.c.to_dense() / cscale;

  const double bnorm = 1.0 + p.b.norm();
  const double cnorm = 1.0 + c_dense.norm();

  SdpResult res;
  res.status = SdpStatus::IterLimit;
  res.primal_infeasibility = kInf;
  res.dual_infeasibility = kInf;
  res.complementarity = kInf;

  // start: X = tau I, inequality slacks floored by row scale; duals from
  // alpha0 when given (equality rows take the given value as-is)
  Matrix x = opts.tau0 * Matrix::Identity(n, n);
  Vector s = Vector::Zero(m);   // slack, zero and unused on equality rows
  Vector alpha = Vector::Zero(m);
  Vector tr_a(m);
  kernels::inner_products(pack, Matrix::Identity(n, n), tr_a, opts.parallel);
  for (int k = 0; k < m; ++k)
    if (!is_eq[k])
      s[k] = std::max({1.0, 0.1 * std::abs(p.b[k]), p.b[k] - opts.tau0 * tr_a[k]});
  if (alpha0 && alpha0->size() == m) {
    alpha = *alpha0 / cscale;
    for (int k = 0; k < m; ++k)
      if (!is_eq[k]) alpha[k] = std::max(alpha[k], 1e-8);
  } else {
    for (int k = 0; k < m; ++k) alpha[k] = is_eq[k] ? 0.0 : 1.0;
  }
  Matrix z = c_dense;
  for (int k = 0; k < m; ++k)
    for (const Triplet& t : p.a[k].entries()) z(t.row, t.col) += alpha[k] * t.value;
  z = 0.5 * (z + z.transpose());
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(z, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < 1e-6) z += (1e-6 - lmin) * Matrix::Identity(n, n);
    // the identity bump leaves Z != C + sum(alpha A); the dual residual
    // tracks it and the iteration closes it
  }

  Vector rp(m), av(m), u1(m), u2(m);
  Matrix rd(n, n), sum_aa(n, n);
  int consecutive_short = 0;

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    res.iterations = iter;

    kernels::inner_products(pack, x, av, opts.parallel);
    rp = p.b - av - s;

    sum_aa.setZero();
    for (int k = 0; k < m; ++k)
      for (const Triplet& t : p.a[k].entries())
        sum_aa(t.row, t.col) += alpha[k] * t.value;
    rd = c_dense + 0.5 * (sum_aa + sum_aa.transpose()) - z;

    const double pobj = cscale * (c_dense.cwiseProduct(x)).sum();
    const double dobj = cscale * -p.b.dot(alpha);
    double mu_sum = (x.cwiseProduct(z)).sum();
    for (int k = 0; k < m; ++k)
      if (!is_eq[k]) mu_sum += s[k] * alpha[k];
    const double mu = mu_sum / (n + std::max(1, m_ineq));

    res.primal_infeasibility = rp.norm() / bnorm;
    res.dual_infeasibility = rd.norm() / cnorm;
    res.complementarity = std::abs(pobj - dobj) / std::max(1.0, std::abs(pobj));
    res.primal_value = pobj;
    res.dual_value = dobj;

    if (opts.verbosity > 0)
      std::printf("sdp it %3d  pobj % .8e  dobj % .8e  pinf %.2e  dinf %.2e  mu %.2e\n",
                  iter, pobj, dobj, res.primal_infeasibility, res.dual_infeasibility, mu);

    if (res.primal_infeasibility <= opts.tolerance &&
        res.dual_infeasibility <= opts.tolerance &&
        res.complementarity <= opts.tolerance) {
      res.status = SdpStatus::Optimal;
      break;
    }
    // dual objective exploding with a feasible dual iterate: primal infeasible
    if (dobj > 1e10 * std::max(1.0, std::abs(pobj)) &&
        res.dual_infeasibility <= 1e-8) {
      res.status = SdpStatus::Infeasible;
      break;
    }

    Scaling sc = nt_scaling(x, z);
    if (!sc.ok) {
      res.status = SdpStatus::NumericalTrouble;
      break;
    }
    // LP scaling on inequality rows; equality rows have no barrier term
    Vector d_lp = Vector::Zero(m), lam_lp = Vector::Zero(m);
    for (int k = 0; k < m; ++k) {
      if (is_eq[k]) continue;
      d_lp[k] = std::sqrt(s[k] / alpha[k]);
      lam_lp[k] = std::sqrt(s[k] * alpha[k]);
    }

    // Schur complement M = [<A_j, W A_k W>] + diag(s/alpha on inequalities)
    Matrix big_m;
    kernels::schur_assemble(pack, sc.w, big_m, opts.parallel);
    for (int k = 0; k < m; ++k)
      if (!is_eq[k]) big_m(k, k) += d_lp[k] * d_lp[k];

    Eigen::LLT<Matrix> mllt;
    double reg = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Matrix mreg = big_m;
      if (reg > 0.0) mreg.diagonal().array() += reg * big_m.diagonal().mean();
      mllt.compute(mreg);
      if (mllt.info() == Eigen::Success) break;
      reg = reg == 0.0 ? 1e-13 : reg * 100.0;
    }
    if (mllt.info() != Eigen::Success) {
      res.status = SdpStatus::NumericalTrouble;
      break;
    }

    const Matrix wrdw = sc.w * rd * sc.w;
    kernels::inner_products(pack, wrdw, u1, opts.parallel);

    Eigen::LLT<Matrix> xllt(x), zllt(z);
    if (xllt.info() != Eigen::Success || zllt.info() != Eigen::Success) {
      res.status = SdpStatus::NumericalTrouble;
      break;
    }

    auto solve_direction = [&](const Matrix& dmat, const Vector& dlp, Matrix& dx,
                               Matrix& dz, Vector& ds, Vector& dalpha) {
      const Matrix rdr = sc.r * dmat * sc.r.transpose();
      kernels::inner_products(pack, rdr, u2, opts.parallel);
      Vector q = u2 - u1 - rp;
      for (int k = 0; k < m; ++k)
        if (!is_eq[k]) q[k] += d_lp[k] * dlp[k];
      dalpha = mllt.solve(q);
      // one refinement sweep; the Schur system turns ill-conditioned as the
      // barrier parameter collapses
      dalpha += mllt.solve(q - big_m * dalpha);
      dz = rd;
      for (int k = 0; k < m; ++k)
        for (const Triplet& t : p.a[k].entries())
          dz(t.row, t.col) += dalpha[k] * t.value;
      dz = 0.5 * (dz + dz.transpose());
      dx = rdr - sc.w * dz * sc.w;
      dx = 0.5 * (dx + dx.transpose());
      ds.setZero(m);
      for (int k = 0; k < m; ++k)
        if (!is_eq[k]) ds[k] = d_lp[k] * dlp[k] - d_lp[k] * d_lp[k] * dalpha[k];
    };

    auto positive_part_step = [&](const Vector& v, const Vector& dv) {
      double beta = kInf;
      for (int k = 0; k < m; ++k)
        if (!is_eq[k] && dv[k] < 0.0) beta = std::min(beta, -v[k] / dv[k]);
      return beta;
    };

    // predictor: drive complementarity toward zero
    Matrix dmat_aff = (-sc.lambda).asDiagonal();
    Vector dlp_aff = -lam_lp;
    Matrix dx_a, dz_a;
    Vector ds_a, dalpha_a;
    solve_direction(dmat_aff, dlp_aff, dx_a, dz_a, ds_a, dalpha_a);

    const double eta = 0.99;
    double ap = std::min({1.0, eta * max_psd_step(xllt, dx_a),
                          eta * positive_part_step(s, ds_a)});
    double ad = std::min({1.0, eta * max_psd_step(zllt, dz_a),
                          eta * positive_part_step(alpha, dalpha_a)});

    double mu_aff_sum = ((x + ap * dx_a).cwiseProduct(z + ad * dz_a)).sum();
    for (int k = 0; k < m; ++k)
      if (!is_eq[k]) mu_aff_sum += (s[k] + ap * ds_a[k]) * (alpha[k] + ad * dalpha_a[k]);
    const double mu_aff = mu_aff_sum / (n + std::max(1, m_ineq));
    double sigma = std::pow(std::max(0.0, mu_aff / mu), 3);
    sigma = std::clamp(sigma, 1e-8, 1.0);

    // corrector with Mehrotra second-order term; near the barrier floor the
    // cross term is numerically unreliable, fall back to plain centering
    const bool use_soc = mu > 1e-7;
    Matrix rhs(n, n);
    if (use_soc) {
      const Matrix dxs = sc.rinv * dx_a * sc.rinv.transpose();
      const Matrix dzs = sc.r.transpose() * dz_a * sc.r;
      rhs = -0.5 * (dxs * dzs + dzs * dxs);
    } else {
      rhs.setZero();
      sigma = std::max(sigma, 0.1);
    }
    rhs.diagonal().array() += sigma * mu;
    rhs.diagonal() -= sc.lambda.cwiseProduct(sc.lambda);
    Matrix dmat(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        dmat(i, j) = 2.0 * rhs(i, j) / (sc.lambda[i] + sc.lambda[j]);
    Vector dlp = Vector::Zero(m);
    for (int k = 0; k < m; ++k) {
      if (is_eq[k]) continue;
      const double soc = use_soc ? ds_a[k] * dalpha_a[k] : 0.0;
      dlp[k] = (sigma * mu - lam_lp[k] * lam_lp[k] - soc) / lam_lp[k];
    }

    Matrix dx, dz;
    Vector ds, dalpha;
    solve_direction(dmat, dlp, dx, dz, ds, dalpha);

    ap = std::min({1.0, eta * max_psd_step(xllt, dx), eta * positive_part_step(s, ds)});
    ad = std::min({1.0, eta * max_psd_step(zllt, dz), eta * positive_part_step(alpha, dalpha)});
    if (opts.verbosity > 1)
      std::printf("        sigma %.2e  ap %.2e  ad %.2e%s\n", sigma, ap, ad,
                  use_soc ? "" : "  (centering)");

    x += ap * dx;
    s += ap * ds;
    z += ad * dz;
    alpha += ad * dalpha;
    x = 0.5 * (x + x.transpose());
    z = 0.5 * (z + z.transpose());

    if (std::min(ap, ad) < 1e-3) {
      if (++consecutive_short >= 6) {
        res.status = SdpStatus::NumericalTrouble;
        break;
      }
    } else {
      consecutive_short = 0;
    }
  }

  if (res.status == SdpStatus::IterLimit || res.status == SdpStatus::NumericalTrouble) {
    const bool acceptable = res.primal_infeasibility <= opts.accept_tolerance &&
                            res.dual_infeasibility <= opts.accept_tolerance &&
                            res.complementarity <= opts.accept_tolerance;
    if (acceptable) res.status = SdpStatus::Optimal;
  }

  res.x_matrix = x;
  res.duals = cscale * alpha;
  return res;
}

SdpResult solve_sdp(const QcqpModel& model, const SdpOptions& opts) {
  const int m = static_cast<int>(model.constraints.size());

  // Exact +/- row pairs encode equalities; split rows make the interior
  // point Schur complement singular at the endgame (the sign squares away),
  // so the solve runs on the merged system and duals map back afterwards.
  std::vector<int> partner(m, -1);
  auto negated_pair = [&](int j, int k) {
    const auto& up = model.constraints[j];
    const auto& lo = model.constraints[k];
    if (lo.rhs != -up.rhs) return false;
    const auto& ue = up.a_matrix.entries();
    const auto& le = lo.a_matrix.entries();
    if (ue.size() != le.size()) return false;
    for (std::size_t e = 0; e < ue.size(); ++e)
      if (ue[e].row != le[e].row || ue[e].col != le[e].col ||
          ue[e].value != -le[e].value)
        return false;
    return true;
  };
  for (int k = 0; k < m; ++k) {
    if (partner[k] != -1) continue;
    // balance pairs sit adjacently; magnitude pairs sit n rows apart
    for (int cand : {k + 1, k + model.n}) {
      if (cand >= m || partner[cand] != -1) continue;
      if (negated_pair(k, cand)) {
        partner[k] = cand;
        partner[cand] = k;
        break;
      }
    }
  }

  SdpProblem p;
  p.dim = model.dim();
  p.c = model.c_matrix;
  std::vector<int> merged_of;  // original row of each merged row
  for (int k = 0; k < m; ++k) {
    if (partner[k] != -1 && partner[k] < k) continue;  // folded into partner
    p.a.push_back(model.constraints[k].a_matrix);
    merged_of.push_back(k);
    p.is_equality.push_back(partner[k] != -1 ? 1 : 0);
  }
  const int mm = static_cast<int>(p.a.size());
  p.b.resize(mm);
  for (int j = 0; j < mm; ++j) p.b[j] = model.constraints[merged_of[j]].rhs;

  auto [alpha_tilde, mu] = strict_dual_certificate(model);
  (void)mu;
  Vector a0(mm);
  for (int j = 0; j < mm; ++j) {
    const int k = merged_of[j];
    a0[j] = p.is_equality[j] ? alpha_tilde[k] - alpha_tilde[partner[k]]
                             : alpha_tilde[k];
  }

  SdpResult r = solve_sdp_problem(p, opts, &a0);

  // map duals back to the split rows: nu = a+ - a- with both sides >= 0
  Vector full = Vector::Zero(m);
  for (int j = 0; j < mm; ++j) {
    const int k = merged_of[j];
    if (p.is_equality[j]) {
      full[k] = std::max(r.duals[j], 0.0);
      full[partner[k]] = std::max(-r.duals[j], 0.0);
    } else {
      full[k] = std::max(r.duals[j], 0.0);
    }
  }
  r.duals = full;
  return r;
}

std::pair<Vector, double> strict_dual_certificate(const QcqpModel& model) {
  const int n = model.n;
  const int m = static_cast<int>(model.constraints.size());
  Matrix cprime = model.c_matrix.to_dense();
  for (int k = n; k < m; ++k)
    for (const Triplet& t : model.constraints[k].a_matrix.entries())
      cprime(t.row, t.col) += t.value;
  cprime = 0.5 * (cprime + cprime.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(cprime, Eigen::EigenvaluesOnly);
  const double mu = 1.0 + std::max(0.0, -es.eigenvalues().minCoeff());
  Vector alpha = Vector::Ones(m);
  alpha.head(n).setConstant(mu);
  return {alpha, mu};
}

double duality_gap(const SdpResult& r) {
  if (r.status != SdpStatus::Optimal)
    throw NotOptimal("duality_gap: SDP result is not optimal");
  return std::abs(r.primal_value - r.dual_value) / std::max(1.0, std::abs(r.primal_value));
}

}  // namespace opf
