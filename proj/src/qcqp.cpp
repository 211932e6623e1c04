/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "opf/qcqp.hpp"

#include <json.hpp>

#include <cmath>
#include <unordered_map>

#include "opf/errors.hpp"
#include "opf/kernels.hpp"

namespace opf {

const char* to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::VmagUpper: return "vmag_upper";
    case ConstraintKind::VmagLower: return "vmag_lower";
    case ConstraintKind::ActiveBalanceUpper: return "active_balance_upper";
    case ConstraintKind::ActiveBalanceLower: return "active_balance_lower";
    case ConstraintKind::ReactiveBalanceUpper: return "reactive_balance_upper";
    case ConstraintKind::ReactiveBalanceLower: return "reactive_balance_lower";
    case ConstraintKind::ActiveGenUpper: return "active_gen_upper";
    case ConstraintKind::ActiveGenLower: return "active_gen_lower";
    case ConstraintKind::ReactiveGenUpper: return "reactive_gen_upper";
    case ConstraintKind::ReactiveGenLower: return "reactive_gen_lower";
  }
  return "unknown";
}

void QcqpModel::finalize() {
  std::vector<const SymSparse*> mats;
  mats.reserve(constraints.size());
  for (const QcqpConstraint& c : constraints) mats.push_back(&c.a_matrix);
  pack_ = ConstraintPack::pack(mats);
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  return 0.5 * (m + m.adjoint());
}

ComplexMatrix skew_part(const ComplexMatrix& m) {
  return (m - m.adjoint()) / Complex(0.0, 2.0);
}

Matrix realify(const ComplexMatrix& h) {
  const Eigen::Index n = h.rows();
  if (h.cols() != n) throw DimensionMismatch("realify: matrix must be square");
  double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw NotHermitian("realify: input is not Hermitian");

  Matrix out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = h.real();
  out.bottomRightCorner(n, n) = h.real();
  out.topRightCorner(n, n) = -h.imag();
  out.bottomLeftCorner(n, n) = h.imag();
  // kill the 1e-12-level asymmetry left by the Hermitian tolerance
  return 0.5 * (out + out.transpose());
}

QcqpModel build_qcqp(const NetworkCase& c, const QcqpOptions& opts) {
  c.validate();
  const int n = static_cast<int>(c.buses.size());
  const int dim = 2 * n;

  QcqpModel model;
  model.n = n;
  model.name = c.name;
  for (const BusRecord& b : c.buses) model.bus_ids.push_back(b.id);

  std::unordered_map<int, const GenRecord*> gen_at;
  for (const GenRecord& g : c.generators) {
    if (!gen_at.emplace(g.bus_id, &g).second)
      throw InconsistentCase("build_qcqp: multiple generators at bus " +
                             std::to_string(g.bus_id) + " (aggregate first)");
  }

  const ComplexMatrix y = build_bus_admittance(c);

  // Injection matrices M_i = Y^H e_i e_i^T, so V^H M_i V equals the complex
  // power injected at bus i; Hermitian part carries P, skew part carries Q.
  std::vector<SymSparse> active(n), reactive(n);
  for (int i = 0; i < n; ++i) {
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    m.col(i) = y.row(i).adjoint();
    active[i] = SymSparse::from_dense(realify(hermitian_part(m)));
    reactive[i] = SymSparse::from_dense(realify(skew_part(m)));
  }

  // objective: sum of c_i * P^G_i over generator buses
  SymSparse cost(dim);
  for (int i = 0; i < n; ++i) {
    auto it = gen_at.find(c.buses[i].id);
    if (it == gen_at.end()) continue;
    const double w = it->second->cost_linear;
    for (const Triplet& t : active[i].entries())
      if (t.row <= t.col) cost.add(t.row, t.col, w * t.value);
    model.objective_offset += w * c.buses[i].p_load;
  }
  cost.compress();
  model.c_matrix = std::move(cost);

  // voltage magnitude rows first: upper bounds k = 0..n-1, then lower
  for (int i = 0; i < n; ++i) {
    SymSparse a(dim);
    a.add(i, i, 1.0);
    a.add(i + n, i + n, 1.0);
    a.compress();
    const double vmax = c.buses[i].v_max;
    model.constraints.push_back(
        {std::move(a), vmax * vmax, {ConstraintKind::VmagUpper, c.buses[i].id}});
  }
  for (int i = 0; i < n; ++i) {
    SymSparse a(dim);
    a.add(i, i, -1.0);
    a.add(i + n, i + n, -1.0);
    a.compress();
    const double vmin = c.buses[i].v_min;
    model.constraints.push_back(
        {std::move(a), -vmin * vmin, {ConstraintKind::VmagLower, c.buses[i].id}});
  }

  // power balance / generator capability rows, four per bus
  for (int i = 0; i < n; ++i) {
    const BusRecord& bus = c.buses[i];
    auto it = gen_at.find(bus.id);
    const bool has_gen = it != gen_at.end();
    const double pd = bus.p_load, qd = bus.q_load;

    auto push = [&](const SymSparse& base, double sign, double rhs, ConstraintKind kind) {
      SymSparse a(dim);
      for (const Triplet& t : base.entries())
        if (t.row <= t.col) a.add(t.row, t.col, sign * t.value);
      a.compress();
      model.constraints.push_back({std::move(a), rhs, {kind, bus.id}});
    };

    if (has_gen) {
      const GenRecord& g = *it->second;
      push(active[i], +1.0, g.p_max - pd, ConstraintKind::ActiveGenUpper);
      push(active[i], -1.0, pd - g.p_min, ConstraintKind::ActiveGenLower);
      push(reactive[i], +1.0, g.q_max - qd, ConstraintKind::ReactiveGenUpper);
      push(reactive[i], -1.0, qd - g.q_min, ConstraintKind::ReactiveGenLower);
    } else {
      push(active[i], +1.0, -pd, ConstraintKind::ActiveBalanceUpper);
      push(active[i], -1.0, pd, ConstraintKind::ActiveBalanceLower);
      push(reactive[i], +1.0, -qd, ConstraintKind::ReactiveBalanceUpper);
      push(reactive[i], -1.0, qd, ConstraintKind::ReactiveBalanceLower);
    }
  }

  model.lower = Vector(dim);
  model.upper = Vector(dim);
  for (int i = 0; i < n; ++i) {
    const double vmax = c.buses[i].v_max;
    model.lower[i] = model.lower[i + n] = -vmax;
    model.upper[i] = model.upper[i + n] = vmax;
  }

  if (opts.fix_reference_angle) {
    int ref = 0;
    for (int i = 0; i < n; ++i)
      if (gen_at.count(c.buses[i].id)) {
        ref = i;
        break;
      }
    model.lower[ref + n] = 0.0;
    model.upper[ref + n] = 0.0;
  }

  model.finalize();
  return model;
}

EvalResult evaluate(const QcqpModel& model, const Vector& x, bool parallel) {
  if (x.size() != model.dim())
    throw DimensionMismatch("evaluate: point has dimension " +
                            std::to_string(x.size()) + ", model wants " +
                            std::to_string(model.dim()));
  EvalResult r;
  r.objective = model.c_matrix.quad_form(x);
  Vector vals;
  kernels::quad_forms(model.pack(), x, vals, parallel);
  r.violations.resize(vals.size());
  for (Eigen::Index k = 0; k < vals.size(); ++k)
    r.violations[k] = std::max(0.0, vals[k] - model.constraints[k].rhs);
  r.max_violation = r.violations.size() ? r.violations.maxCoeff() : 0.0;
  return r;
}

std::string dump_qcqp_json(const QcqpModel& model) {
  nlohmann::json j;
  j["n"] = model.n;
  j["name"] = model.name;
  j["objective_offset"] = model.objective_offset;
  j["lower"] = std::vector<double>(model.lower.data(), model.lower.data() + model.lower.size());
  j["upper"] = std::vector<double>(model.upper.data(), model.upper.data() + model.upper.size());
  auto mat_to_json = [](const SymSparse& m) {
    nlohmann::json t = nlohmann::json::array();
    for (const Triplet& e : m.entries())
      if (e.row <= e.col) t.push_back({e.row, e.col, e.value});
    return t;
  };
  j["c_matrix"] = mat_to_json(model.c_matrix);
  j["constraints"] = nlohmann::json::array();
  for (const QcqpConstraint& c : model.constraints)
    j["constraints"].push_back({{"a_matrix", mat_to_json(c.a_matrix)},
                                {"rhs", c.rhs},
                                {"kind", to_string(c.tag.kind)},
                                {"bus_id", c.tag.bus_id}});
  return j.dump();
}

}  // namespace opf
