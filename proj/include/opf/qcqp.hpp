/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <string>
#include <vector>

#include "opf/admittance.hpp"
#include "opf/case.hpp"
#include "opf/sym_matrix.hpp"

namespace opf {

enum class ConstraintKind {
  VmagUpper,
  VmagLower,
  ActiveBalanceUpper,
  ActiveBalanceLower,
  ReactiveBalanceUpper,
  ReactiveBalanceLower,
  ActiveGenUpper,
  ActiveGenLower,
  ReactiveGenUpper,
  ReactiveGenLower,
};

const char* to_string(ConstraintKind k);

struct ConstraintTag {
  ConstraintKind kind;
  int bus_id;
};

struct QcqpConstraint {
  SymSparse a_matrix;
  double rhs = 0.0;
  ConstraintTag tag{};
};

// min x'Cx  s.t.  x'A_k x <= b_k (k = 1..6n),  l <= x <= u,
// over x = [Re V_1..n, Im V_1..n]. The first n constraints are the voltage
// magnitude upper bounds, so sum of their matrices is the identity.
struct QcqpModel {
  int n = 0;
  std::string name;
  SymSparse c_matrix;
  // Constant added to x'Cx when reporting money-scale objectives; produced
  // by netting loads at generator buses into the balance bounds.
  double objective_offset = 0.0;
  std::vector<QcqpConstraint> constraints;
  Vector lower, upper;
  std::vector<int> bus_ids;

  int dim() const { return 2 * n; }
  const ConstraintPack& pack() const { return pack_; }
  void finalize();  // builds the kernel pack; call after manual construction

 private:
  ConstraintPack pack_;
};

struct EvalResult {
  double objective = 0.0;
  Vector violations;  // max(0, x'A_k x - b_k) per constraint
  double max_violation = 0.0;
};

// (m + m^H)/2: for any v, v^H (result) v == Re(v^H m v)
ComplexMatrix hermitian_part(const ComplexMatrix& m);
// (m - m^H)/(2i): for any v, v^H (result) v == Im(v^H m v)
ComplexMatrix skew_part(const ComplexMatrix& m);
// [[Re h, -Im h], [Im h, Re h]]; throws NotHermitian beyond 1e-12
Matrix realify(const ComplexMatrix& h);

struct QcqpOptions {
  // Pin Im V = 0 at the first generator bus. Shrinks the box without
  // changing the optimal value; off by default.
  bool fix_reference_angle = false;
};

QcqpModel build_qcqp(const NetworkCase& c, const QcqpOptions& opts = {});

EvalResult evaluate(const QcqpModel& model, const Vector& x, bool parallel = false);

// Solver-independent JSON dump: matrix triplets, rhs, tags, bounds.
std::string dump_qcqp_json(const QcqpModel& model);

}  // namespace opf
