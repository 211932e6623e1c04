/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <array>
#include <memory>
#include <utility>
#include <vector>

#include "opf/kernels.hpp"
#include "opf/reform.hpp"
#include "opf/sym_matrix.hpp"

namespace opf {

enum class QpStatus { Optimal, Infeasible, IterLimit };

const char* to_string(QpStatus s);

struct QpOptions {
  double eps_abs = 1e-8;
  double eps_rel = 1e-8;
  int max_iterations = 50000;
  bool warm_start = true;
  bool polish = true;
  int verbosity = 0;
};

// One linear row a_y*y_ij + a_i*x_i + a_j*x_j <= rhs of the McCormick
// envelope of y_ij = x_i x_j over a box.
struct McCormickRow {
  double coef_y = 0.0;
  double coef_xi = 0.0;
  double coef_xj = 0.0;
  double rhs = 0.0;
};

// The four envelope rows for pair (i, j) over [lo_i,hi_i] x [lo_j,hi_j].
// Throws EmptyBox when an interval is inverted.
std::array<McCormickRow, 4> mccormick_rows(double lo_i, double hi_i, double lo_j,
                                           double hi_j);

// General convex QP: min 1/2 z'Pz + q'z  s.t.  l <= Gz <= u.
struct QpProblem {
  int nvar = 0;
  SymSparse p;
  Vector q;
  std::vector<Triplet> g;  // row-major triplets of G
  int nrows = 0;
  Vector row_lower, row_upper;
};

struct QpSolution {
  Vector z;          // primal solution, length nvar
  Vector row_duals;  // multipliers, length nrows
  double value = 0.0;
  QpStatus status = QpStatus::IterLimit;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool polished = false;

  // node-relaxation views (set by solve_node_relaxation)
  Vector x_bar;  // first 2n entries of z
  Vector y_bar;  // pair-aligned tail of z
};

QpSolution solve_qp(const QpProblem& p, const QpOptions& opts,
                    const Vector* warm_z = nullptr, const Vector* warm_duals = nullptr);

// Node relaxation machinery. Static rows <A_k, Y> <= b_k are assembled once;
// only McCormick coefficients are refreshed when the box changes.
class NodeRelaxation {
 public:
  NodeRelaxation(const Reformulation& r, const QcqpModel& model);

  // Solves over the given box. Warm start uses a previous solution's z.
  QpSolution solve(const Vector& lower, const Vector& upper, const QpOptions& opts,
                   const Vector* warm_z = nullptr) const;

  const Reformulation& reformulation() const { return *reform_; }
  int nvar() const { return problem_.nvar; }

 private:
  const Reformulation* reform_;
  int nx_ = 0;
  mutable QpProblem problem_;  // McCormick values rewritten per solve
  // locations of the per-pair McCormick coefficient slots in problem_.g
  struct PairSlots {
    int i, j;
    std::array<std::size_t, 4> row_base;  // triplet offsets, 3 per row (2 when i==j)
    std::array<int, 4> row_id;
  };
  std::vector<PairSlots> slots_;
};

QpSolution solve_node_relaxation(const NodeRelaxation& node, const Vector& lower,
                                 const Vector& upper, const QpOptions& opts,
                                 const Vector* warm_z = nullptr);

// max over E of |y_ij - x_i x_j| and the attaining pair (lexicographic ties).
std::pair<std::pair<int, int>, double> bilinear_violation(const Reformulation& r,
                                                          const QpSolution& sol);

}  // namespace opf
