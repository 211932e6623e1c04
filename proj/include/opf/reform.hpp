/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <map>
#include <utility>
#include <vector>

#include "opf/qcqp.hpp"
#include "opf/sdp.hpp"
#include "opf/sym_matrix.hpp"

namespace opf {

// Dual-derived convex reformulation data: S* = C + sum(alpha*_k A_k), its
// residual C - S*, and the pair set E = union sparsity of {C, A_1..A_m}
// plus all diagonal pairs.
struct Reformulation {
  int dim = 0;
  SymSparse s_star;    // PSD within 1e-7 (diagonal-shifted when needed)
  SymSparse residual;  // exactly c_matrix - s_star
  std::vector<std::pair<int, int>> pair_set;  // sorted, i <= j
  Vector lower, upper;                        // root box, copied by value
  double psd_shift = 0.0;                     // diagonal shift applied to S*
  double s_star_lambda_min = 0.0;             // before the shift

  // residual weight per pair, off-diagonals doubled; aligned with pair_set
  Vector residual_pair_weights;

  int pair_index(int i, int j) const;  // -1 when absent
};

Reformulation build_reformulation(const QcqpModel& model, const SdpResult& sdp);

// x'S*x + <C - S*, Y> with Y the symmetric matrix induced by y.
// The vector form expects y aligned with pair_set.
double reformulated_objective(const Reformulation& r, const Vector& x, const Vector& y);
// Map-keyed variant; throws MissingPair when y lacks a pair of E carrying a
// nonzero residual or any requested pair.
double reformulated_objective(const Reformulation& r, const Vector& x,
                              const std::map<std::pair<int, int>, double>& y);

}  // namespace opf
