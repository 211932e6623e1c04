/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <utility>
#include <vector>

#include "opf/qcqp.hpp"
#include "opf/sym_matrix.hpp"

namespace opf {

enum class SdpStatus { Optimal, Infeasible, IterLimit, NumericalTrouble };

const char* to_string(SdpStatus s);

struct SdpOptions {
  int max_iterations = 200;
  double tolerance = 1e-8;         // target for feasibility and gap
  double accept_tolerance = 1e-6;  // accept as Optimal at this level
  int verbosity = 0;
  bool parallel = true;            // OpenMP kernels
  double tau0 = 1.0;               // initial X = tau0 * I
};

struct SdpResult {
  Matrix x_matrix;      // primal X, PSD
  Vector duals;         // alpha >= 0, one per constraint
  double primal_value = 0.0;
  double dual_value = 0.0;
  int iterations = 0;
  SdpStatus status = SdpStatus::NumericalTrouble;
  double primal_infeasibility = 0.0;  // relative, at exit
  double dual_infeasibility = 0.0;
  double complementarity = 0.0;
};

// Generic mixed-row SDP: min <C,X> s.t. <A_k,X> <= b_k (or = b_k on rows
// flagged in is_equality), X >= 0. An empty is_equality means all rows are
// inequalities.
struct SdpProblem {
  int dim = 0;
  SymSparse c;
  std::vector<SymSparse> a;
  Vector b;
  std::vector<char> is_equality;
};

// Core solver; alpha0, when given, is a strictly dual-feasible start.
SdpResult solve_sdp_problem(const SdpProblem& p, const SdpOptions& opts,
                            const Vector* alpha0 = nullptr);

// Rank relaxation of the lifted OPF. Starts the dual at the strict
// feasibility construction (all-ones beyond the magnitude rows, mu on them).
SdpResult solve_sdp(const QcqpModel& model, const SdpOptions& opts = {});

// alpha_tilde with alpha_k = 1 for k > n and alpha_k = mu for k <= n, where
// mu = 1 + max(0, -lambda_min(C')) and C' = C + sum_{k>n} A_k. Relies on the
// model invariant that the first n rows are the magnitude upper bounds, so
// C + sum(alpha_tilde_k A_k) = C' + mu I has lambda_min >= 1.
std::pair<Vector, double> strict_dual_certificate(const QcqpModel& model);

// |primal - dual| / max(1, |primal|); throws NotOptimal unless status Optimal.
double duality_gap(const SdpResult& r);

}  // namespace opf
