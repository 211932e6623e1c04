/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include "opf/qcqp.hpp"
#include "opf/sym_matrix.hpp"

namespace opf {

struct LocalOptions {
  int max_iterations = 100;
  double feasibility_tol = 1e-5;  // absolute, on constraint violations
  double kkt_tol = 1e-6;          // scaled stationarity / complementarity
  int verbosity = 0;
};

struct LocalPoint {
  Vector x;
  double objective = 0.0;      // x'Cx, no offset
  double max_violation = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Finds a point satisfying first-order optimality conditions of the QCQP:
// slack interior-point Newton iteration with an augmented-Lagrangian
// fallback when the Newton systems go bad. Non-convergence is reported in
// the result, never thrown.
LocalPoint local_solve(const QcqpModel& model, const Vector& start,
                       const LocalOptions& opts = {});

// Flat start: Re V = min(1, u_i), Im V = 0.
Vector flat_start(const QcqpModel& model);

}  // namespace opf
