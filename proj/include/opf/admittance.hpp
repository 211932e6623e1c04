/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <Eigen/Dense>

#include "opf/case.hpp"

namespace opf {

using ComplexMatrix = Eigen::MatrixXcd;

// Standard bus admittance assembly, n x n over the case's bus order.
// For a branch f->t with series admittance y, total charging y_c and complex
// tap ratio tau (at the from side):
//   Y(f,f) += (y + y_c/2) / |tau|^2
//   Y(f,t) += -y / conj(tau)
//   Y(t,f) += -y / tau
//   Y(t,t) +=  y + y_c/2
// Bus shunts add to the diagonal.
ComplexMatrix build_bus_admittance(const NetworkCase& c);

}  // namespace opf
