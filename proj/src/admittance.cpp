/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "opf/admittance.hpp"

#include <unordered_map>

#include "opf/errors.hpp"

namespace opf {

ComplexMatrix build_bus_admittance(const NetworkCase& c) {
  const int n = static_cast<int>(c.buses.size());
  std::unordered_map<int, int> index;
  for (int i = 0; i < n; ++i) index.emplace(c.buses[i].id, i);

  ComplexMatrix y = ComplexMatrix::Zero(n, n);
  for (const BranchRecord& br : c.branches) {
    const int f = index.at(br.from_bus);
    const int t = index.at(br.to_bus);
    const Complex ys = br.series_admittance;
    const Complex ytot = ys + 0.5 * br.shunt_charging;
    const Complex tau = br.tap_ratio;
    y(f, f) += ytot / std::norm(tau);
    y(f, t) += -ys / std::conj(tau);
    y(t, f) += -ys / tau;
    y(t, t) += ytot;
  }
  for (int i = 0; i < n; ++i) y(i, i) += c.buses[i].shunt;
  return y;
}

}  // namespace opf
