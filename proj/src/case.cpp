/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "opf/case.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "opf/errors.hpp"

namespace opf {

int NetworkCase::bus_index(int bus_id) const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == bus_id) return static_cast<int>(i);
  return -1;
}

void NetworkCase::validate() const {
  if (buses.empty()) throw InconsistentCase(name + ": case has no buses");
  if (!(base_mva > 0.0)) throw InconsistentCase(name + ": base_mva must be positive");

  std::unordered_set<int> ids;
  for (const BusRecord& b : buses) {
    if (!ids.insert(b.id).second)
      throw InconsistentCase(name + ": duplicate bus id " + std::to_string(b.id));
    if (!(b.v_min >= 0.0) || !(b.v_max >= b.v_min))
      throw InconsistentCase(name + ": bus " + std::to_string(b.id) +
                             " voltage bounds require 0 <= v_min <= v_max");
  }
  for (const GenRecord& g : generators) {
    if (!ids.count(g.bus_id))
      throw InconsistentCase(name + ": generator references missing bus " +
                             std::to_string(g.bus_id));
    if (g.p_min > g.p_max || g.q_min > g.q_max)
      throw InconsistentCase(name + ": generator at bus " + std::to_string(g.bus_id) +
                             " has inverted bounds");
  }
  for (const BranchRecord& br : branches) {
    if (br.from_bus == br.to_bus)
      throw InconsistentCase(name + ": branch with identical endpoints " +
                             std::to_string(br.from_bus));
    if (!ids.count(br.from_bus) || !ids.count(br.to_bus))
      throw InconsistentCase(name + ": branch " + std::to_string(br.from_bus) + "-" +
                             std::to_string(br.to_bus) + " references a missing bus");
    if (!std::isfinite(br.series_admittance.real()) ||
        !std::isfinite(br.series_admittance.imag()))
      throw InconsistentCase(name + ": branch " + std::to_string(br.from_bus) + "-" +
                             std::to_string(br.to_bus) + " has non-finite admittance");
  }
}

}  // namespace opf
