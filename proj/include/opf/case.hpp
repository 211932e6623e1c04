/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <complex>
#include <string>
#include <vector>

namespace opf {

using Complex = std::complex<double>;

// All power quantities are per-unit on base_mva; voltages per-unit.
struct BusRecord {
  int id = 0;
  double v_min = 0.0;
  double v_max = 0.0;
  double p_load = 0.0;
  double q_load = 0.0;
  Complex shunt{0.0, 0.0};  // fixed shunt admittance g + jb at the bus
};

struct GenRecord {
  int bus_id = 0;
  double p_min = 0.0;
  double p_max = 0.0;
  double q_min = 0.0;
  double q_max = 0.0;
  double cost_linear = 0.0;  // cost per unit of active power (objective scale)
};

struct BranchRecord {
  int from_bus = 0;
  int to_bus = 0;
  Complex series_admittance{0.0, 0.0};
  Complex shunt_charging{0.0, 0.0};  // total line charging, split per side
  Complex tap_ratio{1.0, 0.0};       // off-nominal turns ratio at the from side
};

struct NetworkCase {
  std::string name;
  double base_mva = 100.0;
  std::vector<BusRecord> buses;
  std::vector<GenRecord> generators;
  std::vector<BranchRecord> branches;

  // Throws InconsistentCase when an invariant is broken: duplicate or
  // dangling bus ids, empty bus table, v_min > v_max, inverted gen bounds.
  void validate() const;

  // Index of a bus id in `buses`, or -1.
  int bus_index(int bus_id) const;
};

}  // namespace opf
