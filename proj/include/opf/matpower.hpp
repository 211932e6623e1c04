/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <string>

#include "opf/case.hpp"

namespace opf {

// Parses a MATPOWER case (.m) from text. Quantities are converted to
// per-unit on baseMVA, out-of-service generators and branches are dropped,
// generators sharing a bus are aggregated, and only the linear active-power
// cost coefficient is kept (quadratic/constant terms are ignored with a
// warning on stderr).
NetworkCase parse_matpower(const std::string& text);

// Generators at the same bus collapse to one: power bounds summed, linear
// cost is the minimum coefficient. Both parsers end with this.
NetworkCase aggregate_generators(NetworkCase c);

}  // namespace opf
