/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <string>

#include "opf/case.hpp"

namespace opf {

// Native JSON schema: top-level keys base_mva, buses[], generators[],
// branches[] mirroring the domain records field-for-field. Complex values
// are {"re": ..., "im": ...} objects.
NetworkCase parse_native(const std::string& text);
std::string serialize_native(const NetworkCase& c);

}  // namespace opf
