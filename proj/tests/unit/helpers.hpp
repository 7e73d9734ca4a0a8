#pragma once

#include <string>

#include "replisim/scenario.hpp"

namespace replisim::testing {

// Two data centres, relation x with one copy in each, ALL/ALL unless overridden.
inline std::string two_dc_text(const std::string& extra = "") {
  return "datacentre.dc1.offset = 1\n"
         "datacentre.dc2.offset = 2\n"
         "relation.x.arity = 1\n"
         "relation.x.coarity = 1\n" +
         extra;
}

inline Scenario two_dc(const std::string& extra = "") { return parse_scenario(two_dc_text(extra)); }

inline Tuple key(std::int64_t k) { return Tuple{Atom{k}}; }

}  // namespace replisim::testing
