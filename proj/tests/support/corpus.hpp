#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "replisim/policy.hpp"
#include "replisim/scenario.hpp"

namespace replisim::testing {

struct PolicyPair {
  Policy read;
  Policy write;
  std::string label;
};

/// Appropriate read/write combinations exercised by the property suites.
std::vector<PolicyPair> appropriate_pairs();

/// Small two-data-centre scenarios: at most 3 agents, 4 requests and 3
/// copies per fragment. Same seed, same corpus.
std::vector<std::string> corpus_texts(std::uint64_t seed, std::size_t count);

/// `text` with its policy lines replaced.
Scenario with_policies(const std::string& text, const PolicyPair& p);

}  // namespace replisim::testing
