#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "replisim/consistency.hpp"
#include "replisim/scenario.hpp"
#include "replisim/search.hpp"
#include "replisim/trace.hpp"

namespace replisim {

/// Some agent reads a key, then reads it again and gets a value whose every
/// possible source finished before a source of the first value started.
bool anomaly_read_stale(const Trace& t, const Scenario& s);

/// Two agents print two locations crosswise: one sees the first location
/// updated and then the second still initial, the other the reverse.
bool print_pair(const Trace& t, const Scenario& s);

struct Observation {
  std::uint32_t agent = 0;
  std::size_t nth = 1;  // 1-based among the agent's responses
  Response response;
};

/// `observe <agent> <nth> <response-term>` and `verdict incompatible|not-serialisable` lines.
struct CustomPredicate {
  std::vector<Observation> observations;
  std::optional<VerdictKind> verdict;
};

CustomPredicate parse_custom_predicate(std::string_view text, const Scenario& s);
CustomPredicate load_custom_predicate(const std::string& path, const Scenario& s);
bool custom_holds(const CustomPredicate& p, const Trace& t, const Scenario& s,
                  const CheckOptions& check);

/// Whether the named predicate depends only on the relative order of events.
bool order_only_predicate(std::string_view name);

/// Names: anomaly-read-stale, print-pair, incompatible, not-serialisable, custom-file.
/// The scenario must outlive the predicate.
TracePredicate make_predicate(std::string_view name, const Scenario& s,
                              const std::string& predicate_file, const CheckOptions& check);

}  // namespace replisim
