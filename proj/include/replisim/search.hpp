#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "replisim/scenario.hpp"
#include "replisim/sim.hpp"
#include "replisim/trace.hpp"

namespace replisim {

struct SearchOptions {
  std::uint64_t budget = 2'000'000;  // explored nodes
  std::uint64_t step_limit = 400;
  // Merge traces that differ only in idle stretches. Sound for predicates
  // that look at nothing but the relative order of events.
  bool order_only = false;
};

/// A trace predicate evaluated on completed runs.
using TracePredicate = std::function<bool(const Trace&)>;
/// Returns true to cut the subtree below a partial run.
using TracePrune = std::function<bool(const Trace&)>;
/// Receives every distinct completed run; returns false to stop exploring.
using RunVisitor = std::function<bool(const RunResult&)>;

struct ExploreResult {
  bool exhaustive = false;  // the whole schedule space was covered
  bool stopped = false;     // the visitor asked to stop
  std::uint64_t nodes = 0;
  std::uint64_t completed = 0;
};

/// Depth-first enumeration of single-agent schedules in canonical order.
///
/// Two partial runs are merged when their states agree up to message and
/// delegate ids and their traces agree up to the length of idle stretches,
/// capped at the number of requests. Every trace property used here (event
/// order, per-agent order, the integer points available inside request
/// windows) is invariant under that abstraction, so each class is visited
/// once through a representative.
ExploreResult explore(const Scenario& s, Model m, const SearchOptions& opts,
                      const RunVisitor& visit, const TracePrune& prune = {});

struct SearchResult {
  bool found = false;
  bool exhaustive = false;
  std::optional<RunResult> witness;
  std::uint64_t nodes = 0;
  std::uint64_t completed = 0;
};

/// First completed run, in canonical order, whose trace satisfies the predicate.
SearchResult search_schedules(const Scenario& s, Model m, const TracePredicate& pred,
                              const SearchOptions& opts, const TracePrune& prune = {});

/// REPLISIM_BUDGET when set to a positive integer, else the fallback.
std::uint64_t budget_from_env(std::uint64_t fallback);

}  // namespace replisim
