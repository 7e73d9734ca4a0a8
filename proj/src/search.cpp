#include "replisim/search.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <unordered_set>

namespace replisim {

namespace {

struct Key {
  std::uint64_t a = 0;
  std::uint64_t b = 0;

  friend bool operator==(const Key&, const Key&) = default;
};

struct KeyHash {
  std::size_t operator()(const Key& k) const { return static_cast<std::size_t>(k.a ^ (k.b * 31)); }
};

Key digest(const std::string& s) {
  std::uint64_t fnv = 14695981039346656037ULL;
  for (unsigned char c : s) {
    fnv ^= c;
    fnv *= 1099511628211ULL;
  }
  return {fnv, std::hash<std::string>{}(s)};
}

class Explorer {
 public:
  Explorer(const Scenario& s, const SearchOptions& opts, const RunVisitor& visit,
           const TracePrune& prune)
      : scenario_(s),
        opts_(opts),
        visit_(visit),
        prune_(prune),
        gap_cap_(std::max<std::uint64_t>(1, s.request_count())) {}

  void run(const Simulation& root) { dfs(root); }

  ExploreResult result() const {
    return {!budget_hit_ && !truncated_ && !stopped_, stopped_, nodes_, completed_};
  }

 private:
  std::string abstraction(const Simulation& sim) const {
    std::string out;
    std::uint64_t prev = 0;
    for (const TraceEvent& e : sim.trace().events) {
      if (e.index == prev) {
        out += "s";
      } else if (opts_.order_only) {
        out += "g";
      } else {
        out += "g" + std::to_string(std::min(e.index - prev - 1, gap_cap_));
      }
      out += format_event_key(e);
      prev = e.index;
    }
    if (!opts_.order_only) out += "t" + std::to_string(std::min(sim.world().steps - prev, gap_cap_));
    return out;
  }

  std::string format_event_key(const TraceEvent& e) const {
    std::string out = std::to_string(static_cast<int>(e.kind)) + "." + std::to_string(e.agent) + "." +
                      std::to_string(e.request);
    if (!e.is_request()) out += format_response(e.response(), scenario_.cluster);
    return out + ";";
  }

  void dfs(const Simulation& sim) {
    if (nodes_ >= opts_.budget) {
      budget_hit_ = true;
      stopped_early_ = true;
      return;
    }
    ++nodes_;
    if (prune_ && prune_(sim.trace())) return;
    if (!seen_.insert(digest(sim.fingerprint() + "#" + abstraction(sim))).second) return;
    if (sim.done()) {
      ++completed_;
      RunResult r{sim.trace(), path_, true, sim.world().steps, sim.world().issued};
      if (!visit_(r)) {
        stopped_ = true;
        stopped_early_ = true;
      }
      return;
    }
    if (path_.size() >= opts_.step_limit) {
      truncated_ = true;
      return;
    }
    for (const AgentStep& step : sim.enabled()) {
      Simulation next = sim;
      next.apply({step});
      path_.push_back({step});
      dfs(next);
      path_.pop_back();
      if (stopped_early_) return;
    }
  }

  const Scenario& scenario_;
  const SearchOptions& opts_;
  const RunVisitor& visit_;
  const TracePrune& prune_;
  const std::uint64_t gap_cap_;
  std::unordered_set<Key, KeyHash> seen_;
  Schedule path_;
  std::uint64_t nodes_ = 0;
  std::uint64_t completed_ = 0;
  bool budget_hit_ = false;
  bool truncated_ = false;
  bool stopped_ = false;
  bool stopped_early_ = false;
};

}  // namespace

ExploreResult explore(const Scenario& s, Model m, const SearchOptions& opts,
                      const RunVisitor& visit, const TracePrune& prune) {
  Explorer ex(s, opts, visit, prune);
  ex.run(Simulation(s, m));
  return ex.result();
}

SearchResult search_schedules(const Scenario& s, Model m, const TracePredicate& pred,
                              const SearchOptions& opts, const TracePrune& prune) {
  SearchResult out;
  const ExploreResult ex = explore(
      s, m, opts,
      [&](const RunResult& r) {
        if (!pred(r.trace)) return true;
        out.witness = r;
        return false;
      },
      prune);
  out.found = out.witness.has_value();
  out.exhaustive = ex.exhaustive;
  out.nodes = ex.nodes;
  out.completed = ex.completed;
  return out;
}

std::uint64_t budget_from_env(std::uint64_t fallback) {
  const char* v = std::getenv("REPLISIM_BUDGET");
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const unsigned long long n = std::strtoull(v, &end, 10);
  if (*end != '\0' || n == 0 || v[0] == '-') return fallback;
  return n;
}

}  // namespace replisim
