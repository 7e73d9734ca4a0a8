#include "replisim/cm1.hpp"

#include <limits>
#include <set>

namespace replisim {

SelectionMenu::SelectionMenu(const ClusterConfig& cfg, RelationId i, const Policy& p) {
  const FragmentIndex q = cfg.relation(i).fragment_count();
  for (FragmentIndex j = 1; j <= q; ++j) {
    per_fragment_.push_back(
        enumerate_compliant_selections(cfg, i, j, p, std::numeric_limits<std::size_t>::max()));
  }
}

std::size_t SelectionMenu::size() const {
  std::size_t n = 1;
  for (const auto& options : per_fragment_) {
    if (options.empty()) return 0;
    if (n > std::numeric_limits<std::size_t>::max() / options.size()) {
      throw ConfigError("too many replica selections to enumerate");
    }
    n *= options.size();
  }
  return n;
}

FragmentSelections SelectionMenu::pick(std::size_t index) const {
  if (index >= size()) throw ConfigError("selection index out of range");
  FragmentSelections out;
  for (const auto& options : per_fragment_) {
    out.push_back(options[index % options.size()]);
    index /= options.size();
  }
  return out;
}

std::optional<std::size_t> SelectionMenu::index_of(const FragmentSelections& g) const {
  if (g.size() != per_fragment_.size()) return std::nullopt;
  std::size_t index = 0;
  std::size_t scale = 1;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const auto& options = per_fragment_[j];
    std::size_t k = 0;
    while (k < options.size() && options[k] != g[j]) ++k;
    if (k == options.size()) return std::nullopt;
    index += k * scale;
    scale *= options.size();
  }
  return index;
}

Answer cm1_answer_read(const ClusterConfig& cfg, const ReplicaStore& store, const ReadRequest& req,
                       const FragmentSelections& g) {
  const RelationId i = req.relation;
  Answer out;
  for (FragmentIndex j = 1; j <= g.size(); ++j) {
    std::map<Tuple, Entry> freshest;
    for (const NodeId& n : g[j - 1]) {
      if (!cfg.copy(i, j, n.dc, n.index)) throw ConfigError("selection names a non-copy node");
      store.for_each_in_replica(i, j, n.dc, n.index, [&](const Tuple& k, const Entry& e) {
        if (!holds(req.condition, cfg, i, k)) return;
        auto [it, fresh] = freshest.emplace(k, e);
        if (fresh) return;
        if (it->second.ts < e.ts) {
          it->second = e;
        } else if (it->second.ts == e.ts && it->second.value != e.value) {
          throw InvariantViolation("replicas share a timestamp but hold different values");
        }
      });
    }
    for (auto& [k, e] : freshest) {
      if (e.value) out.emplace(k, *e.value);
    }
  }
  return out;
}

Cm1WriteOutcome cm1_perform_write(const ClusterConfig& cfg, const ReplicaStore& store,
                                  const ClockBank& clocks, DataCentreId d,
                                  const WriteRequest& req, const FragmentSelections& g) {
  const RelationId i = req.relation;
  Cm1WriteOutcome out;
  out.clocks = clocks;
  out.ts = fresh_timestamp(out.clocks, cfg, d);

  std::set<DataCentreId> involved;
  for (FragmentIndex j = 1; j <= g.size(); ++j) {
    for (const NodeId& n : g[j - 1]) {
      if (!cfg.copy(i, j, n.dc, n.index)) throw ConfigError("selection names a non-copy node");
      involved.insert(n.dc);
    }
  }
  for (const auto& [k, v] : req.writes) {
    const FragmentIndex j = hash_fragment(cfg, i, k);
    for (const NodeId& n : g.at(j - 1)) {
      ReplicaLoc loc{i, j, n.dc, n.index, k};
      if (store.lookup(loc).ts < out.ts) out.updates.push_back({loc, Entry{v, out.ts}});
    }
  }
  for (DataCentreId dp : involved) {
    adjust_clock(out.clocks, cfg, dp, out.ts);
    out.adjusted.push_back(dp);
  }
  return out;
}

}  // namespace replisim
