#include "replisim/cm2.hpp"

namespace replisim {

LocalReadResult cm2_handle_locally_read(const ClusterConfig& cfg, const ReplicaStore& store,
                                        DataCentreId d, const ReadRequest& req) {
  const RelationId i = req.relation;
  const FragmentIndex q = cfg.relation(i).fragment_count();
  LocalReadResult out;
  out.counts.assign(q, 0);
  for (FragmentIndex j = 1; j <= q; ++j) {
    const std::vector<NodeIndex> g = cfg.alive_local_copies(i, j, d);
    out.counts[j - 1] = static_cast<std::uint32_t>(g.size());
    for (NodeIndex node : g) {
      store.for_each_in_replica(i, j, d, node, [&](const Tuple& k, const Entry& e) {
        if (!holds(req.condition, cfg, i, k)) return;
        auto [it, fresh] = out.triples.emplace(k, e);
        if (!fresh && it->second.ts < e.ts) it->second = e;
      });
    }
  }
  return out;
}

LocalWriteResult cm2_handle_locally_write(const ClusterConfig& cfg, const ReplicaStore& store,
                                          const ClockBank& clocks, DataCentreId d,
                                          const WriteRequest& req, const Timestamp& t) {
  const RelationId i = req.relation;
  const FragmentIndex q = cfg.relation(i).fragment_count();
  LocalWriteResult out;
  out.clocks = clocks;
  adjust_clock(out.clocks, cfg, d, t);
  out.counts.assign(q, 0);
  for (FragmentIndex j = 1; j <= q; ++j) {
    out.counts[j - 1] = static_cast<std::uint32_t>(cfg.alive_local_copies(i, j, d).size());
  }
  for (const auto& [k, v] : req.writes) {
    const FragmentIndex j = hash_fragment(cfg, i, k);
    for (NodeIndex node : cfg.alive_local_copies(i, j, d)) {
      ReplicaLoc loc{i, j, d, node, k};
      if (store.lookup(loc).ts < t) out.updates.push_back({loc, Entry{v, t}});
    }
  }
  return out;
}

void collect(Collector& c, const TripleSet& triples, const CopyCounts& x, DataCentreId from) {
  for (const auto& [k, e] : triples) {
    auto [it, fresh] = c.answers.emplace(k, e);
    if (!fresh && it->second.ts < e.ts) it->second = e;
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    c.counts.add(static_cast<FragmentIndex>(j + 1), from, x[j]);
  }
}

Answer respond_answer(const TripleSet& triples) {
  Answer out;
  for (const auto& [k, e] : triples) {
    if (e.value) out.emplace(k, *e.value);
  }
  return out;
}

}  // namespace replisim
