#include "replisim/core.hpp"

#include <algorithm>
#include <sstream>

namespace replisim {

namespace {

constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;
constexpr std::uint8_t kTagInteger = 0x01;
constexpr std::uint8_t kTagText = 0x02;

class Fnv1a {
 public:
  void byte(std::uint8_t b) {
    state_ ^= b;
    state_ *= kFnvPrime;
  }
  void big_endian(std::uint64_t v, int bytes) {
    for (int shift = 8 * (bytes - 1); shift >= 0; shift -= 8) {
      byte(static_cast<std::uint8_t>((v >> shift) & 0xFF));
    }
  }
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = kFnvOffsetBasis;
};

}  // namespace

Order compare_ts(const Timestamp& a, const Timestamp& b) {
  auto c = a <=> b;
  if (c < 0) return Order::kLess;
  if (c > 0) return Order::kGreater;
  return Order::kEqual;
}

bool RelationConfig::has_datacentre(DataCentreId d) const {
  return std::find(datacentres.begin(), datacentres.end(), d) != datacentres.end();
}

const RelationConfig& ClusterConfig::relation(RelationId i) const {
  if (i >= relations.size()) {
    throw ConfigError("unknown relation id " + std::to_string(i));
  }
  return relations[i];
}

std::optional<RelationId> ClusterConfig::find_relation(std::string_view name) const {
  for (std::size_t i = 0; i < relations.size(); ++i) {
    if (relations[i].name == name) return static_cast<RelationId>(i);
  }
  return std::nullopt;
}

std::optional<DataCentreId> ClusterConfig::find_datacentre(std::string_view name) const {
  for (std::size_t d = 0; d < datacentres.size(); ++d) {
    if (datacentres[d].name == name) return static_cast<DataCentreId>(d);
  }
  return std::nullopt;
}

bool ClusterConfig::alive(DataCentreId d, NodeIndex node) const {
  if (d >= datacentres.size()) throw ConfigError("unknown data centre id " + std::to_string(d));
  return datacentres[d].dead_nodes.count(node) == 0;
}

bool ClusterConfig::copy(RelationId i, FragmentIndex j, DataCentreId d, NodeIndex node) const {
  return relation(i).copies.count(CopyKey{j, d, node}) > 0;
}

std::vector<NodeId> ClusterConfig::copies(RelationId i, FragmentIndex j) const {
  std::vector<NodeId> out;
  for (const CopyKey& c : relation(i).copies) {
    if (c.fragment == j) out.push_back(NodeId{c.dc, c.node});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeIndex> ClusterConfig::local_copies(RelationId i, FragmentIndex j,
                                                   DataCentreId d) const {
  std::vector<NodeIndex> out;
  for (const CopyKey& c : relation(i).copies) {
    if (c.fragment == j && c.dc == d) out.push_back(c.node);
  }
  return out;
}

std::vector<NodeIndex> ClusterConfig::alive_local_copies(RelationId i, FragmentIndex j,
                                                         DataCentreId d) const {
  std::vector<NodeIndex> out;
  for (NodeIndex n : local_copies(i, j, d)) {
    if (alive(d, n)) out.push_back(n);
  }
  return out;
}

Timestamp ClusterConfig::timestamp(std::uint64_t tick, DataCentreId d) const {
  if (d >= datacentres.size()) throw ConfigError("unknown data centre id " + std::to_string(d));
  return Timestamp(tick, d, datacentres[d].offset_rank);
}

DataCentreId ClusterConfig::lowest_offset_datacentre() const {
  if (datacentres.empty()) throw ConfigError("cluster has no data centres");
  DataCentreId best = 0;
  for (DataCentreId d = 1; d < datacentres.size(); ++d) {
    if (datacentres[d].offset_rank < datacentres[best].offset_rank) best = d;
  }
  return best;
}

void ClusterConfig::place_default_copies() {
  for (RelationConfig& rel : relations) {
    if (!rel.copies.empty() || rel.nodes == 0) continue;
    for (FragmentIndex j = 1; j <= rel.fragment_count(); ++j) {
      for (DataCentreId d : rel.datacentres) {
        for (std::uint32_t k = 0; k < rel.replication && k < rel.nodes; ++k) {
          rel.copies.insert(CopyKey{j, d, static_cast<NodeIndex>((j - 1 + k) % rel.nodes + 1)});
        }
      }
    }
  }
}

std::vector<std::string> ClusterConfig::problems() const {
  std::vector<std::string> out;
  std::set<std::uint32_t> ranks;
  for (const DataCentre& dc : datacentres) {
    if (!ranks.insert(dc.offset_rank).second) {
      out.push_back("data centre '" + dc.name + "' reuses offset rank " +
                    std::to_string(dc.offset_rank));
    }
  }
  for (const RelationConfig& rel : relations) {
    const std::string where = "relation '" + rel.name + "': ";
    if (rel.arity == 0) out.push_back(where + "arity must be positive");
    if (rel.hash_min > rel.hash_max) out.push_back(where + "empty hash interval");
    if (rel.ranges.empty()) {
      out.push_back(where + "no hash ranges");
    } else {
      if (rel.ranges.front().lo != rel.hash_min || rel.ranges.back().hi != rel.hash_max) {
        out.push_back(where + "ranges do not cover the hash interval");
      }
      for (std::size_t k = 0; k < rel.ranges.size(); ++k) {
        if (rel.ranges[k].lo > rel.ranges[k].hi) out.push_back(where + "empty range");
        if (k > 0 && rel.ranges[k].lo != rel.ranges[k - 1].hi + 1) {
          out.push_back(where + "ranges overlap or leave a gap");
        }
      }
    }
    if (rel.datacentres.empty()) out.push_back(where + "no data centres");
    for (DataCentreId d : rel.datacentres) {
      if (d >= datacentres.size()) out.push_back(where + "unknown data centre");
    }
    if (rel.replication == 0) out.push_back(where + "replication factor must be positive");
    if (rel.replication > rel.nodes) out.push_back(where + "replication factor exceeds node count");
    for (const CopyKey& c : rel.copies) {
      if (c.fragment < 1 || c.fragment > rel.fragment_count()) {
        out.push_back(where + "copy names unknown fragment " + std::to_string(c.fragment));
      }
      if (!rel.has_datacentre(c.dc)) out.push_back(where + "copy outside the relation's data centres");
      if (c.node < 1 || c.node > rel.nodes) out.push_back(where + "copy names node out of range");
    }
    for (FragmentIndex j = 1; j <= rel.fragment_count(); ++j) {
      for (DataCentreId d : rel.datacentres) {
        std::uint32_t n = 0;
        for (const CopyKey& c : rel.copies) {
          if (c.fragment == j && c.dc == d) ++n;
        }
        if (n != rel.replication) {
          out.push_back(where + "fragment " + std::to_string(j) + " has " + std::to_string(n) +
                        " copies in a data centre, expected " + std::to_string(rel.replication));
        }
      }
    }
  }
  return out;
}

void ClusterConfig::validate() const {
  auto issues = problems();
  if (issues.empty()) return;
  std::ostringstream msg;
  msg << "invalid cluster configuration:";
  for (const auto& s : issues) msg << "\n  " << s;
  throw ConfigError(msg.str());
}

std::uint64_t hash_atoms(const Tuple& key) {
  Fnv1a h;
  for (const Atom& atom : key) {
    if (const auto* n = std::get_if<std::int64_t>(&atom)) {
      h.byte(kTagInteger);
      h.big_endian(static_cast<std::uint64_t>(*n), 8);
    } else {
      const auto& s = std::get<std::string>(atom);
      h.byte(kTagText);
      h.big_endian(s.size(), 4);
      for (char c : s) h.byte(static_cast<std::uint8_t>(c));
    }
  }
  return h.value();
}

std::int64_t hash_key(const RelationConfig& rel, const Tuple& key) {
  const std::uint64_t width =
      static_cast<std::uint64_t>(rel.hash_max) - static_cast<std::uint64_t>(rel.hash_min) + 1;
  const std::uint64_t folded = width == 0 ? hash_atoms(key) : hash_atoms(key) % width;
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(rel.hash_min) + folded);
}

FragmentIndex hash_fragment(const ClusterConfig& cfg, RelationId i, const Tuple& key) {
  check_arity(cfg, i, key);
  const RelationConfig& rel = cfg.relation(i);
  const std::int64_t h = hash_key(rel, key);
  for (std::size_t k = 0; k < rel.ranges.size(); ++k) {
    if (rel.ranges[k].contains(h)) return static_cast<FragmentIndex>(k + 1);
  }
  throw ConfigError("relation '" + rel.name + "': hash value outside every range");
}

void check_arity(const ClusterConfig& cfg, RelationId i, const Tuple& key) {
  const RelationConfig& rel = cfg.relation(i);
  if (key.size() != rel.arity) {
    throw ConfigError("relation '" + rel.name + "' expects keys of arity " +
                      std::to_string(rel.arity) + ", got " + std::to_string(key.size()));
  }
}

void check_coarity(const ClusterConfig& cfg, RelationId i, const Value& value) {
  const RelationConfig& rel = cfg.relation(i);
  if (value && value->size() != rel.coarity) {
    throw ConfigError("relation '" + rel.name + "' expects values of co-arity " +
                      std::to_string(rel.coarity) + ", got " + std::to_string(value->size()));
  }
}

ClockBank::ClockBank(std::size_t datacentres, std::uint64_t initial_tick)
    : ticks_(datacentres, initial_tick) {}

std::uint64_t ClockBank::tick(DataCentreId d) const {
  if (d >= ticks_.size()) throw ConfigError("unknown data centre id " + std::to_string(d));
  return ticks_[d];
}

void ClockBank::set_tick(DataCentreId d, std::uint64_t tick) {
  if (d >= ticks_.size()) throw ConfigError("unknown data centre id " + std::to_string(d));
  ticks_[d] = tick;
}

Timestamp ClockBank::now(const ClusterConfig& cfg, DataCentreId d) const {
  return cfg.timestamp(tick(d), d);
}

Timestamp fresh_timestamp(ClockBank& clocks, const ClusterConfig& cfg, DataCentreId d) {
  const Timestamp t = clocks.now(cfg, d);
  clocks.set_tick(d, t.tick() + 1);
  return t;
}

std::uint64_t adjusted_tick(const ClusterConfig& cfg, DataCentreId d, std::uint64_t current,
                            const Timestamp& t) {
  if (t.is_neg_inf()) throw ConfigError("adjust_clock with NEG_INF");
  const std::uint64_t least =
      cfg.timestamp(t.tick(), d) >= t ? t.tick() : t.tick() + 1;
  return std::max(current, least);
}

void adjust_clock(ClockBank& clocks, const ClusterConfig& cfg, DataCentreId d,
                  const Timestamp& t) {
  clocks.set_tick(d, adjusted_tick(cfg, d, clocks.tick(d), t));
}

Entry ReplicaStore::lookup(const ReplicaLoc& loc) const {
  auto it = entries_.find(loc);
  if (it == entries_.end()) return Entry{std::nullopt, Timestamp::neg_inf()};
  return it->second;
}

void ReplicaStore::store(const ReplicaLoc& loc, Entry entry) {
  entries_[loc] = std::move(entry);
}

Entry lookup_replica(const ClusterConfig& cfg, const ReplicaStore& store, const ReplicaLoc& loc) {
  if (!cfg.copy(loc.relation, loc.fragment, loc.dc, loc.node)) {
    throw ConfigError("lookup on a node that holds no copy of the fragment");
  }
  if (hash_fragment(cfg, loc.relation, loc.key) != loc.fragment) {
    throw ConfigError("key does not hash into the requested fragment");
  }
  return store.lookup(loc);
}

Value FlatStore::get(RelationId i, const Tuple& key) const {
  auto it = entries_.find({i, key});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void FlatStore::set(RelationId i, const Tuple& key, const Value& value) {
  if (value) {
    entries_[{i, key}] = *value;
  } else {
    entries_.erase({i, key});
  }
}

}  // namespace replisim
