#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace replisim {

/// Raised for malformed cluster layouts and for operations that violate the
/// layout (unknown data centre, arity mismatch, lookup on a non-copy node).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the simulator's run-time assertions.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Elements of the base set. std::variant ordering puts every integer before
// every text, each naturally ordered.
using Atom = std::variant<std::int64_t, std::string>;
using Tuple = std::vector<Atom>;

// A value tuple, or UNDEF (std::nullopt) for a missing or deleted record.
using Value = std::optional<Tuple>;

using RelationId = std::uint32_t;
using DataCentreId = std::uint32_t;
using FragmentIndex = std::uint32_t;  // 1-based
using NodeIndex = std::uint32_t;      // 1-based within a data centre

struct NodeId {
  DataCentreId dc = 0;
  NodeIndex index = 1;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

/// Logical time `n + o_d`. The offset o_d is carried as an integer rank so
/// comparison stays exact. NEG_INF sits below every issued timestamp.
class Timestamp {
 public:
  constexpr Timestamp() = default;
  constexpr Timestamp(std::uint64_t tick, DataCentreId dc, std::uint32_t offset_rank)
      : neg_inf_(false), tick_(tick), dc_(dc), rank_(offset_rank) {}

  static constexpr Timestamp neg_inf() { return Timestamp(); }

  constexpr bool is_neg_inf() const { return neg_inf_; }
  constexpr std::uint64_t tick() const { return tick_; }
  constexpr DataCentreId dc() const { return dc_; }
  constexpr std::uint32_t offset_rank() const { return rank_; }

  friend constexpr std::strong_ordering operator<=>(const Timestamp& a, const Timestamp& b) {
    if (a.neg_inf_ || b.neg_inf_) {
      return b.neg_inf_ <=> a.neg_inf_;
    }
    if (auto c = a.tick_ <=> b.tick_; c != 0) return c;
    if (auto c = a.rank_ <=> b.rank_; c != 0) return c;
    return a.dc_ <=> b.dc_;
  }
  friend constexpr bool operator==(const Timestamp& a, const Timestamp& b) {
    return (a <=> b) == 0;
  }

 private:
  bool neg_inf_ = true;
  std::uint64_t tick_ = 0;
  DataCentreId dc_ = 0;
  std::uint32_t rank_ = 0;
};

enum class Order { kLess, kEqual, kGreater };

Order compare_ts(const Timestamp& a, const Timestamp& b);

struct HashRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  bool contains(std::int64_t h) const { return lo <= h && h <= hi; }
};

struct DataCentre {
  std::string name;
  std::uint32_t offset_rank = 0;
  std::set<NodeIndex> dead_nodes;
};

struct CopyKey {
  FragmentIndex fragment = 1;
  DataCentreId dc = 0;
  NodeIndex node = 1;

  friend auto operator<=>(const CopyKey&, const CopyKey&) = default;
};

struct RelationConfig {
  std::string name;
  std::size_t arity = 1;
  std::size_t coarity = 1;
  std::int64_t hash_min = 0;
  std::int64_t hash_max = 255;
  std::vector<HashRange> ranges;          // ranges[j - 1] is range_j
  std::vector<DataCentreId> datacentres;  // D_i, ascending
  NodeIndex nodes = 1;                    // n_i
  std::uint32_t replication = 1;          // r_i
  std::set<CopyKey> copies;               // the copy predicate

  FragmentIndex fragment_count() const { return static_cast<FragmentIndex>(ranges.size()); }
  bool has_datacentre(DataCentreId d) const;
};

struct ClusterConfig {
  std::vector<DataCentre> datacentres;
  std::vector<RelationConfig> relations;

  const RelationConfig& relation(RelationId i) const;
  std::optional<RelationId> find_relation(std::string_view name) const;
  std::optional<DataCentreId> find_datacentre(std::string_view name) const;

  bool alive(DataCentreId d, NodeIndex node) const;
  bool copy(RelationId i, FragmentIndex j, DataCentreId d, NodeIndex node) const;
  /// C_{i,j}: every (d, j') holding a replica of fragment j, ascending.
  std::vector<NodeId> copies(RelationId i, FragmentIndex j) const;
  /// Node indices of C_{i,j,d}.
  std::vector<NodeIndex> local_copies(RelationId i, FragmentIndex j, DataCentreId d) const;
  /// Alive members of C_{i,j,d}.
  std::vector<NodeIndex> alive_local_copies(RelationId i, FragmentIndex j, DataCentreId d) const;

  Timestamp timestamp(std::uint64_t tick, DataCentreId d) const;
  DataCentreId lowest_offset_datacentre() const;

  /// Fills in the default copy placement for relations that declared none:
  /// fragment j at data centre d lives on nodes ((j - 1 + k) mod n) + 1 for
  /// k in 0..r-1.
  void place_default_copies();

  /// Checks every layout invariant; the returned list is empty when valid.
  std::vector<std::string> problems() const;
  void validate() const;
};

/// 64-bit FNV-1a over the atom serialization (tag byte, big-endian payload).
std::uint64_t hash_atoms(const Tuple& key);
/// h_i(k) in [m, M].
std::int64_t hash_key(const RelationConfig& rel, const Tuple& key);
/// The unique j with h_i(k) in range_j.
FragmentIndex hash_fragment(const ClusterConfig& cfg, RelationId i, const Tuple& key);

void check_arity(const ClusterConfig& cfg, RelationId i, const Tuple& key);
void check_coarity(const ClusterConfig& cfg, RelationId i, const Value& value);

/// Per data centre clock; a tick is the next n the data centre will issue.
class ClockBank {
 public:
  ClockBank() = default;
  ClockBank(std::size_t datacentres, std::uint64_t initial_tick);

  std::uint64_t tick(DataCentreId d) const;
  void set_tick(DataCentreId d, std::uint64_t tick);
  std::size_t size() const { return ticks_.size(); }

  /// clock_d read as a timestamp (tick, d).
  Timestamp now(const ClusterConfig& cfg, DataCentreId d) const;

  friend bool operator==(const ClockBank&, const ClockBank&) = default;

 private:
  std::vector<std::uint64_t> ticks_;
};

/// Returns (tick(d), d) and advances d's tick by one.
Timestamp fresh_timestamp(ClockBank& clocks, const ClusterConfig& cfg, DataCentreId d);

/// Smallest tick n with (n, d) >= t, never below the current tick.
std::uint64_t adjusted_tick(const ClusterConfig& cfg, DataCentreId d, std::uint64_t current,
                            const Timestamp& t);
void adjust_clock(ClockBank& clocks, const ClusterConfig& cfg, DataCentreId d, const Timestamp& t);

struct ReplicaLoc {
  RelationId relation = 0;
  FragmentIndex fragment = 1;
  DataCentreId dc = 0;
  NodeIndex node = 1;
  Tuple key;

  friend auto operator<=>(const ReplicaLoc&, const ReplicaLoc&) = default;
};

struct Entry {
  Value value;
  Timestamp ts;

  friend bool operator==(const Entry&, const Entry&) = default;
};

using ReplicaUpdate = std::pair<ReplicaLoc, Entry>;

/// The replica functions p_{i,j,d,j'}; absent entries read as (UNDEF, NEG_INF).
class ReplicaStore {
 public:
  Entry lookup(const ReplicaLoc& loc) const;
  void store(const ReplicaLoc& loc, Entry entry);

  /// Visits every stored (key, entry) of one replica in key order.
  template <typename Fn>
  void for_each_in_replica(RelationId i, FragmentIndex j, DataCentreId d, NodeIndex node,
                           Fn&& fn) const {
    ReplicaLoc probe{i, j, d, node, {}};
    for (auto it = entries_.lower_bound(probe); it != entries_.end(); ++it) {
      const ReplicaLoc& loc = it->first;
      if (loc.relation != i || loc.fragment != j || loc.dc != d || loc.node != node) break;
      fn(loc.key, it->second);
    }
  }

  const std::map<ReplicaLoc, Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  friend bool operator==(const ReplicaStore&, const ReplicaStore&) = default;

 private:
  std::map<ReplicaLoc, Entry> entries_;
};

/// Checked lookup: the location must be a copy and the key must hash into it.
Entry lookup_replica(const ClusterConfig& cfg, const ReplicaStore& store, const ReplicaLoc& loc);

/// Single-copy store of the ground model. UNDEF entries are absent.
class FlatStore {
 public:
  Value get(RelationId i, const Tuple& key) const;
  void set(RelationId i, const Tuple& key, const Value& value);

  const std::map<std::pair<RelationId, Tuple>, Tuple>& entries() const { return entries_; }

  friend bool operator==(const FlatStore&, const FlatStore&) = default;

 private:
  std::map<std::pair<RelationId, Tuple>, Tuple> entries_;
};

}  // namespace replisim
