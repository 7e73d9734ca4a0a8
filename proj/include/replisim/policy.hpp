#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "replisim/core.hpp"

namespace replisim {

/// Exact fraction 0 < num/den < 1 for quorum thresholds.
struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 2;

  friend bool operator==(const Rational&, const Rational&) = default;
};

struct Policy {
  enum class Kind { kAll, kOne, kTwo, kThree, kQuorum, kEachQuorum, kLocalOne, kLocalQuorum };

  Kind kind = Kind::kAll;
  Rational q;           // QUORUM, EACH_QUORUM, LOCAL_QUORUM
  DataCentreId dc = 0;  // LOCAL_ONE, LOCAL_QUORUM

  static Policy all() { return {Kind::kAll, {}, 0}; }
  static Policy one() { return {Kind::kOne, {}, 0}; }
  static Policy two() { return {Kind::kTwo, {}, 0}; }
  static Policy three() { return {Kind::kThree, {}, 0}; }
  static Policy quorum(Rational q = {}) { return {Kind::kQuorum, q, 0}; }
  static Policy each_quorum(Rational q = {}) { return {Kind::kEachQuorum, q, 0}; }
  static Policy local_one(DataCentreId d) { return {Kind::kLocalOne, {}, d}; }
  static Policy local_quorum(Rational q, DataCentreId d) { return {Kind::kLocalQuorum, q, d}; }

  bool is_local() const { return kind == Kind::kLocalOne || kind == Kind::kLocalQuorum; }

  friend bool operator==(const Policy&, const Policy&) = default;
};

/// Scenario spelling: ALL, ONE, TWO, THREE, QUORUM(n/d), EACH_QUORUM(n/d),
/// LOCAL_ONE(dc), LOCAL_QUORUM(n/d,dc). Bare QUORUM means QUORUM(1/2).
Policy parse_policy(std::string_view text, const ClusterConfig& cfg);
std::string format_policy(const Policy& p, const ClusterConfig& cfg);

/// G_{i,j}: a subset of C_{i,j}, kept sorted.
using Selection = std::vector<NodeId>;

bool complies(const Selection& g, const Policy& p, const ClusterConfig& cfg, RelationId i,
              FragmentIndex j);

/// Delegate counters count(j) and count(j, d) for one relation.
class CountState {
 public:
  CountState() = default;
  CountState(const ClusterConfig& cfg, RelationId i);

  void add(FragmentIndex j, DataCentreId d, std::uint32_t x);
  std::uint32_t count(FragmentIndex j) const;
  std::uint32_t count(FragmentIndex j, DataCentreId d) const;
  FragmentIndex fragments() const { return static_cast<FragmentIndex>(totals_.size()); }

  friend bool operator==(const CountState&, const CountState&) = default;

 private:
  std::vector<std::uint32_t> totals_;
  std::vector<std::vector<std::uint32_t>> per_dc_;  // [j - 1][d]
};

/// gamma_{i,j} = |C_{i,j}|.
std::uint32_t gamma(const ClusterConfig& cfg, RelationId i, FragmentIndex j);
/// delta_{i,j,d} = |C_{i,j,d}|.
std::uint32_t delta(const ClusterConfig& cfg, RelationId i, FragmentIndex j, DataCentreId d);

bool sufficient(const CountState& counts, const Policy& p, const ClusterConfig& cfg, RelationId i);

/// Whether a read/write pair guarantees that reads meet the latest write.
bool is_appropriate(const Policy& read, const Policy& write);

/// Compliant subsets of C_{i,j}, smallest first and lexicographic within a
/// size, at most `bound` of them. Empty when the policy cannot be met.
std::vector<Selection> enumerate_compliant_selections(const ClusterConfig& cfg, RelationId i,
                                                      FragmentIndex j, const Policy& p,
                                                      std::size_t bound);

}  // namespace replisim
