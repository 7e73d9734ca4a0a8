#pragma once

#include <vector>

#include "replisim/core.hpp"
#include "replisim/policy.hpp"
#include "replisim/term.hpp"

namespace replisim {

/// One G_{i,j} per fragment, indexed by j - 1.
using FragmentSelections = std::vector<Selection>;

/// Every compliant choice of G_{i,1..q}, as the product of per-fragment lists.
class SelectionMenu {
 public:
  SelectionMenu() = default;
  SelectionMenu(const ClusterConfig& cfg, RelationId i, const Policy& p);

  /// Number of combined choices; 0 when some fragment has no compliant subset.
  std::size_t size() const;
  /// Mixed-radix decoding with fragment 1 as the least significant digit.
  FragmentSelections pick(std::size_t index) const;
  /// Inverse of pick; nullopt when some G is not on the menu.
  std::optional<std::size_t> index_of(const FragmentSelections& g) const;

  const std::vector<std::vector<Selection>>& per_fragment() const { return per_fragment_; }

 private:
  std::vector<std::vector<Selection>> per_fragment_;
};

Answer cm1_answer_read(const ClusterConfig& cfg, const ReplicaStore& store, const ReadRequest& req,
                       const FragmentSelections& g);

struct Cm1WriteOutcome {
  Timestamp ts;
  std::vector<ReplicaUpdate> updates;
  ClockBank clocks;                    // after the step
  std::vector<DataCentreId> adjusted;  // every d' named in some G_{i,j}
};

/// Draws one fresh timestamp at d, conditionally stores every written record
/// on the chosen replicas and adjusts the clocks of the data centres involved.
Cm1WriteOutcome cm1_perform_write(const ClusterConfig& cfg, const ReplicaStore& store,
                                  const ClockBank& clocks, DataCentreId d,
                                  const WriteRequest& req, const FragmentSelections& g);

}  // namespace replisim
