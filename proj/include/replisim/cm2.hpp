#pragma once

#include <map>
#include <vector>

#include "replisim/core.hpp"
#include "replisim/policy.hpp"
#include "replisim/term.hpp"

namespace replisim {

/// Per-key (value, timestamp) triples; at most one per key.
using TripleSet = std::map<Tuple, Entry>;

/// x = (|G_{i,1,d}|, ..., |G_{i,q,d}|).
using CopyCounts = std::vector<std::uint32_t>;

struct LocalReadResult {
  TripleSet triples;
  CopyCounts counts;
};

/// Local maximum per key over the alive local copies. UNDEF triples are kept.
LocalReadResult cm2_handle_locally_read(const ClusterConfig& cfg, const ReplicaStore& store,
                                        DataCentreId d, const ReadRequest& req);

struct LocalWriteResult {
  std::vector<ReplicaUpdate> updates;
  CopyCounts counts;  // unsuccessful conditional updates count too
  ClockBank clocks;
};

/// Adjusts d's clock to t, then conditionally writes every alive local copy.
LocalWriteResult cm2_handle_locally_write(const ClusterConfig& cfg, const ReplicaStore& store,
                                          const ClockBank& clocks, DataCentreId d,
                                          const WriteRequest& req, const Timestamp& t);

/// Delegate-side bookkeeping shared by both collect programs.
struct Collector {
  TripleSet answers;
  CountState counts;

  friend bool operator==(const Collector&, const Collector&) = default;
};

/// Merges triples keeping the later timestamp per key, and adds x to the counts.
void collect(Collector& c, const TripleSet& triples, const CopyCounts& x, DataCentreId from);

/// The final answer: defined values only.
Answer respond_answer(const TripleSet& triples);

}  // namespace replisim
