#pragma once

#include "replisim/core.hpp"
#include "replisim/term.hpp"

namespace replisim {

/// {(k, v) | phi(k), store(i, k) = v, v defined}.
Answer db_answer_read(const FlatStore& store, const ClusterConfig& cfg, RelationId i,
                      const Condition& phi);

/// Applies every (k, v) of the write set; UNDEF deletes. Returns the acknowledgement.
Response db_perform_write(FlatStore& store, const ClusterConfig& cfg, RelationId i,
                          const WriteSet& p);

/// One atomic db step for either request kind.
Response db_handle(FlatStore& store, const ClusterConfig& cfg, const RequestBody& body);

}  // namespace replisim
