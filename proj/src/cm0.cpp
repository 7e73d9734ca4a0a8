#include "replisim/cm0.hpp"

namespace replisim {

Answer db_answer_read(const FlatStore& store, const ClusterConfig& cfg, RelationId i,
                      const Condition& phi) {
  cfg.relation(i);
  Answer out;
  const auto& entries = store.entries();
  for (auto it = entries.lower_bound({i, Tuple{}}); it != entries.end() && it->first.first == i;
       ++it) {
    if (holds(phi, cfg, i, it->first.second)) out.emplace(it->first.second, it->second);
  }
  return out;
}

Response db_perform_write(FlatStore& store, const ClusterConfig& cfg, RelationId i,
                          const WriteSet& p) {
  for (const auto& [k, v] : p) {
    check_arity(cfg, i, k);
    check_coarity(cfg, i, v);
  }
  for (const auto& [k, v] : p) store.set(i, k, v);
  return Response{i, std::nullopt};
}

Response db_handle(FlatStore& store, const ClusterConfig& cfg, const RequestBody& body) {
  if (const auto* r = std::get_if<ReadRequest>(&body)) {
    return Response{r->relation, db_answer_read(store, cfg, r->relation, r->condition)};
  }
  const auto& w = std::get<WriteRequest>(body);
  return db_perform_write(store, cfg, w.relation, w.writes);
}

}  // namespace replisim
