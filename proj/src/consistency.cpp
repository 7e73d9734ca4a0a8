#include "replisim/consistency.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include "replisim/cm0.hpp"

namespace replisim {

namespace {

using Location = std::pair<RelationId, Tuple>;

std::string flat_key(const FlatStore& flat) {
  std::string out;
  for (const auto& [key, v] : flat.entries()) {
    out += std::to_string(key.first) + format_tuple(key.second) + "=" + format_tuple(v) + ";";
  }
  return out;
}

bool observed(const std::vector<RequestRecord>& recs, const ClusterConfig& cfg, RelationId i,
              const Tuple& k, const Value& v) {
  for (const RequestRecord& r : recs) {
    const auto* read = std::get_if<ReadRequest>(&r.body);
    if (!read || read->relation != i || !holds(read->condition, cfg, i, k)) continue;
    const Answer& ans = *r.response.answer;
    auto it = ans.find(k);
    if (v ? (it != ans.end() && it->second == *v) : it == ans.end()) return true;
  }
  return false;
}

// The part of each write that the oracle installs.
std::vector<WriteSet> effective_writes(const std::vector<RequestRecord>& recs,
                                       const ClusterConfig& cfg, bool waiver) {
  std::vector<WriteSet> out(recs.size());
  for (std::size_t k = 0; k < recs.size(); ++k) {
    const auto* w = std::get_if<WriteRequest>(&recs[k].body);
    if (!w) continue;
    for (const auto& [key, v] : w->writes) {
      if (!waiver || observed(recs, cfg, w->relation, key, v)) out[k].emplace(key, v);
    }
  }
  return out;
}

bool replay_one(FlatStore& flat, const ClusterConfig& cfg, const RequestRecord& r,
                const WriteSet& eff) {
  if (const auto* read = std::get_if<ReadRequest>(&r.body)) {
    return db_answer_read(flat, cfg, read->relation, read->condition) == *r.response.answer;
  }
  db_perform_write(flat, cfg, relation_of(r.body), eff);
  return true;
}

class SearchBase {
 public:
  SearchBase(const Trace& t, const Scenario& s, const CheckOptions& opts)
      : cfg_(s.cluster),
        initial_(s.initial),
        recs_(request_records(t)),
        eff_(effective_writes(recs_, s.cluster, opts.waiver)),
        budget_(opts.budget) {
    if (recs_.size() > 64) throw TraceError("traces with more than 64 requests are not supported");
  }

  bool budget_hit() const { return budget_hit_; }
  std::uint64_t replays() const { return replays_; }

 protected:
  bool spend() {
    if (replays_ >= budget_) {
      budget_hit_ = true;
      return false;
    }
    ++replays_;
    return true;
  }

  const ClusterConfig& cfg_;
  FlatStore initial_;
  std::vector<RequestRecord> recs_;
  std::vector<WriteSet> eff_;
  std::uint64_t budget_;
  std::uint64_t replays_ = 0;
  bool budget_hit_ = false;
  std::unordered_set<std::string> failed_;
};

class CompatSearch : public SearchBase {
 public:
  using SearchBase::SearchBase;

  bool run() { return dfs(0, initial_, 0, false, {}); }

  std::vector<RequestId> order() const {
    std::vector<RequestId> out;
    for (std::size_t k : order_) out.push_back(recs_[k].id);
    return out;
  }
  const std::vector<std::uint64_t>& points() const { return points_; }

 private:
  bool dfs(std::uint64_t mask, const FlatStore& flat, std::uint64_t point, bool group_read,
           const std::map<Location, Value>& group_writes) {
    const std::size_t n = recs_.size();
    if (mask == (n == 64 ? ~0ULL : (1ULL << n) - 1)) return true;
    std::string key = std::to_string(mask) + "|" + std::to_string(point) + (group_read ? "r|" : "w|");
    for (const auto& [loc, v] : group_writes) {
      key += std::to_string(loc.first) + format_tuple(loc.second) + "=" + format_value(v) + ";";
    }
    key += "|" + flat_key(flat);
    if (failed_.count(key)) return false;

    for (std::size_t k = 0; k < n; ++k) {
      if (mask & (1ULL << k)) continue;
      const RequestRecord& r = recs_[k];
      const std::uint64_t lo = r.sent + 1;
      std::uint64_t pt = 0;
      bool next_read = false;
      std::map<Location, Value> next_writes;
      if (is_read(r.body)) {
        pt = std::max(lo, point);
        next_read = true;
        if (pt == point) next_writes = group_writes;
      } else {
        const RelationId i = relation_of(r.body);
        bool clash = group_read;
        for (const auto& [key2, v] : eff_[k]) {
          auto it = group_writes.find({i, key2});
          if (it != group_writes.end() && it->second != v) clash = true;
        }
        if (lo > point) {
          pt = lo;
        } else if (!clash) {
          pt = point;
          next_writes = group_writes;
        } else {
          pt = point + 1;
        }
        for (const auto& [key2, v] : eff_[k]) next_writes[{i, key2}] = v;
      }
      if (pt > r.answered) continue;
      bool starves = false;
      for (std::size_t o = 0; o < n; ++o) {
        if (o != k && !(mask & (1ULL << o)) && recs_[o].answered < pt) starves = true;
      }
      if (starves) continue;
      if (!spend()) return false;
      FlatStore after = flat;
      if (!replay_one(after, cfg_, r, eff_[k])) continue;
      order_.push_back(k);
      points_.push_back(pt);
      if (dfs(mask | (1ULL << k), after, pt, next_read, next_writes)) return true;
      order_.pop_back();
      points_.pop_back();
      if (budget_hit_) return false;
    }
    failed_.insert(std::move(key));
    return false;
  }

  std::vector<std::size_t> order_;
  std::vector<std::uint64_t> points_;
};

class SerialSearch : public SearchBase {
 public:
  SerialSearch(const Trace& t, const Scenario& s, const CheckOptions& opts)
      : SearchBase(t, s, opts), before_(recs_.size(), -1) {
    std::map<std::uint32_t, std::size_t> last;
    for (std::size_t k = 0; k < recs_.size(); ++k) {
      auto it = last.find(recs_[k].agent);
      if (it != last.end()) before_[k] = static_cast<int>(it->second);
      last[recs_[k].agent] = k;
    }
  }

  bool run() { return dfs(0, initial_); }

  std::vector<RequestId> order() const {
    std::vector<RequestId> out;
    for (std::size_t k : order_) out.push_back(recs_[k].id);
    return out;
  }

 private:
  bool dfs(std::uint64_t mask, const FlatStore& flat) {
    const std::size_t n = recs_.size();
    if (mask == (n == 64 ? ~0ULL : (1ULL << n) - 1)) return true;
    std::string key = std::to_string(mask) + "|" + flat_key(flat);
    if (failed_.count(key)) return false;
    for (std::size_t k = 0; k < n; ++k) {
      if (mask & (1ULL << k)) continue;
      if (before_[k] >= 0 && !(mask & (1ULL << before_[k]))) continue;
      if (!spend()) return false;
      FlatStore after = flat;
      if (!replay_one(after, cfg_, recs_[k], eff_[k])) continue;
      order_.push_back(k);
      if (dfs(mask | (1ULL << k), after)) return true;
      order_.pop_back();
      if (budget_hit_) return false;
    }
    failed_.insert(std::move(key));
    return false;
  }

  std::vector<int> before_;  // previous request of the same agent
  std::vector<std::size_t> order_;
};

}  // namespace

std::vector<RequestRecord> request_records(const Trace& t) {
  std::map<RequestId, RequestRecord> open, done;
  for (const TraceEvent& e : t.events) {
    if (e.is_request()) {
      if (open.count(e.request) || done.count(e.request)) {
        throw TraceError("request " + std::to_string(e.request) + " issued twice");
      }
      RequestRecord r;
      r.id = e.request;
      r.agent = e.agent;
      r.body = e.body();
      r.sent = e.index;
      open.emplace(e.request, std::move(r));
      continue;
    }
    auto it = open.find(e.request);
    if (it == open.end()) {
      throw TraceError("response to unknown or answered request " + std::to_string(e.request));
    }
    RequestRecord r = std::move(it->second);
    open.erase(it);
    if (r.agent != e.agent) throw TraceError("response delivered to another agent");
    if (e.index <= r.sent) throw TraceError("response not after its request");
    const Response& resp = e.response();
    const auto* read = std::get_if<ReadRequest>(&r.body);
    if (resp.relation != relation_of(r.body) || (read != nullptr) != resp.answer.has_value()) {
      throw TraceError("response of request " + std::to_string(r.id) + " does not match its kind");
    }
    if ((e.kind == EventKind::kPrint) != (read != nullptr && read->print)) {
      throw TraceError("PRINT events must answer print requests");
    }
    r.answered = e.index;
    r.response_kind = e.kind;
    r.response = resp;
    done.emplace(r.id, std::move(r));
  }
  if (!open.empty()) throw TraceError("trace is incomplete: request without response");
  std::vector<RequestRecord> out;
  for (auto& [id, r] : done) out.push_back(std::move(r));
  std::sort(out.begin(), out.end(), [](const RequestRecord& a, const RequestRecord& b) {
    return std::tie(a.sent, a.id) < std::tie(b.sent, b.id);
  });
  // Each agent waits for a response before its next request.
  std::map<std::uint32_t, std::uint64_t> last;
  for (const RequestRecord& r : out) {
    auto it = last.find(r.agent);
    if (it != last.end() && it->second >= r.sent) {
      throw TraceError("agent issued a request before its previous response");
    }
    last[r.agent] = r.answered;
  }
  return out;
}

std::string_view verdict_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::kCompatible: return "COMPATIBLE";
    case VerdictKind::kIncompatible: return "INCOMPATIBLE";
    case VerdictKind::kSerialisable: return "SERIALISABLE";
    case VerdictKind::kNotSerialisable: return "NOT_SERIALISABLE";
  }
  return "?";
}

Verdict check_view_compatible(const Trace& t, const Scenario& s, const CheckOptions& opts) {
  CompatSearch search(t, s, opts);
  Verdict v;
  const bool ok = search.run();
  v.replays = search.replays();
  if (ok) {
    v.kind = VerdictKind::kCompatible;
    v.exhaustive = true;
    v.order = search.order();
    v.points = search.points();
  } else {
    v.kind = VerdictKind::kIncompatible;
    v.exhaustive = !search.budget_hit();
  }
  if (ok && opts.waiver && opts.flag_waiver) {
    CheckOptions strict = opts;
    strict.waiver = false;
    strict.flag_waiver = false;
    const Verdict w = check_view_compatible(t, s, strict);
    v.waiver_dependent = !w.positive() && w.exhaustive;
  }
  return v;
}

Verdict check_view_serialisable(const Trace& t, const Scenario& s, const CheckOptions& opts) {
  SerialSearch search(t, s, opts);
  Verdict v;
  const bool ok = search.run();
  v.replays = search.replays();
  if (ok) {
    v.kind = VerdictKind::kSerialisable;
    v.exhaustive = true;
    v.order = search.order();
  } else {
    v.kind = VerdictKind::kNotSerialisable;
    v.exhaustive = !search.budget_hit();
  }
  if (ok && opts.waiver && opts.flag_waiver) {
    CheckOptions strict = opts;
    strict.waiver = false;
    strict.flag_waiver = false;
    const Verdict w = check_view_serialisable(t, s, strict);
    v.waiver_dependent = !w.positive() && w.exhaustive;
  }
  return v;
}

bool replay_matches(const Trace& t, const Scenario& s, const std::vector<RequestId>& order,
                    bool waiver) {
  const std::vector<RequestRecord> recs = request_records(t);
  const std::vector<WriteSet> eff = effective_writes(recs, s.cluster, waiver);
  if (order.size() != recs.size()) return false;
  FlatStore flat = s.initial;
  std::vector<bool> used(recs.size(), false);
  for (RequestId id : order) {
    std::size_t k = 0;
    while (k < recs.size() && recs[k].id != id) ++k;
    if (k == recs.size() || used[k]) return false;
    used[k] = true;
    if (!replay_one(flat, s.cluster, recs[k], eff[k])) return false;
  }
  return true;
}

bool is_serial(const Trace& t) {
  const std::vector<RequestRecord> recs = request_records(t);
  for (const RequestRecord& r : recs) {
    for (const TraceEvent& e : t.events) {
      if (e.index > r.sent && e.index < r.answered) return false;
    }
  }
  for (const RequestRecord& a : recs) {
    for (const RequestRecord& b : recs) {
      if (a.sent == b.sent && a.answered != b.answered) return false;
    }
  }
  return true;
}

bool view_equivalent(const Trace& a, const Trace& b) {
  std::map<std::uint32_t, std::vector<const TraceEvent*>> pa, pb;
  for (const TraceEvent& e : a.events) pa[e.agent].push_back(&e);
  for (const TraceEvent& e : b.events) pb[e.agent].push_back(&e);
  if (pa.size() != pb.size()) return false;
  for (const auto& [agent, xs] : pa) {
    auto it = pb.find(agent);
    if (it == pb.end() || it->second.size() != xs.size()) return false;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const TraceEvent& x = *xs[k];
      const TraceEvent& y = *it->second[k];
      if (x.kind != y.kind || x.request != y.request || !(x.payload == y.payload)) return false;
    }
  }
  return true;
}

Trace serial_trace(const Trace& t, const std::vector<RequestId>& order) {
  const std::vector<RequestRecord> recs = request_records(t);
  Trace out;
  std::uint64_t index = 0;
  for (RequestId id : order) {
    auto it = std::find_if(recs.begin(), recs.end(), [id](const RequestRecord& r) { return r.id == id; });
    if (it == recs.end()) throw TraceError("order names unknown request " + std::to_string(id));
    out.events.push_back({++index, EventKind::kRequest, it->agent, it->id, it->body});
    out.events.push_back({++index, it->response_kind, it->agent, it->id, it->response});
  }
  return out;
}

std::string format_verdict(const Verdict& v) {
  std::string witness;
  for (std::size_t k = 0; k < v.order.size(); ++k) {
    if (k) witness += ',';
    witness += std::to_string(v.order[k]);
    if (k < v.points.size()) witness += "@" + std::to_string(v.points[k]);
  }
  if (!v.positive()) {
    witness = "NONE";
  } else if (witness.empty()) {
    witness = "EMPTY";
  }
  return "verdict=" + std::string(verdict_name(v.kind)) +
         " exhaustive=" + (v.exhaustive ? "true" : "false") + " witness=" + witness;
}

}  // namespace replisim
