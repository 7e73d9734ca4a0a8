#include "replisim/predicates.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace replisim {

namespace {

struct WriteSource {
  bool initial = false;
  const RequestRecord* write = nullptr;
};

// `a` ends before `b` begins. The initial state precedes every write.
bool precedes(const WriteSource& a, const WriteSource& b) {
  if (b.initial) return false;
  if (a.initial) return true;
  return a.write->answered < b.write->sent;
}

std::vector<WriteSource> sources(const std::vector<RequestRecord>& recs, const Scenario& s,
                                 RelationId i, const Tuple& k, const Value& v) {
  std::vector<WriteSource> out;
  if (s.initial.get(i, k) == v) out.push_back({true, nullptr});
  for (const RequestRecord& r : recs) {
    const auto* w = std::get_if<WriteRequest>(&r.body);
    if (!w || w->relation != i) continue;
    auto it = w->writes.find(k);
    if (it != w->writes.end() && it->second == v) out.push_back({false, &r});
  }
  return out;
}

Value answer_at(const Answer& a, const Tuple& k) {
  auto it = a.find(k);
  if (it == a.end()) return std::nullopt;
  return it->second;
}

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

bool anomaly_read_stale(const Trace& t, const Scenario& s) {
  const std::vector<RequestRecord> recs = request_records(t);
  const ClusterConfig& cfg = s.cluster;
  std::set<std::pair<RelationId, Tuple>> keys;
  for (const RequestRecord& r : recs) {
    const RelationId i = relation_of(r.body);
    if (const auto* w = std::get_if<WriteRequest>(&r.body)) {
      for (const auto& [k, v] : w->writes) keys.insert({i, k});
    } else {
      for (const auto& [k, v] : *r.response.answer) keys.insert({i, k});
    }
  }
  for (const auto& [key, v] : s.initial.entries()) keys.insert(key);

  for (std::size_t a = 0; a < recs.size(); ++a) {
    const auto* r1 = std::get_if<ReadRequest>(&recs[a].body);
    if (!r1) continue;
    for (std::size_t b = 0; b < recs.size(); ++b) {
      const auto* r2 = std::get_if<ReadRequest>(&recs[b].body);
      if (!r2 || recs[b].agent != recs[a].agent || recs[b].sent <= recs[a].answered ||
          r2->relation != r1->relation) {
        continue;
      }
      const RelationId i = r1->relation;
      for (const auto& [ki, k] : keys) {
        if (ki != i || !holds(r1->condition, cfg, i, k) || !holds(r2->condition, cfg, i, k)) continue;
        const Value v1 = answer_at(*recs[a].response.answer, k);
        const Value v2 = answer_at(*recs[b].response.answer, k);
        if (v1 == v2) continue;
        const auto s1 = sources(recs, s, i, k, v1);
        const auto s2 = sources(recs, s, i, k, v2);
        if (s2.empty()) continue;
        for (const WriteSource& first : s1) {
          bool all_older = true;
          for (const WriteSource& second : s2) all_older = all_older && precedes(second, first);
          if (all_older) return true;
        }
      }
    }
  }
  return false;
}

bool print_pair(const Trace& t, const Scenario& s) {
  struct Printed {
    std::uint32_t agent;
    std::uint64_t at;
    RelationId relation;
    Tuple key;
    bool updated;  // differs from the initial value
  };
  std::vector<Printed> seen;
  const ClusterConfig& cfg = s.cluster;
  for (const RequestRecord& r : request_records(t)) {
    const auto* read = std::get_if<ReadRequest>(&r.body);
    if (!read || !read->print) continue;
    std::set<Tuple> keys;
    for (const auto& [k, v] : *r.response.answer) keys.insert(k);
    for (const auto& [key, v] : s.initial.entries()) {
      if (key.first == read->relation && holds(read->condition, cfg, read->relation, key.second)) {
        keys.insert(key.second);
      }
    }
    for (const Tuple& k : keys) {
      const bool updated = answer_at(*r.response.answer, k) != s.initial.get(read->relation, k);
      seen.push_back({r.agent, r.answered, read->relation, k, updated});
    }
  }
  auto same_loc = [](const Printed& a, const Printed& b) {
    return a.relation == b.relation && a.key == b.key;
  };
  // a1 then a2 by one agent, b1 then b2 by another, crosswise on two locations.
  for (const Printed& a1 : seen) {
    if (!a1.updated) continue;
    for (const Printed& a2 : seen) {
      if (a2.agent != a1.agent || a2.at <= a1.at || a2.updated || same_loc(a1, a2)) continue;
      for (const Printed& b1 : seen) {
        if (b1.agent == a1.agent || !b1.updated || !same_loc(b1, a2)) continue;
        for (const Printed& b2 : seen) {
          if (b2.agent == b1.agent && b2.at > b1.at && !b2.updated && same_loc(b2, a1)) return true;
        }
      }
    }
  }
  return false;
}

CustomPredicate parse_custom_predicate(std::string_view text, const Scenario& s) {
  CustomPredicate p;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto fail = [&](const std::string& what) -> ParseError {
      return ParseError("predicate line " + std::to_string(lineno) + ": " + what);
    };
    std::istringstream words(t);
    std::string head;
    words >> head;
    if (head == "verdict") {
      std::string v;
      words >> v;
      if (v == "incompatible") {
        p.verdict = VerdictKind::kIncompatible;
      } else if (v == "not-serialisable") {
        p.verdict = VerdictKind::kNotSerialisable;
      } else {
        throw fail("expected incompatible or not-serialisable");
      }
    } else if (head == "observe") {
      std::string agent;
      long long nth = 0;
      if (!(words >> agent >> nth) || nth < 1) throw fail("expected observe <agent> <nth> <term>");
      auto c = s.find_client(agent);
      if (!c) throw fail("unknown agent '" + agent + "'");
      std::string rest;
      std::getline(words, rest);
      try {
        p.observations.push_back({*c, static_cast<std::size_t>(nth), parse_response(rest, s.cluster)});
      } catch (const std::exception& e) {
        throw fail(e.what());
      }
    } else {
      throw fail("unknown directive '" + head + "'");
    }
  }
  return p;
}

CustomPredicate load_custom_predicate(const std::string& path, const Scenario& s) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open predicate file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_custom_predicate(buf.str(), s);
}

bool custom_holds(const CustomPredicate& p, const Trace& t, const Scenario& s,
                  const CheckOptions& check) {
  for (const Observation& o : p.observations) {
    std::size_t seen = 0;
    bool matched = false;
    for (const TraceEvent& e : t.events) {
      if (e.agent != o.agent || e.is_request()) continue;
      if (++seen == o.nth) {
        matched = e.response() == o.response;
        break;
      }
    }
    if (!matched) return false;
  }
  if (p.verdict == VerdictKind::kIncompatible) {
    const Verdict v = check_view_compatible(t, s, check);
    return !v.positive() && v.exhaustive;
  }
  if (p.verdict == VerdictKind::kNotSerialisable) {
    const Verdict v = check_view_serialisable(t, s, check);
    return !v.positive() && v.exhaustive;
  }
  return true;
}

bool order_only_predicate(std::string_view name) {
  return name == "anomaly-read-stale" || name == "print-pair";
}

TracePredicate make_predicate(std::string_view name, const Scenario& s,
                              const std::string& predicate_file, const CheckOptions& options) {
  const Scenario* sc = &s;
  CheckOptions check = options;
  check.flag_waiver = false;
  if (name == "anomaly-read-stale") {
    return [sc](const Trace& t) { return anomaly_read_stale(t, *sc); };
  }
  if (name == "print-pair") {
    return [sc](const Trace& t) { return print_pair(t, *sc); };
  }
  if (name == "incompatible") {
    return [sc, check](const Trace& t) {
      const Verdict v = check_view_compatible(t, *sc, check);
      return !v.positive() && v.exhaustive;
    };
  }
  if (name == "not-serialisable") {
    return [sc, check](const Trace& t) {
      const Verdict v = check_view_serialisable(t, *sc, check);
      return !v.positive() && v.exhaustive;
    };
  }
  if (name == "custom-file") {
    if (predicate_file.empty()) throw ConfigError("custom-file needs --predicate-file");
    CustomPredicate p = load_custom_predicate(predicate_file, s);
    return [sc, p, check](const Trace& t) { return custom_holds(p, t, *sc, check); };
  }
  throw ConfigError("unknown predicate '" + std::string(name) + "'");
}

}  // namespace replisim
