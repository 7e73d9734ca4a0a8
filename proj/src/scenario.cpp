#include "replisim/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace replisim {

namespace {

struct Field {
  std::size_t line = 0;
  std::string value;
};

// Fields of one named entity, in order of appearance.
struct Entity {
  std::string name;
  std::size_t line = 0;
  std::map<std::string, std::vector<Field>> fields;
};

class Entities {
 public:
  Entity& get(const std::string& name, std::size_t line) {
    auto it = index_.find(name);
    if (it != index_.end()) return items_[it->second];
    index_.emplace(name, items_.size());
    items_.push_back(Entity{name, line, {}});
    return items_.back();
  }
  std::vector<Entity>& items() { return items_; }

 private:
  std::map<std::string, std::size_t> index_;
  std::vector<Entity> items_;
};

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted && c == '\\') {
      ++k;
    } else if (c == '"') {
      quoted = !quoted;
    } else if (c == '#' && !quoted) {
      return line.substr(0, k);
    }
  }
  return line;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::string at_line(std::size_t line, const std::string& msg) {
  return "line " + std::to_string(line) + ": " + msg;
}

std::int64_t parse_int(const Field& f) {
  const std::string t = trim(f.value);
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(t, &used);
  } catch (const std::exception&) {
    throw ScenarioError({at_line(f.line, "expected an integer, got '" + t + "'")});
  }
  if (used != t.size()) throw ScenarioError({at_line(f.line, "expected an integer, got '" + t + "'")});
  return v;
}

std::uint32_t parse_count(const Field& f, std::int64_t min) {
  const std::int64_t v = parse_int(f);
  if (v < min || v > 1'000'000) {
    throw ScenarioError({at_line(f.line, "value " + std::to_string(v) + " out of range")});
  }
  return static_cast<std::uint32_t>(v);
}

HashRange parse_range(const std::string& text, std::size_t line) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw ScenarioError({at_line(line, "expected lo..hi, got '" + text + "'")});
  HashRange r;
  r.lo = parse_int({line, text.substr(0, dots)});
  r.hi = parse_int({line, text.substr(dots + 2)});
  if (r.lo > r.hi) throw ScenarioError({at_line(line, "empty range '" + text + "'")});
  return r;
}

// The single value of a scalar field, rejecting repeats.
const Field* scalar(const Entity& e, const std::string& key, std::vector<std::string>& diags) {
  auto it = e.fields.find(key);
  if (it == e.fields.end()) return nullptr;
  if (it->second.size() > 1) {
    diags.push_back(at_line(it->second[1].line, "duplicate key '" + key + "' for '" + e.name + "'"));
  }
  return &it->second.front();
}

void reject_unknown(const Entity& e, const std::vector<std::string>& known, const std::string& kind,
                    std::vector<std::string>& diags) {
  for (const auto& [key, fields] : e.fields) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      diags.push_back(at_line(fields.front().line, "unknown " + kind + " key '" + key + "'"));
    }
  }
}

DataCentreId lookup_dc(const ClusterConfig& cfg, const std::string& name, std::size_t line) {
  auto d = cfg.find_datacentre(name);
  if (!d) throw ScenarioError({at_line(line, "unknown data centre '" + name + "'")});
  return *d;
}

void build_datacentres(Entities& dcs, ClusterConfig& cfg, std::vector<std::string>& diags) {
  std::uint32_t next = 1;
  for (Entity& e : dcs.items()) {
    reject_unknown(e, {"offset", "dead"}, "datacentre", diags);
    DataCentre dc;
    dc.name = e.name;
    dc.offset_rank = next++;
    if (const Field* f = scalar(e, "offset", diags)) dc.offset_rank = parse_count(*f, 0);
    if (const Field* f = scalar(e, "dead", diags)) {
      for (const std::string& n : split(f->value, ',')) {
        if (!n.empty()) dc.dead_nodes.insert(parse_count({f->line, n}, 1));
      }
    }
    cfg.datacentres.push_back(std::move(dc));
  }
}

void build_relation(Entity& e, ClusterConfig& cfg, std::vector<std::string>& diags) {
  reject_unknown(e,
                 {"arity", "coarity", "hash", "ranges", "fragments", "datacentres", "nodes",
                  "replication", "copy"},
                 "relation", diags);
  RelationConfig rel;
  rel.name = e.name;
  if (const Field* f = scalar(e, "arity", diags)) rel.arity = parse_count(*f, 1);
  if (const Field* f = scalar(e, "coarity", diags)) rel.coarity = parse_count(*f, 1);
  if (const Field* f = scalar(e, "hash", diags)) {
    const HashRange h = parse_range(trim(f->value), f->line);
    rel.hash_min = h.lo;
    rel.hash_max = h.hi;
  }
  const Field* ranges = scalar(e, "ranges", diags);
  const Field* fragments = scalar(e, "fragments", diags);
  if (ranges && fragments) {
    diags.push_back(at_line(fragments->line, "give either ranges or fragments, not both"));
  }
  if (ranges) {
    for (const std::string& r : split(ranges->value, ',')) {
      rel.ranges.push_back(parse_range(r, ranges->line));
    }
    std::vector<HashRange> sorted = rel.ranges;
    std::sort(sorted.begin(), sorted.end(),
              [](const HashRange& a, const HashRange& b) { return a.lo < b.lo; });
    for (std::size_t k = 1; k < sorted.size(); ++k) {
      if (sorted[k].lo <= sorted[k - 1].hi) {
        diags.push_back(at_line(ranges->line, "overlapping ranges"));
        break;
      }
    }
  } else {
    const std::int64_t q = fragments ? parse_count(*fragments, 1) : 1;
    const std::int64_t width = rel.hash_max - rel.hash_min + 1;
    if (q > width) throw ScenarioError({at_line(fragments->line, "more fragments than hash values")});
    for (std::int64_t j = 0; j < q; ++j) {
      rel.ranges.push_back(
          {rel.hash_min + width * j / q, rel.hash_min + width * (j + 1) / q - 1});
    }
  }
  if (const Field* f = scalar(e, "datacentres", diags)) {
    for (const std::string& n : split(f->value, ',')) {
      rel.datacentres.push_back(lookup_dc(cfg, n, f->line));
    }
    std::sort(rel.datacentres.begin(), rel.datacentres.end());
    if (std::adjacent_find(rel.datacentres.begin(), rel.datacentres.end()) != rel.datacentres.end()) {
      diags.push_back(at_line(f->line, "data centre listed twice"));
    }
  } else {
    for (DataCentreId d = 0; d < cfg.datacentres.size(); ++d) rel.datacentres.push_back(d);
  }
  if (const Field* f = scalar(e, "replication", diags)) rel.replication = parse_count(*f, 1);
  rel.nodes = rel.replication;
  if (const Field* f = scalar(e, "nodes", diags)) rel.nodes = parse_count(*f, 1);
  if (auto it = e.fields.find("copy"); it != e.fields.end()) {
    for (const Field& f : it->second) {
      for (const std::string& c : split(f.value, ',')) {
        const auto at = c.find('@');
        const auto colon = c.rfind(':');
        if (at == std::string::npos || colon == std::string::npos || colon < at) {
          throw ScenarioError({at_line(f.line, "expected fragment@dc:node, got '" + c + "'")});
        }
        CopyKey key;
        key.fragment = parse_count({f.line, c.substr(0, at)}, 1);
        key.dc = lookup_dc(cfg, trim(c.substr(at + 1, colon - at - 1)), f.line);
        key.node = parse_count({f.line, c.substr(colon + 1)}, 1);
        if (!rel.copies.insert(key).second) diags.push_back(at_line(f.line, "copy listed twice"));
      }
    }
  }
  cfg.relations.push_back(std::move(rel));
}

template <typename Fn>
void guarded(std::vector<std::string>& diags, std::size_t line, Fn&& fn) {
  try {
    fn();
  } catch (const ScenarioError& e) {
    diags.insert(diags.end(), e.diagnostics().begin(), e.diagnostics().end());
  } catch (const ConfigError& e) {
    diags.push_back(at_line(line, e.what()));
  } catch (const ParseError& e) {
    diags.push_back(at_line(line, e.what()));
  }
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> diagnostics)
    : std::runtime_error([&] {
        std::string msg;
        for (const auto& d : diagnostics) msg += (msg.empty() ? "" : "\n") + d;
        return msg;
      }()),
      diagnostics_(std::move(diagnostics)) {}

std::size_t Scenario::request_count() const {
  std::size_t n = 0;
  for (const auto& c : clients) n += c.steps.size();
  return n;
}

RequestId Scenario::request_id(std::uint32_t client, std::size_t step) const {
  std::size_t id = 1;
  for (std::uint32_t c = 0; c < client; ++c) id += clients.at(c).steps.size();
  return static_cast<RequestId>(id + step);
}

std::optional<std::uint32_t> Scenario::find_client(std::string_view name) const {
  for (std::uint32_t c = 0; c < clients.size(); ++c) {
    if (clients[c].name == name) return c;
  }
  return std::nullopt;
}

Scenario parse_scenario(std::string_view text) {
  std::vector<std::string> diags;
  Entities dcs, rels, agents;
  std::vector<std::pair<Field, std::string>> data;  // (value, relation name)
  std::map<std::string, std::vector<Field>> top;    // policy.*, scenario.*

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      diags.push_back(at_line(line, "expected 'key = value'"));
      continue;
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const std::vector<std::string> parts = split(key, '.');
    if (std::any_of(parts.begin(), parts.end(), [](const std::string& p) { return p.empty(); })) {
      diags.push_back(at_line(line, "malformed key '" + key + "'"));
      continue;
    }
    const std::string& section = parts[0];
    if ((section == "datacentre" || section == "relation" || section == "agent") &&
        parts.size() == 3) {
      Entities& group = section == "datacentre" ? dcs : section == "relation" ? rels : agents;
      group.get(parts[1], line).fields[parts[2]].push_back({line, value});
    } else if (section == "data" && parts.size() == 2) {
      data.push_back({{line, value}, parts[1]});
    } else if ((section == "policy" && parts.size() == 2 &&
                (parts[1] == "read" || parts[1] == "write")) ||
               (section == "scenario" && parts.size() == 2 && parts[1] == "name")) {
      top[key].push_back({line, value});
    } else {
      diags.push_back(at_line(line, "unknown key '" + key + "'"));
    }
  }
  for (const auto& [key, fields] : top) {
    if (fields.size() > 1) diags.push_back(at_line(fields[1].line, "duplicate key '" + key + "'"));
  }
  if (!diags.empty()) throw ScenarioError(diags);

  Scenario sc;
  if (auto it = top.find("scenario.name"); it != top.end()) sc.name = it->second.front().value;

  // Whole-configuration problems are pinned to the declaration they name.
  auto locate = [&](const std::string& problem) -> std::string {
    std::size_t line = 0;
    auto named = [&](const std::string& prefix, Entities& group) {
      if (problem.rfind(prefix, 0) != 0) return;
      const auto end = problem.find('\'', prefix.size());
      const std::string name = problem.substr(prefix.size(), end - prefix.size());
      for (const Entity& e : group.items()) {
        if (e.name == name) line = e.line;
      }
    };
    named("relation '", rels);
    named("data centre '", dcs);
    for (const char* label : {"read", "write"}) {
      if (problem.rfind(std::string(label) + " policy", 0) == 0) {
        if (auto it = top.find(std::string("policy.") + label); it != top.end()) {
          line = it->second.front().line;
        }
      }
    }
    return at_line(line, problem);
  };

  ClusterConfig& cfg = sc.cluster;
  guarded(diags, 0, [&] { build_datacentres(dcs, cfg, diags); });
  if (cfg.datacentres.empty()) diags.push_back("line 0: no data centres declared");
  if (!diags.empty()) throw ScenarioError(diags);

  for (Entity& e : rels.items()) guarded(diags, e.line, [&] { build_relation(e, cfg, diags); });
  if (!diags.empty()) throw ScenarioError(diags);
  cfg.place_default_copies();
  for (const std::string& p : cfg.problems()) diags.push_back(locate(p));
  if (!diags.empty()) throw ScenarioError(diags);

  if (auto it = top.find("policy.read"); it != top.end()) {
    const Field& f = it->second.front();
    guarded(diags, f.line, [&] { sc.read_policy = parse_policy(f.value, cfg); });
  }
  if (auto it = top.find("policy.write"); it != top.end()) {
    const Field& f = it->second.front();
    guarded(diags, f.line, [&] { sc.write_policy = parse_policy(f.value, cfg); });
  }

  for (Entity& e : agents.items()) {
    reject_unknown(e, {"home", "step"}, "agent", diags);
    ClientProgram prog;
    prog.name = e.name;
    if (const Field* f = scalar(e, "home", diags)) {
      guarded(diags, f->line, [&] { prog.home = lookup_dc(cfg, f->value, f->line); });
    }
    if (auto it = e.fields.find("step"); it != e.fields.end()) {
      for (const Field& f : it->second) {
        guarded(diags, f.line, [&] { prog.steps.push_back(parse_request(f.value, cfg)); });
      }
    }
    sc.clients.push_back(std::move(prog));
  }

  for (const auto& [f, rel_name] : data) {
    guarded(diags, f.line, [&] {
      auto i = cfg.find_relation(rel_name);
      if (!i) throw ScenarioError({at_line(f.line, "unknown relation '" + rel_name + "'")});
      TermReader r(f.value);
      const Answer records = r.answer_set();
      r.expect_end();
      for (const auto& [k, v] : records) {
        check_arity(cfg, *i, k);
        check_coarity(cfg, *i, v);
        if (sc.initial.get(*i, k)) {
          throw ScenarioError({at_line(f.line, "initial record " + format_tuple(k) + " given twice")});
        }
        sc.initial.set(*i, k, v);
      }
    });
  }
  if (!diags.empty()) throw ScenarioError(diags);

  for (const std::string& p : scenario_problems(sc)) diags.push_back(locate(p));
  if (!diags.empty()) throw ScenarioError(diags);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({"cannot open scenario file '" + path + "'"});
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario sc = parse_scenario(buf.str());
  if (sc.name.empty()) sc.name = std::filesystem::path(path).stem().string();
  return sc;
}

std::vector<std::string> scenario_problems(const Scenario& s) {
  std::vector<std::string> out = s.cluster.problems();
  if (!out.empty()) return out;
  const ClusterConfig& cfg = s.cluster;
  for (RelationId i = 0; i < cfg.relations.size(); ++i) {
    const RelationConfig& rel = cfg.relation(i);
    for (const auto& [label, p] :
         {std::pair{"read", &s.read_policy}, std::pair{"write", &s.write_policy}}) {
      if (p->is_local() && !rel.has_datacentre(p->dc)) {
        out.push_back(std::string(label) + " policy " + format_policy(*p, cfg) +
                      " names a data centre outside relation '" + rel.name + "'");
        continue;
      }
      for (FragmentIndex j = 1; j <= rel.fragment_count(); ++j) {
        if (enumerate_compliant_selections(cfg, i, j, *p, 1).empty()) {
          out.push_back(std::string(label) + " policy " + format_policy(*p, cfg) +
                        " cannot be met by fragment " + std::to_string(j) + " of relation '" +
                        rel.name + "'");
        }
      }
      // Delegates only ever see the alive local copies.
      CountState best(cfg, i);
      for (FragmentIndex j = 1; j <= rel.fragment_count(); ++j) {
        for (DataCentreId d : rel.datacentres) {
          best.add(j, d, static_cast<std::uint32_t>(cfg.alive_local_copies(i, j, d).size()));
        }
      }
      if (!sufficient(best, *p, cfg, i)) {
        out.push_back(std::string(label) + " policy " + format_policy(*p, cfg) +
                      " is unreachable with the alive copies of relation '" + rel.name + "'");
      }
    }
  }
  std::set<std::string> names;
  for (const ClientProgram& c : s.clients) {
    if (!names.insert(c.name).second) out.push_back("duplicate agent '" + c.name + "'");
    if (c.home >= cfg.datacentres.size()) out.push_back("agent '" + c.name + "' has no home");
    for (const RequestBody& b : c.steps) {
      try {
        check_request(b, cfg);
      } catch (const ConfigError& e) {
        out.push_back("agent '" + c.name + "': " + e.what());
      }
    }
  }
  return out;
}

std::string format_scenario(const Scenario& s) {
  const ClusterConfig& cfg = s.cluster;
  std::ostringstream out;
  if (!s.name.empty()) out << "scenario.name = " << s.name << "\n";
  for (const DataCentre& dc : cfg.datacentres) {
    out << "datacentre." << dc.name << ".offset = " << dc.offset_rank << "\n";
    if (!dc.dead_nodes.empty()) {
      out << "datacentre." << dc.name << ".dead = ";
      bool first = true;
      for (NodeIndex n : dc.dead_nodes) {
        out << (first ? "" : ", ") << n;
        first = false;
      }
      out << "\n";
    }
  }
  for (const RelationConfig& rel : cfg.relations) {
    const std::string p = "relation." + rel.name + ".";
    out << p << "arity = " << rel.arity << "\n";
    out << p << "coarity = " << rel.coarity << "\n";
    out << p << "hash = " << rel.hash_min << ".." << rel.hash_max << "\n";
    out << p << "ranges = ";
    for (std::size_t k = 0; k < rel.ranges.size(); ++k) {
      out << (k ? ", " : "") << rel.ranges[k].lo << ".." << rel.ranges[k].hi;
    }
    out << "\n" << p << "datacentres = ";
    for (std::size_t k = 0; k < rel.datacentres.size(); ++k) {
      out << (k ? ", " : "") << cfg.datacentres[rel.datacentres[k]].name;
    }
    out << "\n" << p << "nodes = " << rel.nodes << "\n";
    out << p << "replication = " << rel.replication << "\n";
    out << p << "copy = ";
    bool first = true;
    for (const CopyKey& c : rel.copies) {
      out << (first ? "" : ", ") << c.fragment << "@" << cfg.datacentres[c.dc].name << ":" << c.node;
      first = false;
    }
    out << "\n";
  }
  out << "policy.read = " << format_policy(s.read_policy, cfg) << "\n";
  out << "policy.write = " << format_policy(s.write_policy, cfg) << "\n";
  for (const ClientProgram& c : s.clients) {
    out << "agent." << c.name << ".home = " << cfg.datacentres.at(c.home).name << "\n";
    for (const RequestBody& b : c.steps) {
      out << "agent." << c.name << ".step = " << format_request(b, cfg) << "\n";
    }
  }
  for (RelationId i = 0; i < cfg.relations.size(); ++i) {
    Answer records;
    for (const auto& [key, v] : s.initial.entries()) {
      if (key.first == i) records.emplace(key.second, v);
    }
    if (!records.empty()) {
      out << "data." << cfg.relations[i].name << " = " << format_answer(records) << "\n";
    }
  }
  return out.str();
}

Timestamp initial_timestamp(const ClusterConfig& cfg) {
  return cfg.timestamp(1, cfg.lowest_offset_datacentre());
}

ReplicaStore initial_replicas(const Scenario& s) {
  const ClusterConfig& cfg = s.cluster;
  const Timestamp t0 = initial_timestamp(cfg);
  ReplicaStore store;
  for (const auto& [key, v] : s.initial.entries()) {
    const RelationId i = key.first;
    const FragmentIndex j = hash_fragment(cfg, i, key.second);
    for (const NodeId& n : cfg.copies(i, j)) {
      store.store({i, j, n.dc, n.index, key.second}, Entry{v, t0});
    }
  }
  return store;
}

}  // namespace replisim
