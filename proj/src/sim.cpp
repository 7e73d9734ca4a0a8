#include "replisim/sim.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "replisim/cm0.hpp"

namespace replisim {

namespace {

// Stand-in for the id of a delegate spawned in the current step.
constexpr DelegateId kSpawned = 0;

struct Send {
  AgentRef to;
  Payload payload;
};

template <typename... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <typename... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

std::uint64_t parse_u64(std::string_view text, const char* what) {
  const std::string t = trim(text);
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != t.size() || t.front() == '-') {
    throw ScheduleError(std::string("expected ") + what + ", got '" + t + "'");
  }
  return v;
}

void put_entry(std::string& out, const Entry& e) {
  out += format_value(e.value);
  out += '@';
  if (e.ts.is_neg_inf()) {
    out += "-inf";
  } else {
    out += std::to_string(e.ts.tick()) + "." + std::to_string(e.ts.dc());
  }
}

void put_counts(std::string& out, const CopyCounts& x) {
  out += '[';
  for (auto n : x) out += std::to_string(n) + ",";
  out += ']';
}

void put_triples(std::string& out, const TripleSet& t) {
  out += '{';
  for (const auto& [k, e] : t) {
    out += format_tuple(k) + "=";
    put_entry(out, e);
    out += ',';
  }
  out += '}';
}

}  // namespace

std::string_view model_name(Model m) {
  switch (m) {
    case Model::kCm0: return "cm0";
    case Model::kCm1: return "cm1";
    case Model::kCm2: return "cm2";
  }
  return "?";
}

Model parse_model(std::string_view text) {
  if (text == "cm0") return Model::kCm0;
  if (text == "cm1") return Model::kCm1;
  if (text == "cm2") return Model::kCm2;
  throw ConfigError("unknown model '" + std::string(text) + "' (expected cm0, cm1 or cm2)");
}

std::string format_agent(const AgentRef& a, const Scenario& s) {
  switch (a.kind) {
    case AgentRef::Kind::kClient: return "client:" + s.clients.at(a.id).name;
    case AgentRef::Kind::kDb: return "db";
    case AgentRef::Kind::kDataCentre: return "dc:" + s.cluster.datacentres.at(a.id).name;
    case AgentRef::Kind::kDelegate: return "delegate:" + std::to_string(a.id);
    case AgentRef::Kind::kClock: return "clock:" + s.cluster.datacentres.at(a.id).name;
  }
  return "?";
}

AgentRef parse_agent(std::string_view text, const Scenario& s) {
  const std::string t = trim(text);
  if (t == "db") return {AgentRef::Kind::kDb, 0};
  const auto colon = t.find(':');
  if (colon == std::string::npos) throw ScheduleError("unknown agent '" + t + "'");
  const std::string kind = t.substr(0, colon);
  const std::string name = t.substr(colon + 1);
  if (kind == "client") {
    if (auto c = s.find_client(name)) return {AgentRef::Kind::kClient, *c};
  } else if (kind == "dc") {
    if (auto d = s.cluster.find_datacentre(name)) return {AgentRef::Kind::kDataCentre, *d};
  } else if (kind == "clock") {
    if (auto d = s.cluster.find_datacentre(name)) return {AgentRef::Kind::kClock, *d};
  } else if (kind == "delegate") {
    return {AgentRef::Kind::kDelegate, static_cast<std::uint32_t>(parse_u64(name, "delegate id"))};
  }
  throw ScheduleError("unknown agent '" + t + "'");
}

std::string format_step(const GlobalStep& step, const Scenario& s) {
  std::string out;
  for (const AgentStep& a : step) {
    if (!out.empty()) out += '+';
    if (a.agent.kind == AgentRef::Kind::kClock) {
      out += format_agent(a.agent, s) + "@" + std::to_string(a.message);
      continue;
    }
    out += format_agent(a.agent, s) + "#" + std::to_string(a.message) + "/" +
           std::to_string(a.selection);
  }
  return out;
}

GlobalStep parse_step(std::string_view text, const Scenario& s) {
  GlobalStep step;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('+', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string part = trim(text.substr(start, end - start));
    if (const auto at = part.find('@'); at != std::string::npos && part.find('#') == std::string::npos) {
      AgentStep a;
      a.agent = parse_agent(part.substr(0, at), s);
      if (a.agent.kind != AgentRef::Kind::kClock) throw ScheduleError("only clock moves take '@', got '" + part + "'");
      a.message = parse_u64(part.substr(at + 1), "clock tick");
      step.push_back(a);
      start = end + 1;
      continue;
    }
    const auto hash = part.find('#');
    const auto slash = part.find('/', hash == std::string::npos ? 0 : hash);
    if (hash == std::string::npos || slash == std::string::npos) {
      throw ScheduleError("expected agent#message/selection, got '" + part + "'");
    }
    AgentStep a;
    a.agent = parse_agent(part.substr(0, hash), s);
    a.message = parse_u64(part.substr(hash + 1, slash - hash - 1), "message id");
    a.selection = parse_u64(part.substr(slash + 1), "selection index");
    step.push_back(a);
    start = end + 1;
  }
  return step;
}

std::string format_schedule(const Schedule& sched, const Scenario& s) {
  std::string out;
  for (const GlobalStep& g : sched) out += format_step(g, s) + "\n";
  return out;
}

Schedule parse_schedule(std::string_view text, const Scenario& s) {
  Schedule sched;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    try {
      sched.push_back(parse_step(t, s));
    } catch (const ScheduleError& e) {
      throw ScheduleError("schedule line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return sched;
}

Schedule load_schedule(const std::string& path, const Scenario& s) {
  std::ifstream in(path);
  if (!in) throw ScheduleError("cannot open schedule file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_schedule(buf.str(), s);
}

struct Simulation::Menus {
  std::vector<SelectionMenu> read;
  std::vector<SelectionMenu> write;
};

struct Simulation::Effects {
  std::vector<ReplicaUpdate> replica_updates;
  std::vector<std::pair<std::pair<RelationId, Tuple>, Value>> flat_updates;
  std::map<DataCentreId, std::uint64_t> ticks;
  std::vector<std::pair<DataCentreId, Timestamp>> obligations;
  std::vector<std::pair<DataCentreId, Timestamp>> issued;
  std::vector<MessageId> consumed;
  std::vector<Send> sends;
  std::map<ClientId, ClientState> clients;
  std::optional<Delegate> spawned;
  std::map<DelegateId, Delegate> delegate_updates;
  std::vector<DelegateId> deleted;
  std::vector<TraceEvent> events;

  void set_clocks(const ClockBank& before, const ClockBank& after) {
    for (DataCentreId d = 0; d < after.size(); ++d) {
      if (after.tick(d) != before.tick(d)) ticks[d] = after.tick(d);
    }
  }
};

Simulation::Simulation(const Scenario& s, Model m) : scenario_(&s), model_(m) {
  auto menus = std::make_shared<Menus>();
  if (m == Model::kCm1) {
    for (RelationId i = 0; i < s.cluster.relations.size(); ++i) {
      menus->read.emplace_back(s.cluster, i, s.read_policy);
      menus->write.emplace_back(s.cluster, i, s.write_policy);
    }
  }
  menus_ = std::move(menus);
  if (m == Model::kCm0) {
    world_.flat = s.initial;
  } else {
    world_.replicas = initial_replicas(s);
  }
  // Initial records carry tick 1, so every clock starts one past it.
  world_.clocks = ClockBank(s.cluster.datacentres.size(), 2);
  world_.clients.assign(s.clients.size(), ClientState{});
}

bool Simulation::done() const {
  if (!world_.messages.empty()) return false;
  for (std::uint32_t c = 0; c < world_.clients.size(); ++c) {
    const ClientState& st = world_.clients[c];
    if (st.waiting || st.next_step < scenario_->clients[c].steps.size()) return false;
  }
  return true;
}

std::size_t Simulation::choices(const AgentRef& a, const Message& m) const {
  if (model_ != Model::kCm1 || a.kind != AgentRef::Kind::kDataCentre) return 1;
  const auto* req = std::get_if<ExternalRequest>(&m.payload);
  if (!req) return 1;
  const RelationId i = relation_of(req->body);
  return (is_read(req->body) ? menus_->read : menus_->write).at(i).size();
}

std::vector<AgentStep> Simulation::enabled() const {
  // Priority classes: client moves, handling of external requests, delegate
  // collection, then handling of forwarded internal requests.
  std::vector<std::pair<int, AgentStep>> out;
  for (std::uint32_t c = 0; c < world_.clients.size(); ++c) {
    const ClientState& st = world_.clients[c];
    if (!st.waiting && st.next_step < scenario_->clients[c].steps.size()) {
      out.push_back({0, {{AgentRef::Kind::kClient, c}, 0, 0}});
    }
  }
  for (const auto& [id, m] : world_.messages) {
    switch (m.to.kind) {
      case AgentRef::Kind::kClient:
        if (world_.clients.at(m.to.id).waiting) out.push_back({0, {m.to, id, 0}});
        break;
      case AgentRef::Kind::kDb: out.push_back({1, {m.to, id, 0}}); break;
      case AgentRef::Kind::kDelegate: out.push_back({2, {m.to, id, 0}}); break;
      case AgentRef::Kind::kClock: break;
      case AgentRef::Kind::kDataCentre: {
        const int cls = std::holds_alternative<ExternalRequest>(m.payload) ? 1 : 3;
        const std::size_t n = choices(m.to, m);
        for (std::size_t k = 0; k < n; ++k) out.push_back({cls, {m.to, id, k}});
        break;
      }
    }
  }
  std::sort(out.begin(), out.end());
  std::vector<AgentStep> steps;
  steps.reserve(out.size());
  for (auto& [cls, s] : out) steps.push_back(s);
  return steps;
}

Simulation::Effects Simulation::client_step(const AgentStep& s) const {
  const ClientId c = s.agent.id;
  const ClientProgram& prog = scenario_->clients.at(c);
  ClientState st = world_.clients.at(c);
  Effects fx;
  if (s.message == 0) {
    if (st.waiting || st.next_step >= prog.steps.size()) {
      throw ScheduleError("client " + prog.name + " has nothing to send");
    }
    const RequestBody& body = prog.steps[st.next_step];
    const RequestId id = scenario_->request_id(c, st.next_step);
    const AgentRef to = model_ == Model::kCm0 ? AgentRef{AgentRef::Kind::kDb, 0}
                                              : AgentRef{AgentRef::Kind::kDataCentre, prog.home};
    fx.sends.push_back({to, ExternalRequest{id, c, body}});
    fx.events.push_back({0, EventKind::kRequest, c, id, body});
    st.waiting = true;
  } else {
    const Message& m = world_.messages.at(s.message);
    const auto& resp = std::get<ExternalResponse>(m.payload);
    if (!st.waiting) throw ScheduleError("client " + prog.name + " is not waiting");
    const RequestId expected = scenario_->request_id(c, st.next_step);
    if (resp.request != expected) {
      throw InvariantViolation("client " + prog.name + " received an answer to another request");
    }
    const RequestBody& body = prog.steps[st.next_step];
    const auto* read = std::get_if<ReadRequest>(&body);
    const EventKind kind = read && read->print ? EventKind::kPrint : EventKind::kResponse;
    fx.consumed.push_back(s.message);
    fx.events.push_back({0, kind, c, resp.request, resp.response});
    st.waiting = false;
    ++st.next_step;
  }
  fx.clients[c] = st;
  return fx;
}

Simulation::Effects Simulation::db_step(const AgentStep& s, const Message& m) const {
  const auto& req = std::get<ExternalRequest>(m.payload);
  Effects fx;
  FlatStore scratch = world_.flat;
  Response resp = db_handle(scratch, scenario_->cluster, req.body);
  if (const auto* w = std::get_if<WriteRequest>(&req.body)) {
    for (const auto& [k, v] : w->writes) fx.flat_updates.push_back({{w->relation, k}, v});
  }
  fx.consumed.push_back(s.message);
  fx.sends.push_back({{AgentRef::Kind::kClient, req.client}, ExternalResponse{req.request, resp}});
  return fx;
}

Simulation::Effects Simulation::cm1_step(const AgentStep& s, const Message& m) const {
  const auto& req = std::get<ExternalRequest>(m.payload);
  const ClusterConfig& cfg = scenario_->cluster;
  const DataCentreId d = s.agent.id;
  const RelationId i = relation_of(req.body);
  Effects fx;
  fx.consumed.push_back(s.message);
  Response resp{i, std::nullopt};
  if (const auto* r = std::get_if<ReadRequest>(&req.body)) {
    const FragmentSelections g = menus_->read.at(i).pick(s.selection);
    resp.answer = cm1_answer_read(cfg, world_.replicas, *r, g);
  } else {
    const auto& w = std::get<WriteRequest>(req.body);
    const FragmentSelections g = menus_->write.at(i).pick(s.selection);
    Cm1WriteOutcome out = cm1_perform_write(cfg, world_.replicas, world_.clocks, d, w, g);
    fx.replica_updates = std::move(out.updates);
    fx.set_clocks(world_.clocks, out.clocks);
    fx.issued.push_back({d, out.ts});
    for (DataCentreId dp : out.adjusted) fx.obligations.push_back({dp, out.ts});
  }
  fx.sends.push_back({{AgentRef::Kind::kClient, req.client}, ExternalResponse{req.request, resp}});
  return fx;
}

Simulation::Effects Simulation::cm2_external_step(const AgentStep& s, const Message& m) const {
  const auto& req = std::get<ExternalRequest>(m.payload);
  const ClusterConfig& cfg = scenario_->cluster;
  const DataCentreId d = s.agent.id;
  const RelationId i = relation_of(req.body);
  const AgentRef spawned{AgentRef::Kind::kDelegate, kSpawned};
  Effects fx;
  fx.consumed.push_back(s.message);

  Timestamp ts;
  if (const auto* w = std::get_if<WriteRequest>(&req.body)) {
    ClockBank clocks = world_.clocks;
    ts = fresh_timestamp(clocks, cfg, d);
    fx.issued.push_back({d, ts});
    LocalWriteResult local = cm2_handle_locally_write(cfg, world_.replicas, clocks, d, *w, ts);
    fx.replica_updates = std::move(local.updates);
    fx.set_clocks(world_.clocks, local.clocks);
    fx.obligations.push_back({d, ts});
    fx.sends.push_back({spawned, LocalAck{d, std::move(local.counts)}});
  } else {
    // Reads carry the current clock value without issuing a new timestamp.
    ts = world_.clocks.now(cfg, d);
    LocalReadResult local =
        cm2_handle_locally_read(cfg, world_.replicas, d, std::get<ReadRequest>(req.body));
    fx.sends.push_back({spawned, LocalAnswer{d, std::move(local.triples), std::move(local.counts)}});
  }
  fx.spawned = Delegate{kSpawned, req.request, req.client, d, req.body, Collector{{}, CountState(cfg, i)}};
  for (DataCentreId dp : cfg.relation(i).datacentres) {
    if (dp == d) continue;
    fx.sends.push_back(
        {{AgentRef::Kind::kDataCentre, dp}, ForwardedRequest{req.request, req.body, kSpawned, ts}});
  }
  return fx;
}

Simulation::Effects Simulation::cm2_forward_step(const AgentStep& s, const Message& m) const {
  const auto& fwd = std::get<ForwardedRequest>(m.payload);
  const ClusterConfig& cfg = scenario_->cluster;
  const DataCentreId d = s.agent.id;
  const AgentRef delegate{AgentRef::Kind::kDelegate, fwd.delegate};
  Effects fx;
  fx.consumed.push_back(s.message);
  if (const auto* w = std::get_if<WriteRequest>(&fwd.body)) {
    LocalWriteResult local =
        cm2_handle_locally_write(cfg, world_.replicas, world_.clocks, d, *w, fwd.ts);
    fx.replica_updates = std::move(local.updates);
    fx.set_clocks(world_.clocks, local.clocks);
    fx.obligations.push_back({d, fwd.ts});
    fx.sends.push_back({delegate, LocalAck{d, std::move(local.counts)}});
  } else {
    LocalReadResult local =
        cm2_handle_locally_read(cfg, world_.replicas, d, std::get<ReadRequest>(fwd.body));
    fx.sends.push_back({delegate, LocalAnswer{d, std::move(local.triples), std::move(local.counts)}});
  }
  return fx;
}

Simulation::Effects Simulation::delegate_step(const AgentStep& s, const Message& m) const {
  const ClusterConfig& cfg = scenario_->cluster;
  Delegate del = world_.delegates.at(s.agent.id);
  Effects fx;
  fx.consumed.push_back(s.message);
  const Policy* policy = &scenario_->write_policy;
  if (const auto* a = std::get_if<LocalAnswer>(&m.payload)) {
    if (!is_read(del.body)) throw InvariantViolation("write delegate received a read answer");
    collect(del.collector, a->triples, a->counts, a->from);
    policy = &scenario_->read_policy;
  } else {
    const auto& ack = std::get<LocalAck>(m.payload);
    if (is_read(del.body)) throw InvariantViolation("read delegate received a write acknowledgement");
    collect(del.collector, {}, ack.counts, ack.from);
  }
  const RelationId i = relation_of(del.body);
  if (sufficient(del.collector.counts, *policy, cfg, i)) {
    Response resp{i, std::nullopt};
    if (is_read(del.body)) resp.answer = respond_answer(del.collector.answers);
    fx.sends.push_back({{AgentRef::Kind::kClient, del.requestor}, ExternalResponse{del.request, resp}});
    fx.deleted.push_back(del.id);
  } else {
    fx.delegate_updates[del.id] = std::move(del);
  }
  return fx;
}

Simulation::Effects Simulation::effects_of(const AgentStep& s) const {
  if (s.agent.kind == AgentRef::Kind::kClient) {
    if (s.agent.id >= world_.clients.size()) throw ScheduleError("unknown client");
    if (s.selection != 0) throw ScheduleError("client steps take no selection");
    if (s.message != 0) {
      auto it = world_.messages.find(s.message);
      if (it == world_.messages.end() || it->second.to != s.agent) {
        throw ScheduleError("message " + std::to_string(s.message) + " is not in the client's mailbox");
      }
    }
    return client_step(s);
  }
  if (s.agent.kind == AgentRef::Kind::kClock) {
    if (model_ == Model::kCm0) throw ScheduleError("no clocks in cm0");
    if (s.agent.id >= world_.clocks.size()) throw ScheduleError("unknown data centre clock");
    if (s.selection != 0) throw ScheduleError("clock moves take no selection");
    if (s.message <= world_.clocks.tick(s.agent.id)) throw ScheduleError("a clock move must advance the clock");
    Effects fx;
    fx.ticks[s.agent.id] = s.message;
    return fx;
  }
  auto it = world_.messages.find(s.message);
  if (it == world_.messages.end() || it->second.to != s.agent) {
    throw ScheduleError("message " + std::to_string(s.message) + " is not in " +
                        format_agent(s.agent, *scenario_) + "'s mailbox");
  }
  const Message& m = it->second;
  if (s.selection >= choices(s.agent, m)) throw ScheduleError("selection index out of range");
  switch (s.agent.kind) {
    case AgentRef::Kind::kDb:
      if (model_ != Model::kCm0) throw ScheduleError("no db agent outside cm0");
      return db_step(s, m);
    case AgentRef::Kind::kDataCentre:
      if (model_ == Model::kCm0) throw ScheduleError("no data centre agents in cm0");
      if (std::holds_alternative<ExternalRequest>(m.payload)) {
        return model_ == Model::kCm1 ? cm1_step(s, m) : cm2_external_step(s, m);
      }
      return cm2_forward_step(s, m);
    case AgentRef::Kind::kDelegate: return delegate_step(s, m);
    case AgentRef::Kind::kClient:
    case AgentRef::Kind::kClock: break;
  }
  throw ScheduleError("unreachable agent kind");
}

void Simulation::apply(GlobalStep step) {
  if (step.empty()) throw ScheduleError("empty global step");
  std::sort(step.begin(), step.end());
  for (std::size_t k = 1; k < step.size(); ++k) {
    if (step[k].agent == step[k - 1].agent) {
      throw ScheduleError("agent " + format_agent(step[k].agent, *scenario_) +
                          " listed twice in one step");
    }
  }
  std::vector<Effects> all;
  all.reserve(step.size());
  for (const AgentStep& s : step) all.push_back(effects_of(s));

  // Merge into one update set, rejecting clashes.
  Effects merged;
  std::map<ReplicaLoc, Entry> replica;
  std::map<std::pair<RelationId, Tuple>, Value> flat;
  for (const Effects& fx : all) {
    for (const auto& [loc, e] : fx.replica_updates) {
      auto [it, fresh] = replica.emplace(loc, e);
      if (!fresh && !(it->second == e)) throw InconsistentUpdate("two agents wrote one replica location differently");
    }
    for (const auto& [loc, v] : fx.flat_updates) {
      auto [it, fresh] = flat.emplace(loc, v);
      if (!fresh && it->second != v) throw InconsistentUpdate("two agents wrote one location differently");
    }
    for (const auto& [d, t] : fx.ticks) {
      auto [it, fresh] = merged.ticks.emplace(d, t);
      if (!fresh && it->second != t) throw InconsistentUpdate("two agents set one clock differently");
    }
    merged.obligations.insert(merged.obligations.end(), fx.obligations.begin(), fx.obligations.end());
    merged.issued.insert(merged.issued.end(), fx.issued.begin(), fx.issued.end());
  }
  for (auto& [loc, e] : replica) merged.replica_updates.push_back({loc, e});

  const ClockBank clocks_before = world_.clocks;
  std::vector<ReplicaUpdate> previous;
  for (const auto& [loc, e] : merged.replica_updates) previous.push_back({loc, world_.replicas.lookup(loc)});

  const std::uint64_t n = ++world_.steps;
  for (const auto& [loc, e] : merged.replica_updates) world_.replicas.store(loc, e);
  for (const auto& [loc, v] : flat) world_.flat.set(loc.first, loc.second, v);
  for (const auto& [d, t] : merged.ticks) world_.clocks.set_tick(d, t);

  std::vector<Send> sends;
  std::set<DelegateId> deleted;
  for (Effects& fx : all) {
    for (MessageId id : fx.consumed) world_.messages.erase(id);
    DelegateId spawned_id = kSpawned;
    if (fx.spawned) {
      spawned_id = world_.next_delegate++;
      fx.spawned->id = spawned_id;
      world_.delegates.emplace(spawned_id, std::move(*fx.spawned));
    }
    for (Send& snd : fx.sends) {
      if (snd.to.kind == AgentRef::Kind::kDelegate && snd.to.id == kSpawned) snd.to.id = spawned_id;
      if (auto* f = std::get_if<ForwardedRequest>(&snd.payload); f && f->delegate == kSpawned) {
        f->delegate = spawned_id;
      }
      sends.push_back(std::move(snd));
    }
    for (auto& [c, st] : fx.clients) world_.clients.at(c) = st;
    for (auto& [id, del] : fx.delegate_updates) world_.delegates.at(id) = std::move(del);
    for (DelegateId id : fx.deleted) deleted.insert(id);
    for (TraceEvent& e : fx.events) {
      e.index = n;
      trace_.events.push_back(std::move(e));
    }
  }
  for (DelegateId id : deleted) {
    world_.delegates.erase(id);
    std::erase_if(world_.messages, [id](const auto& kv) {
      return kv.second.to.kind == AgentRef::Kind::kDelegate && kv.second.to.id == id;
    });
  }
  for (Send& snd : sends) {
    // Late messages to a deleted delegate are dropped.
    if (snd.to.kind == AgentRef::Kind::kDelegate && !world_.delegates.count(snd.to.id)) continue;
    const MessageId id = world_.next_message++;
    world_.messages.emplace(id, Message{id, snd.to, std::move(snd.payload)});
  }

  // Invariants.
  const ClusterConfig& cfg = scenario_->cluster;
  for (std::size_t k = 0; k < merged.replica_updates.size(); ++k) {
    const auto& [loc, e] = merged.replica_updates[k];
    if (!cfg.copy(loc.relation, loc.fragment, loc.dc, loc.node) ||
        hash_fragment(cfg, loc.relation, loc.key) != loc.fragment) {
      throw InvariantViolation("replica entry stored outside its fragment");
    }
    if (e.ts < previous[k].second.ts) throw InvariantViolation("replica timestamp decreased");
  }
  for (DataCentreId d = 0; d < world_.clocks.size(); ++d) {
    if (world_.clocks.tick(d) < clocks_before.tick(d)) {
      throw InvariantViolation("clock moved backwards");
    }
  }
  for (const auto& [d, t] : merged.issued) {
    if (t.dc() != d || t.tick() != clocks_before.tick(d) ||
        world_.clocks.tick(d) <= t.tick()) {
      throw InvariantViolation("timestamp issued out of clock order");
    }
    if (std::find(world_.issued.begin(), world_.issued.end(), t) != world_.issued.end()) {
      throw InvariantViolation("timestamp issued twice");
    }
    world_.issued.push_back(t);
  }
  for (const auto& [d, t] : merged.obligations) {
    if (world_.clocks.now(cfg, d) < t) {
      throw InvariantViolation("clock of " + cfg.datacentres[d].name +
                               " behind a timestamp it processed");
    }
  }
  std::set<std::pair<RelationId, Tuple>> touched;
  for (const auto& [loc, e] : merged.replica_updates) touched.insert({loc.relation, loc.key});
  for (const auto& [i, key] : touched) {
    const FragmentIndex j = hash_fragment(cfg, i, key);
    std::optional<Entry> best;
    for (const NodeId& node : cfg.copies(i, j)) {
      const Entry e = world_.replicas.lookup({i, j, node.dc, node.index, key});
      if (!best || best->ts < e.ts) {
        best = e;
      } else if (best->ts == e.ts && best->value != e.value) {
        throw InvariantViolation("replicas share the freshest timestamp with different values");
      }
    }
  }
  for (const auto& [id, del] : world_.delegates) {
    const RelationId i = relation_of(del.body);
    for (FragmentIndex j = 1; j <= cfg.relation(i).fragment_count(); ++j) {
      for (DataCentreId d = 0; d < cfg.datacentres.size(); ++d) {
        if (del.collector.counts.count(j, d) > delta(cfg, i, j, d)) {
          throw InvariantViolation("delegate counted more copies than exist");
        }
      }
    }
  }
}

std::string Simulation::fingerprint() const {
  std::string out;
  out.reserve(512);
  out += "R";
  for (const auto& [loc, e] : world_.replicas.entries()) {
    out += std::to_string(loc.relation) + "." + std::to_string(loc.fragment) + "." +
           std::to_string(loc.dc) + "." + std::to_string(loc.node) + format_tuple(loc.key) + "=";
    put_entry(out, e);
    out += ';';
  }
  out += "C";
  for (DataCentreId d = 0; d < world_.clocks.size(); ++d) out += std::to_string(world_.clocks.tick(d)) + ",";
  out += "F";
  for (const auto& [key, v] : world_.flat.entries()) {
    out += std::to_string(key.first) + format_tuple(key.second) + "=" + format_tuple(v) + ";";
  }
  out += "K";
  for (const ClientState& c : world_.clients) {
    out += std::to_string(c.next_step) + (c.waiting ? "w," : "i,");
  }
  auto delegate_key = [&](DelegateId id) {
    auto it = world_.delegates.find(id);
    return it == world_.delegates.end() ? std::string("gone") : "r" + std::to_string(it->second.request);
  };
  std::vector<std::string> msgs;
  for (const auto& [id, m] : world_.messages) {
    std::string s;
    switch (m.to.kind) {
      case AgentRef::Kind::kClient: s = "c" + std::to_string(m.to.id); break;
      case AgentRef::Kind::kDb: s = "db"; break;
      case AgentRef::Kind::kDataCentre: s = "d" + std::to_string(m.to.id); break;
      case AgentRef::Kind::kDelegate: s = "g" + delegate_key(m.to.id); break;
      case AgentRef::Kind::kClock: break;
    }
    s += ':';
    std::visit(Overloaded{
                   [&](const ExternalRequest& r) { s += "X" + std::to_string(r.request); },
                   [&](const ExternalResponse& r) {
                     s += "Y" + std::to_string(r.request) + format_response(r.response, scenario_->cluster);
                   },
                   [&](const ForwardedRequest& f) {
                     s += "W" + std::to_string(f.request) + delegate_key(f.delegate) + "@";
                     put_entry(s, Entry{std::nullopt, f.ts});
                   },
                   [&](const LocalAnswer& a) {
                     s += "A" + std::to_string(a.from);
                     put_triples(s, a.triples);
                     put_counts(s, a.counts);
                   },
                   [&](const LocalAck& a) {
                     s += "K" + std::to_string(a.from);
                     put_counts(s, a.counts);
                   }},
               m.payload);
    msgs.push_back(std::move(s));
  }
  std::sort(msgs.begin(), msgs.end());
  out += "M";
  for (const auto& s : msgs) out += s + "|";
  std::vector<std::string> dels;
  for (const auto& [id, del] : world_.delegates) {
    std::string s = "r" + std::to_string(del.request);
    put_triples(s, del.collector.answers);
    const RelationId i = relation_of(del.body);
    for (FragmentIndex j = 1; j <= scenario_->cluster.relation(i).fragment_count(); ++j) {
      for (DataCentreId d = 0; d < scenario_->cluster.datacentres.size(); ++d) {
        s += std::to_string(del.collector.counts.count(j, d)) + ",";
      }
    }
    dels.push_back(std::move(s));
  }
  std::sort(dels.begin(), dels.end());
  out += "D";
  for (const auto& s : dels) out += s + "|";
  return out;
}

RunResult run_seeded(const Scenario& s, Model m, std::uint64_t seed, std::uint64_t step_limit) {
  Simulation sim(s, m);
  std::mt19937_64 rng(seed);
  RunResult out;
  while (!sim.done() && out.schedule.size() < step_limit) {
    const std::vector<AgentStep> en = sim.enabled();
    if (en.empty()) break;
    const AgentStep pick = en[rng() % en.size()];
    sim.apply({pick});
    out.schedule.push_back({pick});
  }
  out.trace = sim.trace();
  out.complete = sim.done();
  out.steps = sim.world().steps;
  out.issued = sim.world().issued;
  return out;
}

RunResult run_schedule(const Scenario& s, Model m, const Schedule& sched, std::uint64_t step_limit) {
  Simulation sim(s, m);
  RunResult out;
  for (const GlobalStep& g : sched) {
    if (out.schedule.size() >= step_limit) break;
    sim.apply(g);
    out.schedule.push_back(g);
  }
  out.trace = sim.trace();
  out.complete = sim.done();
  out.steps = sim.world().steps;
  out.issued = sim.world().issued;
  return out;
}

}  // namespace replisim
