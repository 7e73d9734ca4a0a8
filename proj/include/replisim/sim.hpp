#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "replisim/cm1.hpp"
#include "replisim/cm2.hpp"
#include "replisim/core.hpp"
#include "replisim/scenario.hpp"
#include "replisim/trace.hpp"

namespace replisim {

/// Two agents of one global step produced clashing updates; the run is discarded.
class InconsistentUpdate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A schedule named a step that is not enabled.
class ScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Model { kCm0, kCm1, kCm2 };

std::string_view model_name(Model m);
Model parse_model(std::string_view text);

using MessageId = std::uint64_t;
using DelegateId = std::uint32_t;
using ClientId = std::uint32_t;

struct AgentRef {
  // kClock moves only appear in given schedules; they raise a data centre's
  // clock and are never offered by enabled().
  enum class Kind { kClient, kDb, kDataCentre, kDelegate, kClock };

  Kind kind = Kind::kClient;
  std::uint32_t id = 0;

  friend auto operator<=>(const AgentRef&, const AgentRef&) = default;
};

/// client:NAME, db, dc:NAME, delegate:N or clock:NAME.
std::string format_agent(const AgentRef& a, const Scenario& s);
AgentRef parse_agent(std::string_view text, const Scenario& s);

struct ExternalRequest {
  RequestId request = 0;
  ClientId client = 0;
  RequestBody body;
};

struct ExternalResponse {
  RequestId request = 0;
  Response response;
};

struct ForwardedRequest {
  RequestId request = 0;
  RequestBody body;
  DelegateId delegate = 0;
  Timestamp ts;
};

struct LocalAnswer {
  DataCentreId from = 0;
  TripleSet triples;
  CopyCounts counts;
};

struct LocalAck {
  DataCentreId from = 0;
  CopyCounts counts;
};

using Payload =
    std::variant<ExternalRequest, ExternalResponse, ForwardedRequest, LocalAnswer, LocalAck>;

struct Message {
  MessageId id = 0;
  AgentRef to;
  Payload payload;
};

struct Delegate {
  DelegateId id = 0;
  RequestId request = 0;
  ClientId requestor = 0;
  DataCentreId mediator = 0;
  RequestBody body;
  Collector collector;
};

struct ClientState {
  std::size_t next_step = 0;
  bool waiting = false;
};

struct World {
  ReplicaStore replicas;
  ClockBank clocks;
  FlatStore flat;
  std::vector<ClientState> clients;
  std::map<MessageId, Message> messages;  // sent and not yet consumed
  std::map<DelegateId, Delegate> delegates;
  MessageId next_message = 1;
  DelegateId next_delegate = 1;
  std::uint64_t steps = 0;
  std::vector<Timestamp> issued;  // every timestamp drawn so far; not part of the state proper
};

/// One agent's move: which message it receives (0 for a client's send) and,
/// for CM1 data centres, which compliant replica selection it uses. A clock
/// move keeps its target tick in `message`.
struct AgentStep {
  AgentRef agent;
  MessageId message = 0;
  std::size_t selection = 0;

  friend auto operator<=>(const AgentStep&, const AgentStep&) = default;
};

using GlobalStep = std::vector<AgentStep>;
using Schedule = std::vector<GlobalStep>;

/// `dc:dc1#3/0` for one agent step, `clock:dc1@7` for a clock move; agents of
/// a global step are joined by `+`.
std::string format_step(const GlobalStep& step, const Scenario& s);
GlobalStep parse_step(std::string_view text, const Scenario& s);
/// One global step per line.
std::string format_schedule(const Schedule& sched, const Scenario& s);
Schedule parse_schedule(std::string_view text, const Scenario& s);
Schedule load_schedule(const std::string& path, const Scenario& s);

/// A single simulation instance. The scenario must outlive it.
class Simulation {
 public:
  Simulation(const Scenario& s, Model m);

  Model model() const { return model_; }
  const Scenario& scenario() const { return *scenario_; }
  const World& world() const { return world_; }
  const Trace& trace() const { return trace_; }

  /// Every enabled single-agent step in canonical order.
  std::vector<AgentStep> enabled() const;
  /// Executes one global step: all listed agents read the current state and
  /// their update sets are applied together.
  void apply(GlobalStep step);

  /// All clients finished and no message outstanding.
  bool done() const;
  bool stuck() const { return !done() && enabled().empty(); }

  /// Canonical encoding of the state with message and delegate ids erased.
  std::string fingerprint() const;

 private:
  struct Effects;
  struct Menus;

  Effects effects_of(const AgentStep& s) const;
  Effects client_step(const AgentStep& s) const;
  Effects db_step(const AgentStep& s, const Message& m) const;
  Effects cm1_step(const AgentStep& s, const Message& m) const;
  Effects cm2_external_step(const AgentStep& s, const Message& m) const;
  Effects cm2_forward_step(const AgentStep& s, const Message& m) const;
  Effects delegate_step(const AgentStep& s, const Message& m) const;
  std::size_t choices(const AgentRef& a, const Message& m) const;
  void check_invariants(const World& before, const Effects& merged) const;

  const Scenario* scenario_;
  Model model_;
  std::shared_ptr<const Menus> menus_;
  World world_;
  Trace trace_;
};

struct RunResult {
  Trace trace;
  Schedule schedule;
  bool complete = false;
  std::uint64_t steps = 0;
  std::vector<Timestamp> issued;  // timestamps drawn during the run
};

/// Picks uniformly among enabled single-agent steps with a 64-bit Mersenne twister.
RunResult run_seeded(const Scenario& s, Model m, std::uint64_t seed, std::uint64_t step_limit);
RunResult run_schedule(const Scenario& s, Model m, const Schedule& sched, std::uint64_t step_limit);

}  // namespace replisim
