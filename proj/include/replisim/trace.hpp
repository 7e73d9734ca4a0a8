#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "replisim/scenario.hpp"
#include "replisim/term.hpp"

namespace replisim {

enum class EventKind { kRequest, kResponse, kPrint };

struct TraceEvent {
  std::uint64_t index = 0;  // global state index
  EventKind kind = EventKind::kRequest;
  std::uint32_t agent = 0;  // client position in the scenario
  RequestId request = 0;
  std::variant<RequestBody, Response> payload;

  const RequestBody& body() const { return std::get<RequestBody>(payload); }
  const Response& response() const { return std::get<Response>(payload); }
  bool is_request() const { return kind == EventKind::kRequest; }

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct Trace {
  std::vector<TraceEvent> events;

  std::size_t request_count() const;
  /// The events of one agent, in order.
  std::vector<TraceEvent> projection(std::uint32_t agent) const;

  friend bool operator==(const Trace&, const Trace&) = default;
};

std::string_view event_kind_name(EventKind k);

/// One line per event; `header` lines are emitted first as `# ...` comments.
std::string format_trace(const Trace& t, const Scenario& s,
                         const std::vector<std::string>& header = {});
std::string format_event(const TraceEvent& e, const Scenario& s);

/// Inverse of format_trace. Comment and blank lines are skipped.
Trace parse_trace(std::string_view text, const Scenario& s);
Trace load_trace(const std::string& path, const Scenario& s);

}  // namespace replisim
