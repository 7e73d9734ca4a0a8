#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "replisim/scenario.hpp"
#include "replisim/trace.hpp"

namespace replisim {

/// The trace is not a completed, well-formed request/response record.
class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One request with its response: sigma(r), sigma(ans r) and the answer.
struct RequestRecord {
  RequestId id = 0;
  std::uint32_t agent = 0;
  RequestBody body;
  std::uint64_t sent = 0;
  std::uint64_t answered = 0;
  EventKind response_kind = EventKind::kResponse;
  Response response;
};

/// Pairs every request with its response, ordered by (sent, id).
std::vector<RequestRecord> request_records(const Trace& t);

enum class VerdictKind { kCompatible, kIncompatible, kSerialisable, kNotSerialisable };

std::string_view verdict_name(VerdictKind k);

struct Verdict {
  VerdictKind kind = VerdictKind::kIncompatible;
  bool exhaustive = false;
  std::vector<RequestId> order;       // replay order of the witness
  std::vector<std::uint64_t> points;  // execution points, compatibility only
  bool waiver_dependent = false;      // holds only because unread writes are waived
  std::uint64_t replays = 0;

  bool positive() const {
    return kind == VerdictKind::kCompatible || kind == VerdictKind::kSerialisable;
  }
};

struct CheckOptions {
  std::uint64_t budget = 1'000'000;  // oracle replays
  bool waiver = true;                // do not install written values nobody reads
  bool flag_waiver = true;           // re-check without the waiver on success
};

/// Searches execution points sigma(r) < n(r) <= sigma(ans r) whose replay
/// through the single-copy oracle reproduces every answer.
Verdict check_view_compatible(const Trace& t, const Scenario& s, const CheckOptions& opts = {});

/// Searches serial orders that respect each agent's own order.
Verdict check_view_serialisable(const Trace& t, const Scenario& s, const CheckOptions& opts = {});

/// Replays requests in the given order; true when every read answer matches.
bool replay_matches(const Trace& t, const Scenario& s, const std::vector<RequestId>& order,
                    bool waiver);

bool is_serial(const Trace& t);
bool view_equivalent(const Trace& a, const Trace& b);

/// Each request of `order` immediately followed by its recorded response.
Trace serial_trace(const Trace& t, const std::vector<RequestId>& order);

/// verdict=<...> exhaustive=<bool> witness=<...|NONE>
std::string format_verdict(const Verdict& v);

}  // namespace replisim
