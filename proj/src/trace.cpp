#include "replisim/trace.hpp"

#include <fstream>
#include <sstream>

namespace replisim {

std::size_t Trace::request_count() const {
  std::size_t n = 0;
  for (const auto& e : events) n += e.is_request();
  return n;
}

std::vector<TraceEvent> Trace::projection(std::uint32_t agent) const {
  std::vector<TraceEvent> out;
  for (const auto& e : events) {
    if (e.agent == agent) out.push_back(e);
  }
  return out;
}

std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::kRequest: return "REQ";
    case EventKind::kResponse: return "RESP";
    case EventKind::kPrint: return "PRINT";
  }
  return "?";
}

std::string format_event(const TraceEvent& e, const Scenario& s) {
  std::string out = "idx=" + std::to_string(e.index) + " kind=" +
                    std::string(event_kind_name(e.kind)) + " agent=" + s.clients.at(e.agent).name +
                    " req=" + std::to_string(e.request) + " payload=";
  if (e.is_request()) {
    out += format_request(e.body(), s.cluster);
  } else {
    out += format_response(e.response(), s.cluster);
  }
  return out;
}

std::string format_trace(const Trace& t, const Scenario& s, const std::vector<std::string>& header) {
  std::string out;
  for (const auto& h : header) out += "# " + h + "\n";
  for (const auto& e : t.events) out += format_event(e, s) + "\n";
  return out;
}

namespace {

// Reads `name=` and returns the value up to the next space.
std::string field(std::string_view line, std::size_t& pos, std::string_view name,
                  std::size_t lineno) {
  const std::string prefix = std::string(name) + "=";
  if (line.substr(pos, prefix.size()) != prefix) {
    throw ParseError("trace line " + std::to_string(lineno) + ": expected '" + prefix + "'");
  }
  pos += prefix.size();
  const std::size_t end = line.find(' ', pos);
  std::string value(line.substr(pos, end == std::string_view::npos ? line.npos : end - pos));
  pos = end == std::string_view::npos ? line.size() : end + 1;
  return value;
}

std::uint64_t number(const std::string& v, std::size_t lineno) {
  std::size_t used = 0;
  std::uint64_t n = 0;
  try {
    n = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) {
    throw ParseError("trace line " + std::to_string(lineno) + ": expected a number, got '" + v + "'");
  }
  return n;
}

}  // namespace

Trace parse_trace(std::string_view text, const Scenario& s) {
  Trace t;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t pos = 0;
    TraceEvent e;
    e.index = number(field(line, pos, "idx", lineno), lineno);
    const std::string kind = field(line, pos, "kind", lineno);
    if (kind == "REQ") {
      e.kind = EventKind::kRequest;
    } else if (kind == "RESP") {
      e.kind = EventKind::kResponse;
    } else if (kind == "PRINT") {
      e.kind = EventKind::kPrint;
    } else {
      throw ParseError("trace line " + std::to_string(lineno) + ": unknown kind '" + kind + "'");
    }
    const std::string agent = field(line, pos, "agent", lineno);
    auto a = s.find_client(agent);
    if (!a) throw ParseError("trace line " + std::to_string(lineno) + ": unknown agent '" + agent + "'");
    e.agent = *a;
    e.request = static_cast<RequestId>(number(field(line, pos, "req", lineno), lineno));
    const std::string_view rest = std::string_view(line).substr(pos);
    if (rest.substr(0, 8) != "payload=") {
      throw ParseError("trace line " + std::to_string(lineno) + ": expected 'payload='");
    }
    try {
      if (e.kind == EventKind::kRequest) {
        e.payload = parse_request(rest.substr(8), s.cluster);
      } else {
        e.payload = parse_response(rest.substr(8), s.cluster);
      }
    } catch (const ConfigError& err) {
      throw ParseError("trace line " + std::to_string(lineno) + ": " + err.what());
    } catch (const ParseError& err) {
      throw ParseError("trace line " + std::to_string(lineno) + ": " + err.what());
    }
    t.events.push_back(std::move(e));
  }
  return t;
}

Trace load_trace(const std::string& path, const Scenario& s) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_trace(buf.str(), s);
}

}  // namespace replisim
