#include "replisim/term.hpp"

#include <cctype>
#include <limits>

namespace replisim {

bool holds(const Condition& phi, const ClusterConfig& cfg, RelationId i, const Tuple& key) {
  switch (phi.kind) {
    case Condition::Kind::kTrue: return true;
    case Condition::Kind::kKeyEq:
    case Condition::Kind::kKeyIn:
      for (const Tuple& k : phi.keys) {
        if (k == key) return true;
      }
      return false;
    case Condition::Kind::kHashRange: return hash_fragment(cfg, i, key) == phi.fragment;
  }
  return false;
}

RelationId relation_of(const RequestBody& body) {
  return std::visit([](const auto& r) { return r.relation; }, body);
}

std::string format_atom(const Atom& a) {
  if (const auto* n = std::get_if<std::int64_t>(&a)) return std::to_string(*n);
  std::string out = "\"";
  for (char c : std::get<std::string>(a)) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

std::string format_tuple(const Tuple& t) {
  std::string out = "(";
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k) out += ',';
    out += format_atom(t[k]);
  }
  out += ')';
  return out;
}

std::string format_value(const Value& v) { return v ? format_tuple(*v) : "undef"; }

std::string format_condition(const Condition& phi) {
  switch (phi.kind) {
    case Condition::Kind::kTrue: return "true";
    case Condition::Kind::kKeyEq: return "eq(" + format_tuple(phi.keys.at(0)) + ")";
    case Condition::Kind::kKeyIn: {
      std::string out = "in{";
      for (std::size_t k = 0; k < phi.keys.size(); ++k) {
        if (k) out += ',';
        out += format_tuple(phi.keys[k]);
      }
      return out + "}";
    }
    case Condition::Kind::kHashRange: return "range(" + std::to_string(phi.fragment) + ")";
  }
  return "?";
}

std::string format_answer(const Answer& ans) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : ans) {
    if (!first) out += ',';
    first = false;
    out += format_tuple(k) + "=" + format_tuple(v);
  }
  return out + "}";
}

std::string format_request(const RequestBody& body, const ClusterConfig& cfg) {
  if (const auto* r = std::get_if<ReadRequest>(&body)) {
    return std::string(r->print ? "print(" : "read(") + cfg.relation(r->relation).name + "," +
           format_condition(r->condition) + ")";
  }
  const auto& w = std::get<WriteRequest>(body);
  std::string out = "write(" + cfg.relation(w.relation).name + ",{";
  bool first = true;
  for (const auto& [k, v] : w.writes) {
    if (!first) out += ',';
    first = false;
    out += format_tuple(k) + "=" + format_value(v);
  }
  return out + "})";
}

std::string format_response(const Response& resp, const ClusterConfig& cfg) {
  const std::string& name = cfg.relation(resp.relation).name;
  if (!resp.answer) return "ack(" + name + ")";
  return "answer(" + name + "," + format_answer(*resp.answer) + ")";
}

void TermReader::fail(const std::string& what) const {
  throw ParseError(what + " at column " + std::to_string(pos_ + 1) + " in '" +
                   std::string(text_) + "'");
}

void TermReader::skip_space() {
  while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
}

bool TermReader::at_end() {
  skip_space();
  return pos_ >= text_.size();
}

void TermReader::expect_end() {
  if (!at_end()) fail("unexpected trailing text");
}

bool TermReader::accept(char c) {
  skip_space();
  if (pos_ < text_.size() && text_[pos_] == c) {
    ++pos_;
    return true;
  }
  return false;
}

void TermReader::expect(char c) {
  if (!accept(c)) fail(std::string("expected '") + c + "'");
}

bool TermReader::accept_word(std::string_view w) {
  skip_space();
  if (text_.substr(pos_, w.size()) != w) return false;
  const std::size_t end = pos_ + w.size();
  if (end < text_.size()) {
    const char next = text_[end];
    if (std::isalnum(static_cast<unsigned char>(next)) || next == '_') return false;
  }
  pos_ = end;
  return true;
}

std::string TermReader::identifier() {
  skip_space();
  const std::size_t start = pos_;
  while (pos_ < text_.size() &&
         (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
          text_[pos_] == '-' || text_[pos_] == '.')) {
    ++pos_;
  }
  if (start == pos_) fail("expected identifier");
  return std::string(text_.substr(start, pos_ - start));
}

std::int64_t TermReader::integer() {
  skip_space();
  const std::size_t start = pos_;
  if (pos_ < text_.size() && text_[pos_] == '-') ++pos_;
  const std::size_t digits = pos_;
  while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  if (digits == pos_) fail("expected integer");
  try {
    return std::stoll(std::string(text_.substr(start, pos_ - start)));
  } catch (const std::out_of_range&) {
    pos_ = start;
    fail("integer out of range");
  }
}

Atom TermReader::atom() {
  skip_space();
  if (pos_ < text_.size() && text_[pos_] == '"') {
    ++pos_;
    std::string s;
    while (true) {
      if (pos_ >= text_.size()) fail("unterminated string");
      const char c = text_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        s += c;
        continue;
      }
      if (pos_ >= text_.size()) fail("unterminated escape");
      const char e = text_[pos_++];
      switch (e) {
        case 'n': s += '\n'; break;
        case 't': s += '\t'; break;
        case '"':
        case '\\': s += e; break;
        default: fail("unknown escape");
      }
    }
    return s;
  }
  return integer();
}

Tuple TermReader::tuple() {
  expect('(');
  Tuple t;
  if (accept(')')) return t;
  do {
    t.push_back(atom());
  } while (accept(','));
  expect(')');
  return t;
}

Value TermReader::value() {
  if (accept_word("undef")) return std::nullopt;
  return tuple();
}

Condition TermReader::condition() {
  if (accept_word("true")) return Condition::always();
  if (accept_word("eq")) {
    expect('(');
    Tuple k = tuple();
    expect(')');
    return Condition::key_eq(std::move(k));
  }
  if (accept_word("in")) {
    expect('{');
    std::vector<Tuple> keys;
    if (!accept('}')) {
      do {
        keys.push_back(tuple());
      } while (accept(','));
      expect('}');
    }
    return Condition::key_in(std::move(keys));
  }
  if (accept_word("range")) {
    expect('(');
    const std::int64_t j = integer();
    if (j < 1 || j > std::numeric_limits<FragmentIndex>::max()) fail("fragment index out of range");
    expect(')');
    return Condition::hash_range(static_cast<FragmentIndex>(j));
  }
  fail("expected condition");
}

WriteSet TermReader::write_set() {
  expect('{');
  WriteSet ws;
  if (accept('}')) return ws;
  do {
    Tuple k = tuple();
    expect('=');
    Value v = value();
    if (!ws.emplace(std::move(k), std::move(v)).second) fail("duplicate key in write set");
  } while (accept(','));
  expect('}');
  return ws;
}

Answer TermReader::answer_set() {
  expect('{');
  Answer ans;
  if (accept('}')) return ans;
  do {
    Tuple k = tuple();
    expect('=');
    Tuple v = tuple();
    if (!ans.emplace(std::move(k), std::move(v)).second) fail("duplicate key in answer");
  } while (accept(','));
  expect('}');
  return ans;
}

RelationId TermReader::relation(const ClusterConfig& cfg) {
  const std::size_t start = pos_;
  const std::string name = identifier();
  auto i = cfg.find_relation(name);
  if (!i) {
    pos_ = start;
    fail("unknown relation '" + name + "'");
  }
  return *i;
}

RequestBody TermReader::request(const ClusterConfig& cfg) {
  const bool print = accept_word("print");
  if (print || accept_word("read")) {
    expect('(');
    ReadRequest r;
    r.relation = relation(cfg);
    r.print = print;
    if (accept(',')) r.condition = condition();
    expect(')');
    return r;
  }
  if (accept_word("write")) {
    expect('(');
    WriteRequest w;
    w.relation = relation(cfg);
    expect(',');
    w.writes = write_set();
    expect(')');
    return w;
  }
  fail("expected read(...), print(...) or write(...)");
}

Response TermReader::response(const ClusterConfig& cfg) {
  if (accept_word("ack")) {
    expect('(');
    Response r{relation(cfg), std::nullopt};
    expect(')');
    return r;
  }
  if (accept_word("answer")) {
    expect('(');
    Response r;
    r.relation = relation(cfg);
    expect(',');
    r.answer = answer_set();
    expect(')');
    return r;
  }
  fail("expected answer(...) or ack(...)");
}

RequestBody parse_request(std::string_view text, const ClusterConfig& cfg) {
  TermReader in(text);
  RequestBody body = in.request(cfg);
  in.expect_end();
  check_request(body, cfg);
  return body;
}

Response parse_response(std::string_view text, const ClusterConfig& cfg) {
  TermReader in(text);
  Response r = in.response(cfg);
  in.expect_end();
  if (r.answer) {
    for (const auto& [k, v] : *r.answer) {
      check_arity(cfg, r.relation, k);
      check_coarity(cfg, r.relation, v);
    }
  }
  return r;
}

void check_request(const RequestBody& body, const ClusterConfig& cfg) {
  if (const auto* r = std::get_if<ReadRequest>(&body)) {
    for (const Tuple& k : r->condition.keys) check_arity(cfg, r->relation, k);
    if (r->condition.kind == Condition::Kind::kHashRange &&
        r->condition.fragment > cfg.relation(r->relation).fragment_count()) {
      throw ConfigError("read condition names fragment " + std::to_string(r->condition.fragment) +
                        " beyond the relation's ranges");
    }
    return;
  }
  const auto& w = std::get<WriteRequest>(body);
  for (const auto& [k, v] : w.writes) {
    check_arity(cfg, w.relation, k);
    check_coarity(cfg, w.relation, v);
  }
}

}  // namespace replisim
