#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "replisim/core.hpp"

namespace replisim {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The evaluable forms of a read condition.
struct Condition {
  enum class Kind { kTrue, kKeyEq, kKeyIn, kHashRange };

  Kind kind = Kind::kTrue;
  std::vector<Tuple> keys;  // one key for kKeyEq, any number for kKeyIn
  FragmentIndex fragment = 1;

  static Condition always() { return {}; }
  static Condition key_eq(Tuple k) { return {Kind::kKeyEq, {std::move(k)}, 1}; }
  static Condition key_in(std::vector<Tuple> ks) { return {Kind::kKeyIn, std::move(ks), 1}; }
  static Condition hash_range(FragmentIndex j) { return {Kind::kHashRange, {}, j}; }

  friend auto operator<=>(const Condition&, const Condition&) = default;
};

bool holds(const Condition& phi, const ClusterConfig& cfg, RelationId i, const Tuple& key);

using WriteSet = std::map<Tuple, Value>;
using Answer = std::map<Tuple, Tuple>;

using RequestId = std::uint32_t;

struct ReadRequest {
  RelationId relation = 0;
  Condition condition;
  bool print = false;

  friend auto operator<=>(const ReadRequest&, const ReadRequest&) = default;
};

struct WriteRequest {
  RelationId relation = 0;
  WriteSet writes;

  friend auto operator<=>(const WriteRequest&, const WriteRequest&) = default;
};

using RequestBody = std::variant<ReadRequest, WriteRequest>;

RelationId relation_of(const RequestBody& body);
inline bool is_read(const RequestBody& body) { return std::holds_alternative<ReadRequest>(body); }

/// answer(i, phi) carries an answer set; acknowledge(write, i) carries none.
struct Response {
  RelationId relation = 0;
  std::optional<Answer> answer;

  friend auto operator<=>(const Response&, const Response&) = default;
};

// Canonical renderings. Sets are printed in key order so traces diff cleanly.
std::string format_atom(const Atom& a);
std::string format_tuple(const Tuple& t);
std::string format_value(const Value& v);
std::string format_condition(const Condition& phi);
std::string format_answer(const Answer& ans);
std::string format_request(const RequestBody& body, const ClusterConfig& cfg);
std::string format_response(const Response& resp, const ClusterConfig& cfg);

/// Recursive-descent reader for the term syntax above.
class TermReader {
 public:
  explicit TermReader(std::string_view text) : text_(text) {}

  Atom atom();
  Tuple tuple();
  Value value();
  Condition condition();
  WriteSet write_set();
  Answer answer_set();
  std::string identifier();
  RequestBody request(const ClusterConfig& cfg);
  Response response(const ClusterConfig& cfg);

  void expect(char c);
  bool accept(char c);
  bool accept_word(std::string_view w);
  void skip_space();
  bool at_end();
  void expect_end();
  std::size_t position() const { return pos_; }

 private:
  [[noreturn]] void fail(const std::string& what) const;
  RelationId relation(const ClusterConfig& cfg);
  std::int64_t integer();

  std::string_view text_;
  std::size_t pos_ = 0;
};

RequestBody parse_request(std::string_view text, const ClusterConfig& cfg);
Response parse_response(std::string_view text, const ClusterConfig& cfg);

/// Arity checks for everything a request mentions.
void check_request(const RequestBody& body, const ClusterConfig& cfg);

}  // namespace replisim
