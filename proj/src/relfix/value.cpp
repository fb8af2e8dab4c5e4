#include "rdis/relfix/value.hpp"

#include <deque>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

#include "rdis/relfix/error.hpp"

namespace rdis::relfix {
namespace {

struct Interner {
  std::mutex mu;
  std::unordered_map<std::string, Value> ids;
  std::deque<std::string> texts;
};

Interner& interner() {
  static Interner instance;
  return instance;
}

}  // namespace

Value intern(std::string_view text) {
  Interner& in = interner();
  std::lock_guard lock(in.mu);
  auto it = in.ids.find(std::string(text));
  if (it != in.ids.end()) return it->second;
  Value id = static_cast<Value>(in.texts.size());
  in.texts.emplace_back(text);
  in.ids.emplace(in.texts.back(), id);
  return id;
}

const std::string& text_of(Value id) {
  Interner& in = interner();
  std::lock_guard lock(in.mu);
  if (id < 0 || static_cast<std::size_t>(id) >= in.texts.size())
    throw std::out_of_range("text id " + std::to_string(id) + " was never interned");
  return in.texts[static_cast<std::size_t>(id)];
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::negation_cycle: return "NegationCycle";
    case ErrorKind::unbound_variable: return "UnboundVariable";
    case ErrorKind::arithmetic_overflow: return "ArithmeticOverflow";
    case ErrorKind::aggregate_stratum_violation: return "AggregateStratumViolation";
    case ErrorKind::schema_mismatch: return "SchemaMismatch";
    case ErrorKind::unknown_relation: return "UnknownRelation";
    case ErrorKind::parse_error: return "ParseError";
  }
  return "?";
}

Error::Error(ErrorKind kind, std::string detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
      kind_(kind),
      detail_(std::move(detail)) {}

}  // namespace rdis::relfix
