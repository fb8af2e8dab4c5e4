#pragma once

#include <stdexcept>
#include <string>

namespace rdis::relfix {

enum class ErrorKind {
  negation_cycle,
  unbound_variable,
  arithmetic_overflow,
  aggregate_stratum_violation,
  schema_mismatch,
  unknown_relation,
  parse_error,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string detail);
  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace rdis::relfix
