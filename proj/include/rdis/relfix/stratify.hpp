#pragma once

#include <cstddef>
#include <vector>

#include "rdis/relfix/program.hpp"

namespace rdis::relfix {

struct Stratum {
  std::vector<std::size_t> relations;  // indices into Program::relations()
  std::vector<std::size_t> rules;      // indices into Program::rules()
  bool recursive = false;
};

// Strata in evaluation order: every relation a stratum depends on is
// complete before the stratum runs. Throws Error on negation cycles,
// aggregates over a relation of the same stratum, and ungrounded rules.
std::vector<Stratum> stratify(const Program& program);

// Throws Error(unbound_variable) unless every variable of the rule is bound
// by a positive atom, an assignment, or an aggregate result.
void check_grounded(const Rule& rule);

}  // namespace rdis::relfix
