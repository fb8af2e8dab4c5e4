#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rdis/relfix/database.hpp"
#include "rdis/relfix/program.hpp"

namespace rdis::relfix {

struct EvalOptions {
  int jobs = 1;
};

struct EvalStats {
  std::size_t strata = 0;
  std::size_t iterations = 0;
  std::size_t derived = 0;
};

// Runs the program to fixpoint over `db`. Input relations must already be
// present with matching schemas; all other declared relations are created.
EvalStats evaluate(const Program& program, Database& db, const EvalOptions& options = {});

}  // namespace rdis::relfix
