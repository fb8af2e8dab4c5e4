#pragma once

#include <cstdint>

#include "rdis/facts/fact_base.hpp"
#include "rdis/relfix/database.hpp"
#include "rdis/relfix/program.hpp"

namespace rdis::analyses {

struct AnalysisOptions {
  std::int64_t step_limit = 5;
  // Calls define every general-purpose register instead of only the
  // caller-saved ones.
  bool call_kills_all = false;
};

// Def-use, def_used_for_address, reg_val_edge/reg_val and data access
// patterns. Inputs: fact relations, the IBI relations (instruction_operand,
// may_fallthrough, direct_jump, jump_operation, call_operation,
// instruction_has_loop_prefix, section_range) and code_in_block.
relfix::Program build_program(const AnalysisOptions& options);

void run_analyses(const AnalysisOptions& options, int jobs, relfix::Database& db);

}  // namespace rdis::analyses
