#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rdis/relfix/program.hpp"
#include "rdis/relfix/relation.hpp"

namespace rdis::relfix::detail {

struct CExpr {
  ExprOp op = ExprOp::constant;
  Value value = 0;
  int slot = -1;
  int lhs = -1;
  int rhs = -1;
};

// Expression trees flattened into one pool per plan; `root` indexes it.
struct ExprPool {
  std::vector<CExpr> nodes;
};

// same: the column must equal a slot bound by an earlier column of this atom.
enum class ArgMode : std::uint8_t { bind, check, same, skip };

struct Arg {
  ArgMode mode = ArgMode::skip;
  int slot = -1;  // bind/same: slot
  int expr = -1;  // check: expression to compare against
};

struct Step {
  enum class Kind : std::uint8_t { scan, negation, filter, assign, aggregate } kind = Kind::scan;
  // scan / negation
  const Relation* rel = nullptr;
  std::vector<Arg> args;
  std::uint32_t mask = 0;  // columns with ArgMode::check
  bool delta = false;
  std::uint32_t lo = 0;  // row range visible to this scan
  std::uint32_t hi = 0;
  // filter / assign
  CmpOp cmp = CmpOp::eq;
  int lhs = -1;
  int rhs = -1;
  int slot = -1;
  // aggregate
  AggKind agg = AggKind::count;
  int target = -1;
  std::vector<Step> sub;
  std::vector<int> local_slots;
};

struct Plan {
  const Rule* rule = nullptr;
  ExprPool pool;
  std::vector<Step> steps;
  std::vector<int> head;  // expression per head column
  std::vector<std::string> slot_names;
};

// Flat buffer of head tuples produced by one kernel run.
struct Output {
  std::size_t arity = 0;
  std::vector<Value> values;
};

// Serial reference kernel.
void run_plan_serial(const Plan& plan, const Relation& head_rel, Output& out);
// OpenMP kernel: splits the first scan's rows across `jobs` threads and
// concatenates per-thread buffers in thread order.
void run_plan_parallel(const Plan& plan, const Relation& head_rel, Output& out, int jobs);

}  // namespace rdis::relfix::detail
