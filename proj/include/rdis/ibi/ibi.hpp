#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rdis/facts/fact_base.hpp"
#include "rdis/relfix/database.hpp"
#include "rdis/relfix/program.hpp"

namespace rdis::ibi {

using facts::Address;

struct IbiWeights {
  std::int64_t incoming = 3;
  std::int64_t appears = 2;
  std::int64_t aligned = 1;
  std::int64_t outgoing = 1;
  std::int64_t jump_table_overlap = -2;
  std::int64_t threshold = 0;
};

// The boundary identification rules. Inputs are the fact relations plus
// jump_table_target(A), targets fed back from preliminary table detection.
relfix::Program build_program(const IbiWeights& weights);

struct Block {
  Address start = 0;
  Address end = 0;  // one past the last instruction byte
  std::vector<Address> instructions;
  std::int64_t points = 0;
};

struct Discard {
  Address block = 0;
  std::string reason;  // "overlap" or "below-threshold"
  Address winner = 0;  // 0 for below-threshold
};

struct CodeLayout {
  std::vector<Block> blocks;                          // sorted by start
  std::vector<std::pair<Address, Address>> data_regions;  // [start, end) in executable sections
  std::vector<Discard> discarded;                     // sorted by block
  std::vector<std::string> warnings;

  const Block* block_at(Address start) const;
  const Block* block_containing(Address a) const;
  bool is_instruction(Address a) const;
};

// Builds the layout from an evaluated IBI database.
CodeLayout resolve(const relfix::Database& db, const facts::FactBase& facts, const IbiWeights& weights);

// Adds block(B,End), code_in_block(A,B), data_region(S,E) and
// discarded_block(B,Reason,Winner).
void add_layout_relations(const CodeLayout& layout, relfix::Database& db);

// Full stage: facts -> evaluated database with layout relations.
CodeLayout run_ibi(const facts::FactBase& facts, const std::vector<Address>& jump_table_targets,
                  const IbiWeights& weights, int jobs, relfix::Database& db);

}  // namespace rdis::ibi
