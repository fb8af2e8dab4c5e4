#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdis/relfix/database.hpp"
#include "rdis/relfix/program.hpp"

namespace rdis::facts {

using Address = std::uint64_t;
using OperandId = std::int64_t;  // 0 marks an absent operand

struct Instruction {
  Address addr = 0;
  int size = 0;
  std::string prefix;
  std::string opcode;
  // Source operands first, destination last.
  OperandId ops[4] = {0, 0, 0, 0};
  int operand_count() const {
    int n = 0;
    while (n < 4 && ops[n] != 0) ++n;
    return n;
  }
};

struct RegDirect {
  OperandId id = 0;
  std::string reg;
};

struct Immediate {
  OperandId id = 0;
  std::int64_t value = 0;
};

// RIP-relative operands carry base "RIP" and the absolute target as disp.
struct Indirect {
  OperandId id = 0;
  std::string seg = "NONE";
  std::string base = "NONE";
  std::string index = "NONE";
  std::int64_t mult = 1;
  std::int64_t disp = 0;
  int size = 0;
};

struct Section {
  std::string name;
  Address start = 0;
  std::uint64_t length = 0;
  bool executable = false;
  bool writable = false;
  bool initialized = true;
  Address end() const { return start + length; }
  bool contains(Address a) const { return a >= start && a < end(); }
};

struct Symbol {
  Address addr = 0;
  std::string name;
  std::string kind;  // FUNC, OBJECT, NOTYPE, SECTION
};

struct Relocation {
  Address addr = 0;
  std::string kind;  // GLOB_DAT, JUMP_SLOT, COPY, ...
  std::string symbol;
  std::int64_t addend = 0;
};

struct FactBase {
  std::vector<Instruction> instructions;
  std::vector<Address> invalid;
  std::vector<RegDirect> regdirect;
  std::vector<Immediate> immediates;
  std::vector<Indirect> indirect;
  std::vector<std::pair<Address, std::uint8_t>> data_bytes;
  std::vector<std::pair<Address, Address>> address_in_data;
  std::vector<Section> sections;
  std::vector<Symbol> symbols;
  std::vector<Relocation> relocations;
  std::vector<Address> entry_points;
  std::vector<Address> extra_targets;
  std::vector<std::pair<std::string, std::string>> metadata;

  const Section* section_at(Address a) const;
  const Section* section_named(std::string_view name) const;
};

struct FactSchema {
  std::string name;
  std::vector<relfix::ColumnKind> columns;
};

// Every fact relation in file order.
const std::vector<FactSchema>& fact_schemas();

class IntegrityError : public std::runtime_error {
 public:
  explicit IntegrityError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// Empty when the fact base satisfies every structural invariant.
std::vector<std::string> validate(const FactBase& facts);

// Handles on the fact relations of a program that consumes them as inputs.
struct FactRelations {
  relfix::RelationRef instruction, invalid, op_regdirect, op_immediate, op_indirect, data_byte,
      address_in_data, section, symbol, relocation, entry_point, extra_target, metadata;
};
FactRelations declare_fact_inputs(relfix::Program& program);

// Adds every fact relation to `db` and fills it.
void to_database(const FactBase& facts, relfix::Database& db);
FactBase from_database(const relfix::Database& db);

// <dir>/<relation>.facts per relation. load_facts() throws IntegrityError
// on violations and relfix::Error on malformed files.
void dump_facts(const FactBase& facts, const std::filesystem::path& dir);
FactBase load_facts(const std::filesystem::path& dir);

// Lookup tables over a fact base.
class OperandTable {
 public:
  explicit OperandTable(const FactBase& facts);
  const RegDirect* reg(OperandId id) const;
  const Immediate* imm(OperandId id) const;
  const Indirect* mem(OperandId id) const;

 private:
  std::map<OperandId, const RegDirect*> regs_;
  std::map<OperandId, const Immediate*> imms_;
  std::map<OperandId, const Indirect*> mems_;
};

}  // namespace rdis::facts
