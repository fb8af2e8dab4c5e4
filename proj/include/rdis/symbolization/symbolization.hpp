#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rdis/facts/fact_base.hpp"
#include "rdis/ibi/ibi.hpp"
#include "rdis/relfix/database.hpp"
#include "rdis/relfix/program.hpp"

namespace rdis::symbolization {

using facts::Address;

struct SymbolizationWeights {
  // Data object candidates.
  std::int64_t pointer_to_instruction = 2;
  std::int64_t data_access_match = 2;
  std::int64_t symbol_array = 1;
  std::int64_t pointed_by_symbol_array = 1;
  std::int64_t aligned = 2;
  std::int64_t string_default = 2;
  std::int64_t long_string = 2;
  std::int64_t symbol_symbol = 4;
  std::int64_t access_conflict = -4;
  std::int64_t special_section = -4;
  // Code immediates.
  std::int64_t used_for_address = 2;
  std::int64_t uncommon_operation = -3;
  std::int64_t compared_to_non_address = -3;
  // A candidate or number is kept when its total is >= the threshold.
  std::int64_t data_threshold = 0;
  std::int64_t code_threshold = 0;
  // Largest distance between an out-of-range displacement and the section
  // boundary it is anchored to when no access pattern names the section.
  std::int64_t repair_distance = 64;
};

struct SymbolizationOptions {
  SymbolizationWeights weights;
  std::vector<std::string> special_sections = {".eh_frame", ".eh_frame_hdr", ".gcc_except_table",
                                               ".dynamic", ".got",          ".got.plt",
                                               ".plt",     ".plt.got",      ".plt.sec"};
  // Preliminary mode accepts any decoded instruction as a jump-table target
  // instead of requiring a final block.
  bool preliminary = false;
};

enum class CandidateKind { symbol, string, symbol_symbol, other };
std::string_view kind_name(CandidateKind kind);

struct DataObject {
  Address addr = 0;
  CandidateKind kind = CandidateKind::other;
  std::int64_t size = 0;
  std::int64_t points = 0;
  Address target = 0;     // Symbol and SymbolSymbol
  Address reference = 0;  // SymbolSymbol
};

struct DataDiscard {
  Address addr = 0;
  CandidateKind kind = CandidateKind::other;
  std::string reason;  // "overlap" or "below-threshold"
  Address winner = 0;
};

struct SymbolicExpr {
  enum class Kind { literal, sym_plus, sym_minus_sym };
  Kind kind = Kind::literal;
  std::int64_t value = 0;   // raw number, for every kind
  Address target = 0;       // sym_plus, sym_minus_sym
  std::int64_t offset = 0;  // sym_plus: value == target + offset
  Address reference = 0;    // sym_minus_sym: value == target - reference (truncated)
  // sym_plus: section whose label is used; differs from the section
  // containing target only when target is that section's end.
  std::string section;

  bool symbolic() const { return kind != Kind::literal; }
  std::string render() const;
};

enum class Context { data, immediate, displacement };
std::string_view context_name(Context c);

struct Decision {
  Address addr = 0;  // data location or instruction address
  int operand = 0;   // operand index for code numbers, 0 for data
  Context context = Context::data;
  SymbolicExpr expr;
  std::vector<std::string> heuristics;  // "name:points", or a repair tag
  std::int64_t total = 0;
};

struct JumpTable {
  Address jump = 0;
  std::int64_t entry_size = 0;
  Address start = 0;
  Address reference = 0;
  std::vector<Address> targets;  // in entry order
};

struct ExtendedRange {
  std::string section;
  Address low = 0;
  Address high = 0;
  std::int64_t step = 0;
  Address base = 0;
};

struct Symbolization {
  std::vector<DataObject> objects;       // resolved, sorted by addr
  std::vector<DataDiscard> discarded;    // sorted by addr
  std::vector<Decision> decisions;       // sorted by (addr, operand, context)
  std::vector<JumpTable> tables;         // sorted by start
  std::vector<ExtendedRange> extended;   // sorted
  std::vector<std::string> warnings;

  const Decision* find(Address addr, int operand, Context context) const;
};

// Rules over facts, IBI layout relations and analyses outputs. C++-computed
// inputs: string_candidate(A,Len), memory_value(A,Size,Unsigned,Signed),
// special_section_range(Lo,Hi), preliminary_mode(M).
relfix::Program build_program(const SymbolizationOptions& options);

// Adds the C++-computed inputs, evaluates the rules and resolves objects.
Symbolization run_symbolization(const facts::FactBase& facts, const ibi::CodeLayout& layout,
                                const SymbolizationOptions& options, int jobs, relfix::Database& db);

// Jump-table targets and references found on a preliminary layout.
std::vector<Address> preliminary_jump_targets(const facts::FactBase& facts, const ibi::CodeLayout& layout,
                                              const SymbolizationOptions& options, int jobs, relfix::Database& db);

// Maximal printable runs (0x20-0x7e, tab, newline) of at least 2 bytes
// followed by a 0 byte, outside executable sections: (addr, length incl. 0).
std::vector<std::pair<Address, std::int64_t>> find_strings(const facts::FactBase& facts);

// Line-oriented report: one tab-separated record per decision
// (addr, operand, context, decision, expr, total, heuristics) and a summary.
void write_report(std::ostream& out, const Symbolization& s);
std::vector<Decision> read_report(std::istream& in);

}  // namespace rdis::symbolization
