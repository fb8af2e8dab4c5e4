#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rdis/facts/fact_base.hpp"
#include "rdis/ibi/ibi.hpp"
#include "rdis/symbolization/symbolization.hpp"

namespace rdis::emit {

using facts::Address;

class UnresolvedLabel : public std::runtime_error {
 public:
  explicit UnresolvedLabel(const std::string& label)
      : std::runtime_error("UnresolvedLabel: " + label), label_(label) {}
  const std::string& label() const { return label_; }

 private:
  std::string label_;
};

enum class ItemKind {
  label,        // text: label name
  instruction,  // text: mnemonic; args: rendered operands in Intel order
  raw,          // bytes copied verbatim (nops, undecoded code, padding)
  data,         // text: .byte/.word/.long/.quad; args: one rendered value
  string,       // args: one escaped body, printed as .string
  zero,         // count: number of zero bytes
};

// A symbolic reference after label anchoring: `label` plus `offset`, or
// `label` minus `minus` when `minus` is set.
struct LabelRef {
  std::string label;
  std::int64_t offset = 0;
  std::string minus;
  std::string render() const;
};

struct AsmItem {
  ItemKind kind = ItemKind::raw;
  Address addr = 0;  // original address; 0 for inserted items
  std::string prefix;
  std::string text;
  std::vector<std::string> args;
  std::vector<LabelRef> refs;  // every symbolic reference inside args
  std::vector<std::uint8_t> bytes;
  std::int64_t count = 0;
  bool block_start = false;  // first instruction of a code block
};

struct AsmSection {
  std::string name;
  std::string flags;  // "ax", "a", "aw"
  std::string type;   // "@progbits", "@nobits", "@init_array", "@fini_array"
  Address addr = 0;
  std::uint64_t size = 0;
  std::uint64_t align = 1;
  std::vector<AsmItem> items;
};

struct AsmProgram {
  std::vector<AsmSection> sections;  // original address order
  std::string entry_label;           // defined as global _start
  std::vector<std::string> weak;     // undefined weak externals
  std::vector<std::string> needed;   // DT_NEEDED libraries
  // [lo, hi) address spans of symbol-symbol jump tables' code, kept free of
  // inserted nops.
  std::vector<std::pair<Address, Address>> no_stretch;
  std::vector<std::string> warnings;
};

// Names for targets outside the emitted sections: PLT stubs, GOT slots and
// copy-relocated objects, all taken from the dynamic relocation facts.
struct ExternalNames {
  std::vector<std::pair<Address, std::string>> plt;   // stub address -> function
  std::vector<std::pair<Address, std::string>> got;   // slot address -> symbol
  std::vector<std::pair<Address, std::string>> copy;  // object address -> symbol
  std::set<std::string> weak;
};
ExternalNames external_names(const facts::FactBase& facts);

// Sections never printed; the linker regenerates them.
bool skipped_section(const std::string& name);

AsmProgram build_asm(const facts::FactBase& facts, const ibi::CodeLayout& layout,
                     const symbolization::Symbolization& symbols);

// Throws UnresolvedLabel for a referenced label that is not defined, or one
// defined twice.
void check_labels(const AsmProgram& program);
std::set<std::string> defined_labels(const AsmProgram& program);
std::set<std::string> referenced_labels(const AsmProgram& program);

// GNU as input, .intel_syntax noprefix.
void print_asm(std::ostream& out, const AsmProgram& program);

struct StretchOptions {
  int every = 8;     // instructions between nop groups
  int nops = 8;      // one-byte nops per group
  int padding = 64;  // zero bytes prepended to each data section
};
AsmProgram stretch(const AsmProgram& program, const StretchOptions& options = {});

// Line-based serialization of an AsmProgram; read_asm_db(write_asm_db(p)) == p.
void write_asm_db(std::ostream& out, const AsmProgram& program);
AsmProgram read_asm_db(std::istream& in);

// key=value lines: entry, needed, original section addresses and the link
// command line for `asm_path` -> `out_path`.
void write_link_recipe(std::ostream& out, const AsmProgram& program, const std::string& asm_path,
                       const std::string& out_path);
std::vector<std::string> link_command(const AsmProgram& program, const std::string& asm_path,
                                      const std::string& out_path);

bool operator==(const LabelRef& a, const LabelRef& b);
bool operator==(const AsmItem& a, const AsmItem& b);
bool operator==(const AsmSection& a, const AsmSection& b);
bool operator==(const AsmProgram& a, const AsmProgram& b);

}  // namespace rdis::emit
