#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdis/elf/elf_image.hpp"
#include "rdis/facts/fact_base.hpp"
#include "rdis/symbolization/symbolization.hpp"

namespace rdis::cli {

using facts::Address;

// The report and the twin binary describe different section layouts.
class GroundTruthMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReportSection {
  std::string name;
  Address start = 0;
  std::uint64_t length = 0;
};

// "# section <name> <start> <length>" lines that follow the decisions.
void write_report_sections(std::ostream& out, const std::vector<facts::Section>& sections);
std::vector<ReportSection> read_report_sections(std::istream& in);

// One symbolic reference location named by a link-time relocation.
struct TruthEntry {
  Address addr = 0;  // data location or instruction address
  int operand = 0;
  symbolization::Context context = symbolization::Context::data;
  std::string section;  // section of the referenced symbol; "*external" when undefined
  std::string relocation;
};

struct TruthOptions {
  // Locations inside these sections are not compared.
  std::vector<std::string> excluded_sections;
};

// Relocations of a binary linked with --emit-relocs, mapped to decision
// keys. Branch targets, undefined symbols outside GOT/PLT forms, absolute
// symbols and locations in excluded or non-alloc sections are skipped and
// counted in `skipped`.
std::vector<TruthEntry> ground_truth(const elf::ElfImage& twin, const TruthOptions& options, std::size_t& skipped);

enum class Verdict { ok, fp, fn, ws };
std::string_view verdict_name(Verdict v);

struct DiffRow {
  Address addr = 0;
  int operand = 0;
  symbolization::Context context = symbolization::Context::data;
  Verdict verdict = Verdict::ok;
  std::string ours;   // rendered expression or "-"
  std::string truth;  // section of the relocation target or "-"
};

struct DiffResult {
  std::size_t fp = 0, fn = 0, ws = 0, ok = 0, skipped = 0;
  std::vector<DiffRow> rows;  // every compared location, sorted by key
};

// Throws GroundTruthMismatch when an alloc section of the twin differs from
// the report's section list.
DiffResult diff(const std::vector<symbolization::Decision>& decisions, const std::vector<ReportSection>& sections,
                const elf::ElfImage& twin, const TruthOptions& options);

void write_diff(std::ostream& out, const DiffResult& result);

}  // namespace rdis::cli
