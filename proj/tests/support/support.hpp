#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "rdis/emit/emit.hpp"
#include "rdis/pipeline/pipeline.hpp"
#include "rdis/relfix/relation.hpp"

namespace rdis::support {

std::filesystem::path fixture_dir();            // tests/fixtures
std::filesystem::path fixture_elf(const std::string& name);
std::filesystem::path corpus_source_dir();      // corpus/
std::filesystem::path corpus_build_dir();       // <build>/corpus
std::filesystem::path rdis_executable();

inline const std::vector<std::string> kFixtures = {"ex1",     "tar_jt",      "tar_jt_lea", "conflict",
                                                   "diamond", "eh_boundary", "nested_loop"};

// "<program>_O0" / "<program>_O1" for every corpus program.
std::vector<std::string> corpus_binaries();
std::filesystem::path corpus_stripped(const std::string& binary);
std::filesystem::path corpus_twin(const std::string& binary);  // unstripped, --emit-relocs

using Row = std::vector<std::string>;
std::set<Row> rows(const relfix::Relation& rel);
// Tab-separated golden file; '#' lines are comments.
std::set<Row> read_rows(const std::filesystem::path& path);

struct Disassembly {
  pipeline::PipelineResult result;
  emit::AsmProgram program;
};
Disassembly disassemble(const std::filesystem::path& elf, const pipeline::PipelineConfig& config = {});
Disassembly disassemble(facts::FactBase facts, const pipeline::PipelineConfig& config = {});

std::string print(const emit::AsmProgram& program);

// Structural checks; each returns one message per violation.
std::vector<std::string> must_within_may(const relfix::Database& db);
std::vector<std::string> invalid_closure(const facts::FactBase& facts, const relfix::Database& db);
std::vector<std::string> block_tiling(const facts::FactBase& facts, const ibi::CodeLayout& layout);
std::vector<std::string> objects_disjoint(const facts::FactBase& facts, const symbolization::Symbolization& s);
std::vector<std::string> label_bijection(const emit::AsmProgram& program);
std::vector<std::string> expressions_reevaluate(const facts::FactBase& facts, const symbolization::Symbolization& s);
std::vector<std::string> report_complete(const facts::FactBase& facts, const symbolization::Symbolization& s,
                                         const relfix::Database& db);
std::vector<std::string> dap_unique(const relfix::Database& db);
std::vector<std::string> propagation_bounded(const facts::FactBase& facts, const relfix::Database& db);
// All of the above.
std::vector<std::string> structural_violations(const Disassembly& d);

// Random stratified programs evaluated by the engine (jobs 1 and 4) and by
// a naive fixpoint oracle.
struct OracleSummary {
  int checked = 0;
  int mismatches = 0;
  std::string first_mismatch;
};
OracleSummary check_random_programs(std::uint64_t seed, int count);

// Runs `argv` with stdout captured to a string; returns the exit status
// (-1 when the process could not be started or was killed).
int run_process(const std::vector<std::string>& argv, std::string& output);

}  // namespace rdis::support
