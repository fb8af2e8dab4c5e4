#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rdis::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitPipeline = 2;
inline constexpr int kExitConfig = 3;
// cmd_diff: the comparison ran and found at least one FP, FN or WS.
inline constexpr int kExitDiffMismatch = 4;

struct DisasmOptions {
  std::string input;  // ELF path, or a facts directory with from_facts
  bool from_facts = false;
  std::string output;     // assembly; a link recipe goes to <output>.link
  std::string asm_db;     // serialized AsmProgram for `stretch`
  std::string report;
  std::string dump_dir;   // every relation of the final database
  std::string config_file;
  std::vector<std::pair<std::string, std::string>> overrides;  // key=value, applied after the file
  std::optional<int> jobs;
  bool print_config = false;
};

int cmd_disasm(const DisasmOptions& options, std::ostream& out, std::ostream& err);
int cmd_facts(const std::string& elf_path, const std::string& dir, int jobs, std::ostream& err);
// Prints the summary and table to `out` and, when `table_path` is set, to that file.
int cmd_diff(const std::string& report_path, const std::string& twin_path, const std::string& table_path,
             std::ostream& out, std::ostream& err);
int cmd_stretch(const std::string& asm_db_path, const std::string& output, const std::string& asm_db_out,
                std::ostream& err);

}  // namespace rdis::cli
