#include <CLI11.hpp>

#include <iostream>

#include "rdis/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rdis: reassembleable disassembler for x86-64 ELF"};
  app.require_subcommand(1);
  int code = 0;

  rdis::cli::DisasmOptions d;
  int disasm_jobs = 0;
  std::vector<std::string> sets;
  auto* disasm = app.add_subcommand("disasm", "disassemble an ELF binary or a facts directory");
  disasm->add_option("input", d.input, "ELF binary, or facts directory with --from-facts");
  disasm->add_option("-o,--output", d.output, "assembly output; the link recipe goes to <FILE>.link");
  disasm->add_option("--asm-db", d.asm_db, "serialized program for the stretch command");
  disasm->add_option("--report", d.report, "symbolization report");
  disasm->add_option("--dump-relations", d.dump_dir, "directory for every relation of the final database");
  disasm->add_flag("--from-facts", d.from_facts, "treat the input as a facts directory");
  disasm->add_option("--config", d.config_file, "key=value configuration file");
  disasm->add_option("--set", sets, "key=value override, applied after --config");
  disasm->add_option("--jobs", disasm_jobs, "worker threads")->check(CLI::PositiveNumber);
  disasm->add_flag("--print-config", d.print_config, "print the effective configuration");
  disasm->callback([&] {
    if (d.input.empty() && !d.print_config) throw CLI::RequiredError("input");
    if (disasm_jobs > 0) d.jobs = disasm_jobs;
    for (const std::string& s : sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos) {
        std::cerr << "config error: --set expects key=value, got '" << s << "'\n";
        code = rdis::cli::kExitConfig;
        return;
      }
      d.overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    code = rdis::cli::cmd_disasm(d, std::cout, std::cerr);
  });

  std::string facts_in, facts_dir;
  int facts_jobs = 1;
  auto* facts = app.add_subcommand("facts", "extract the fact relations of an ELF binary");
  facts->add_option("elf", facts_in)->required();
  facts->add_option("-o,--output", facts_dir, "output directory")->required();
  facts->add_option("--jobs", facts_jobs)->check(CLI::PositiveNumber);
  facts->callback([&] { code = rdis::cli::cmd_facts(facts_in, facts_dir, facts_jobs, std::cerr); });

  std::string report, twin, table;
  auto* diff = app.add_subcommand("diff", "compare a report against a binary linked with --emit-relocs");
  diff->add_option("report", report)->required();
  diff->add_option("twin", twin)->required();
  diff->add_option("-o,--output", table, "also write the summary and table to FILE");
  diff->callback([&] { code = rdis::cli::cmd_diff(report, twin, table, std::cout, std::cerr); });

  std::string db_in, stretched, db_out;
  auto* stretch = app.add_subcommand("stretch", "insert nops and data padding into a disassembled program");
  stretch->add_option("asm-db", db_in)->required();
  stretch->add_option("-o,--output", stretched, "assembly output")->required();
  stretch->add_option("--asm-db-out", db_out, "serialized stretched program");
  stretch->callback([&] { code = rdis::cli::cmd_stretch(db_in, stretched, db_out, std::cerr); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : rdis::cli::kExitConfig;
  }
  return code;
}
