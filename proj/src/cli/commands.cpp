#include "rdis/cli/commands.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include "rdis/cli/diff.hpp"
#include "rdis/elf/elf_image.hpp"
#include "rdis/elf/extract.hpp"
#include "rdis/emit/emit.hpp"
#include "rdis/pipeline/pipeline.hpp"
#include "rdis/relfix/error.hpp"
#include "rdis/relfix/text_io.hpp"

namespace rdis::cli {
namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path);
  return f;
}

void write_outputs(const emit::AsmProgram& program, const std::string& path, const std::string& db_path) {
  if (!path.empty()) {
    auto f = open_out(path);
    emit::print_asm(f, program);
    auto recipe = open_out(path + ".link");
    std::string exe = std::filesystem::path(path).replace_extension("").string();
    emit::write_link_recipe(recipe, program, path, exe);
  }
  if (!db_path.empty()) {
    auto f = open_out(db_path);
    emit::write_asm_db(f, program);
  }
}

facts::FactBase load_input(const DisasmOptions& o, int jobs) {
  if (o.from_facts) {
    if (!std::filesystem::is_directory(o.input)) throw InputError("not a facts directory: " + o.input);
    return facts::load_facts(o.input);
  }
  elf::ElfImage image = elf::load_elf(o.input);
  return elf::extract_facts(image, {jobs, std::filesystem::path(o.input).filename().string()});
}

std::vector<std::string> diff_exclusions(const elf::ElfImage& twin) {
  std::vector<std::string> out = symbolization::SymbolizationOptions{}.special_sections;
  for (const elf::ElfSection& s : twin.sections)
    if (s.alloc() && emit::skipped_section(s.name)) out.push_back(s.name);
  return out;
}

}  // namespace

int cmd_disasm(const DisasmOptions& o, std::ostream& out, std::ostream& err) {
  pipeline::PipelineConfig config;
  try {
    if (!o.config_file.empty()) {
      std::ifstream f(o.config_file);
      if (!f) throw pipeline::ConfigError("cannot read config " + o.config_file);
      config.apply(f, o.config_file);
    }
    for (const auto& [k, v] : o.overrides) config.set(k, v);
    if (o.jobs) config.jobs = *o.jobs;
    config.validate();
  } catch (const pipeline::ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (o.print_config) {
    config.print(out);
    if (o.input.empty()) return kExitOk;
  }

  facts::FactBase facts;
  try {
    facts = load_input(o, config.jobs);
  } catch (const elf::ElfError& e) {
    err << "input error: " << elf::error_kind_name(e.kind()) << ": " << e.what() << '\n';
    return kExitInput;
  } catch (const facts::IntegrityError& e) {
    err << "input error: " << e.what() << '\n';
    for (const std::string& v : e.violations()) err << "  " << v << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    pipeline::PipelineResult r = pipeline::run(std::move(facts), config);
    emit::AsmProgram program = emit::build_asm(r.facts, r.layout, r.symbols);
    emit::check_labels(program);
    for (const std::string& w : r.layout.warnings) err << "warning: " << w << '\n';
    for (const std::string& w : r.symbols.warnings) err << "warning: " << w << '\n';
    for (const std::string& w : program.warnings) err << "warning: " << w << '\n';
    try {
      write_outputs(program, o.output, o.asm_db);
      if (!o.report.empty()) {
        auto f = open_out(o.report);
        symbolization::write_report(f, r.symbols);
        write_report_sections(f, r.facts.sections);
      }
      if (!o.dump_dir.empty()) {
        std::filesystem::create_directories(o.dump_dir);
        relfix::dump_relations(r.db, r.db.names(), o.dump_dir);
      }
    } catch (const std::exception& e) {
      err << "output error: " << e.what() << '\n';
      return kExitInput;
    }
  } catch (const emit::UnresolvedLabel& e) {
    err << "pipeline assertion: " << e.what() << '\n';
    return kExitPipeline;
  } catch (const relfix::Error& e) {
    err << "pipeline assertion: " << e.what() << '\n';
    return kExitPipeline;
  }
  return kExitOk;
}

int cmd_facts(const std::string& elf_path, const std::string& dir, int jobs, std::ostream& err) {
  try {
    elf::ElfImage image = elf::load_elf(elf_path);
    facts::FactBase f =
        elf::extract_facts(image, {jobs, std::filesystem::path(elf_path).filename().string()});
    std::filesystem::create_directories(dir);
    facts::dump_facts(f, dir);
  } catch (const elf::ElfError& e) {
    err << "input error: " << elf::error_kind_name(e.kind()) << ": " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}

int cmd_diff(const std::string& report_path, const std::string& twin_path, const std::string& table_path,
             std::ostream& out, std::ostream& err) {
  try {
    std::ifstream rf(report_path);
    if (!rf) throw InputError("cannot read " + report_path);
    std::stringstream text;
    text << rf.rdbuf();
    std::istringstream a(text.str()), b(text.str());
    std::vector<symbolization::Decision> decisions = symbolization::read_report(a);
    std::vector<ReportSection> sections = read_report_sections(b);
    elf::ElfImage twin = elf::load_elf(twin_path);
    DiffResult r = diff(decisions, sections, twin, {diff_exclusions(twin)});
    write_diff(out, r);
    if (!table_path.empty()) {
      auto f = open_out(table_path);
      write_diff(f, r);
    }
    return r.fp + r.fn + r.ws == 0 ? kExitOk : kExitDiffMismatch;
  } catch (const GroundTruthMismatch& e) {
    err << "GroundTruthMismatch: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  }
}

int cmd_stretch(const std::string& asm_db_path, const std::string& output, const std::string& asm_db_out,
                std::ostream& err) {
  try {
    std::ifstream f(asm_db_path);
    if (!f) throw InputError("cannot read " + asm_db_path);
    emit::AsmProgram program = emit::stretch(emit::read_asm_db(f));
    write_outputs(program, output, asm_db_out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace rdis::cli
