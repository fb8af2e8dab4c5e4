// One PASS/FAIL line per acceptance criterion; exits 1 when any fails.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rdis/cli/commands.hpp"
#include "rdis/cli/diff.hpp"
#include "rdis/relfix/engine.hpp"
#include "rdis/relfix/error.hpp"
#include "rdis/relfix/stratify.hpp"
#include "rdis/relfix/text_io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace rdis;
using facts::Address;
using support::Row;

namespace {

// Collects failure messages for one criterion.
struct Check {
  std::vector<std::string> failures;
  std::string note;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void absorb(const std::vector<std::string>& violations, const std::string& where) {
    for (const std::string& v : violations) failures.push_back(where + ": " + v);
  }
};

std::string hexs(std::uint64_t v) {
  std::ostringstream s;
  s << "0x" << std::hex << v;
  return s.str();
}

std::set<Row> golden(const std::string& name) {
  return support::read_rows(support::fixture_dir() / "ex1" / "golden" / (name + ".facts"));
}

std::set<Row> select(const std::set<Row>& rows, const std::function<bool(const Row&)>& keep, std::size_t width = 0) {
  std::set<Row> out;
  for (const Row& r : rows)
    if (keep(r)) out.insert(width ? Row(r.begin(), r.begin() + static_cast<long>(width)) : r);
  return out;
}

void worked_example(Check& c) {
  auto t0 = std::chrono::steady_clock::now();
  auto d = support::disassemble(facts::load_facts(support::fixture_dir() / "ex1" / "facts"));
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.expect(secs < 1.0, "took " + std::to_string(secs) + "s");
  c.note = std::to_string(static_cast<int>(secs * 1000)) + "ms";
  c.expect(support::rows(d.result.db.at("def_used")) == golden("def_used"), "def_used differs");
  auto rbx = select(support::rows(d.result.db.at("reg_val")),
                    [](const Row& r) { return r[1] == "RBX" && (r[0] == "0x416c35" || r[0] == "0x416c58"); }, 6);
  c.expect(rbx == golden("reg_val"), "reg_val differs");
  auto daps = select(support::rows(d.result.db.at("data_access_pattern")),
                     [](const Row& r) { return r[3] >= "0x416c35" && r[3] < "0x416c5f"; });
  c.expect(daps == golden("data_access_pattern"), "data_access_pattern differs");
  auto prop = support::rows(d.result.db.at("propagated_data_access"));
  c.expect(select(prop, [](const Row& r) { return r[2] == "24"; }) == golden("propagated_data_access"),
           "propagated_data_access differs");
  for (const Row& r : prop)
    c.expect(r[0] != "0x45d328" || r[3] == "0x413050", "loop access propagated to 0x45d328");
}

void jump_table(Check& c) {
  auto d = support::disassemble(support::fixture_elf("tar_jt"));
  c.expect(support::rows(d.result.db.at("jump_table_start")).count({"0x47da90", "1", "0x4a09f0", "0x47da93"}),
           "jump_table_start(0x47da90,1,0x4a09f0,0x47da93) missing");
  c.expect(support::print(d.program).find("  .byte .L_47DB3F-.L_47DA93\n") != std::string::npos,
           "first entry not printed as .L_47DB3F-.L_47DA93");
}

void symbol_plus_constant(Check& c) {
  auto d = support::disassemble(support::fixture_elf("conflict"));
  c.expect(support::print(d.program).find("  mov EBP,OFFSET .L_402D40+168\n") != std::string::npos,
           "mov EBP,OFFSET .L_402D40+168 not printed");
  bool range = false;
  for (const Row& r : support::rows(d.result.db.at("extended_section_range")))
    range |= r[2] == "0x402718" && r[3] == "0x402df0";
  c.expect(range, "extended range [0x402718,0x402df0] not derived");
}

void diamond(Check& c) {
  auto d = support::disassemble(support::fixture_elf("diamond"));
  auto vals = select(support::rows(d.result.db.at("reg_val")), [](const Row&) { return true; }, 6);
  c.expect(vals.count({"0x401009", "RAX", "0x401000", "RBX", "3", "0"}), "reg_val RAX = 3*RBX missing");
  std::set<Row> daps = {{"0x1000", "8", "24", "0x40100c"}, {"0x1008", "2", "24", "0x401014"}, {"0x1010", "1", "24", "0x40101d"}};
  c.expect(support::rows(d.result.db.at("data_access_pattern")) == daps, "struct-array DAPs differ");
}

struct Case {
  std::string program;
  std::vector<std::string> args;
};

std::vector<Case> read_cases() {
  std::vector<Case> out;
  std::ifstream in(support::corpus_source_dir() / "cases.tsv");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string x; std::getline(ls, x, '\t');) f.push_back(x);
    out.push_back({f[0], {f.begin() + 1, f.end()}});
  }
  return out;
}

int run_logged(const std::vector<std::string>& argv, std::string& out) { return support::run_process(argv, out); }

bool link(const emit::AsmProgram& p, const fs::path& asm_path, const fs::path& exe, Check& c, const std::string& where) {
  std::ofstream(asm_path) << support::print(p);
  std::vector<std::string> cmd = emit::link_command(p, asm_path.string(), exe.string());
  cmd[0] = RDIS_CC;
  std::string out;
  int rc = run_logged(cmd, out);
  c.expect(rc == 0, where + ": link failed");
  return rc == 0;
}

// Instruction addresses executed inside the binary's own executable
// sections, from valgrind's lackey tool.
std::set<Address> traced(const fs::path& exe, const std::vector<std::string>& args, const facts::FactBase& f,
                         const fs::path& log) {
  std::vector<std::string> cmd = {"valgrind", "--tool=lackey", "--trace-mem=yes", "--log-file=" + log.string(), exe.string()};
  cmd.insert(cmd.end(), args.begin(), args.end());
  std::string out;
  support::run_process(cmd, out);
  std::set<Address> seen;
  std::ifstream in(log);
  std::string line;
  while (std::getline(in, line)) {
    if (line.size() < 4 || line[0] != 'I') continue;
    Address a = std::stoull(line.substr(3, line.find(',') - 3), nullptr, 16);
    for (const facts::Section& s : f.sections)
      if (s.executable && a >= s.start && a < s.end()) seen.insert(a);
  }
  fs::remove(log);
  return seen;
}

void corpus_round_trip(Check& c, Check& trace) {
  fs::path work = RDIS_WORK_DIR;
  fs::create_directories(work);
  auto cases = read_cases();
  bool valgrind = support::run_process({"valgrind", "--version"}, trace.note) == 0;
  trace.note.clear();
  int runs = 0, diffs = 0, traced_insns = 0;
  for (const std::string& bin : support::corpus_binaries()) {
    auto d = support::disassemble(support::corpus_stripped(bin));
    fs::path plain = work / bin, stretched = work / (bin + "_stretched");
    bool ok = link(d.program, work / (bin + ".s"), plain, c, bin) &&
              link(emit::stretch(d.program), work / (bin + "_stretched.s"), stretched, c, bin + " stretched");
    std::string program = bin.substr(0, bin.rfind('_'));
    for (const Case& k : cases) {
      if (k.program != program || !ok) continue;
      std::string label = bin;
      for (const std::string& a : k.args) label += " '" + a + "'";
      std::string want, got;
      std::vector<std::string> argv = {support::corpus_stripped(bin).string()};
      argv.insert(argv.end(), k.args.begin(), k.args.end());
      int rc = support::run_process(argv, want);
      c.expect(rc >= 0, label + ": original did not exit normally");
      for (const fs::path& exe : {plain, stretched}) {
        argv[0] = exe.string();
        int rc2 = support::run_process(argv, got);
        c.expect(rc2 == rc && got == want, label + ": " + exe.filename().string() + " behaves differently (rc " +
                                               std::to_string(rc2) + " vs " + std::to_string(rc) + ")");
        ++runs;
      }
      if (valgrind) {
        for (Address a : traced(support::corpus_stripped(bin), k.args, d.result.facts, work / (bin + ".lackey"))) {
          ++traced_insns;
          trace.expect(d.result.layout.is_instruction(a) && d.result.layout.block_containing(a),
                       label + ": executed " + hexs(a) + " outside final blocks");
        }
      }
    }
    // Symbolization against link-time relocations.
    fs::path report = work / (bin + ".report");
    {
      std::ofstream f(report);
      symbolization::write_report(f, d.result.symbols);
      cli::write_report_sections(f, d.result.facts.sections);
    }
    std::ostringstream out, err;
    int rc = cli::cmd_diff(report.string(), support::corpus_twin(bin).string(), "", out, err);
    std::string summary = out.str().substr(0, out.str().find('\n'));
    c.expect(rc == 0 && summary == "FP=0 FN=0 WS=0", bin + ": diff " + summary + err.str());
    ++diffs;
  }
  c.note = std::to_string(runs) + " rewritten runs, " + std::to_string(diffs) + " diffs";
  if (valgrind)
    trace.note = std::to_string(traced_insns) + " executed instructions";
  else
    trace.failures.push_back("valgrind unavailable");
}

std::string dump_all(const relfix::Database& db) {
  std::ostringstream s;
  for (const std::string& name : db.names()) {
    s << "== " << name << '\n';
    relfix::write_relation(s, db.at(name));
  }
  return s.str();
}

void engine(Check& c) {
  auto summary = support::check_random_programs(20260101, 100);
  c.expect(summary.checked == 100, "only " + std::to_string(summary.checked) + " programs checked");
  c.expect(summary.mismatches == 0, std::to_string(summary.mismatches) + " mismatches: " + summary.first_mismatch);
  relfix::Program p;
  auto pr = p.relation("p", {relfix::ColumnKind::number});
  auto qr = p.relation("q", {relfix::ColumnKind::number});
  relfix::Var X("X"), Y("Y");
  p.rule("p-neg", pr(X), {!qr(X)});
  p.rule("q-neg", qr(Y), {!pr(Y)});
  bool rejected = false;
  try {
    relfix::stratify(p);
  } catch (const relfix::Error& e) {
    rejected = e.kind() == relfix::ErrorKind::negation_cycle;
  }
  c.expect(rejected, "p/!q, q/!p cycle accepted");
  for (const fs::path& elf : {support::fixture_elf("tar_jt"), support::corpus_stripped("vm_O1")}) {
    pipeline::PipelineConfig one, four;
    four.jobs = 4;
    auto a = support::disassemble(elf, one), b = support::disassemble(elf, four);
    c.expect(dump_all(a.result.db) == dump_all(b.result.db), elf.filename().string() + ": jobs 1 and 4 differ");
  }
  c.note = std::to_string(summary.checked) + " random programs";
}

void structural(Check& c) {
  int n = 0;
  for (const std::string& name : support::kFixtures) {
    c.absorb(support::structural_violations(support::disassemble(support::fixture_elf(name))), name);
    ++n;
  }
  for (const std::string& bin : support::corpus_binaries()) {
    c.absorb(support::structural_violations(support::disassemble(support::corpus_stripped(bin))), bin);
    ++n;
  }
  c.note = std::to_string(n) + " binaries";
}

void known_misses(Check& c) {
  using Context = symbolization::Context;
  auto eh = support::disassemble(support::fixture_elf("eh_boundary"));
  const auto* x = eh.result.symbols.find(0x401007, 1, Context::displacement);
  c.expect(x && !x->expr.symbolic() && x->expr.value == 0x402040, "eh_boundary: reference is no longer a literal 0x402040");
  auto nl = support::disassemble(support::fixture_elf("nested_loop"));
  const auto* start = nl.result.symbols.find(0x401000, 1, Context::immediate);
  c.expect(start && start->expr.symbolic(), "nested_loop: loop start not symbolic");
  const auto* bound = nl.result.symbols.find(0x401005, 1, Context::immediate);
  c.expect(!bound || !bound->expr.symbolic(), "nested_loop: bound now symbolized");
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"1 worked example (def-use, reg_val, access patterns)", worked_example},
      {"2 symbol-symbol jump table", jump_table},
      {"3 symbol plus constant", symbol_plus_constant},
      {"4 diamond and struct array", diamond},
  };
  bool all = true;
  auto report = [&](const std::string& name, Check& c) {
    bool pass = c.failures.empty();
    all &= pass;
    std::cout << (pass ? "PASS " : "FAIL ") << name;
    if (!c.note.empty()) std::cout << " (" << c.note << ")";
    std::cout << '\n';
    for (std::size_t i = 0; i < c.failures.size() && i < 20; ++i) std::cout << "    " << c.failures[i] << '\n';
    if (c.failures.size() > 20) std::cout << "    ... " << c.failures.size() - 20 << " more\n";
    std::cout.flush();
  };
  auto guarded = [&](const std::string& name, const std::function<void(Check&)>& fn, Check& c) {
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    report(name, c);
  };
  for (const auto& [name, fn] : criteria) {
    Check c;
    guarded(name, fn, c);
  }
  Check round, trace;
  try {
    corpus_round_trip(round, trace);
  } catch (const std::exception& e) {
    round.failures.push_back(std::string("exception: ") + e.what());
  }
  report("5 corpus round trip (stretch, relink, tests, diff all zero)", round);
  Check e;
  guarded("6 engine properties", engine, e);
  Check s;
  guarded("7 structural invariants", structural, s);
  report("7 executed instructions lie in final blocks", trace);
  Check k;
  guarded("8 known misses unchanged", known_misses, k);
  std::cout << (all ? "ALL PASS" : "SOME FAILED") << '\n';
  return all ? 0 : 1;
}
