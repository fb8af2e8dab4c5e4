#include "support.hpp"

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>

#include "rdis/elf/elf_image.hpp"
#include "rdis/elf/extract.hpp"
#include "rdis/relfix/text_io.hpp"

namespace rdis::support {

using facts::Address;
using relfix::Tuple;
using relfix::Value;

std::filesystem::path fixture_dir() { return std::filesystem::path(RDIS_SOURCE_DIR) / "tests" / "fixtures"; }
std::filesystem::path fixture_elf(const std::string& name) { return fixture_dir() / name / (name + ".elf"); }
std::filesystem::path corpus_source_dir() { return std::filesystem::path(RDIS_SOURCE_DIR) / "corpus"; }
std::filesystem::path corpus_build_dir() { return std::filesystem::path(RDIS_BINARY_DIR) / "corpus"; }
std::filesystem::path rdis_executable() { return RDIS_EXE; }

std::vector<std::string> corpus_binaries() {
  std::vector<std::string> programs;
  for (const auto& e : std::filesystem::directory_iterator(corpus_source_dir()))
    if (e.path().extension() == ".c") programs.push_back(e.path().stem().string());
  std::sort(programs.begin(), programs.end());
  std::vector<std::string> out;
  for (const std::string& p : programs)
    for (const char* level : {"_O0", "_O1"}) out.push_back(p + level);
  return out;
}

std::filesystem::path corpus_stripped(const std::string& binary) { return corpus_build_dir() / binary; }
std::filesystem::path corpus_twin(const std::string& binary) { return corpus_build_dir() / (binary + ".twin"); }

std::set<Row> rows(const relfix::Relation& rel) {
  std::set<Row> out;
  for (const Tuple& t : rel.sorted_rows()) {
    Row r;
    for (std::size_t c = 0; c < t.size(); ++c) r.push_back(relfix::format_value(rel.schema()[c], t[c]));
    out.insert(std::move(r));
  }
  return out;
}

std::set<Row> read_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::set<Row> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    Row r;
    std::istringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) r.push_back(field);
    out.insert(std::move(r));
  }
  return out;
}

Disassembly disassemble(facts::FactBase facts, const pipeline::PipelineConfig& config) {
  Disassembly d{pipeline::run(std::move(facts), config), {}};
  d.program = emit::build_asm(d.result.facts, d.result.layout, d.result.symbols);
  return d;
}

Disassembly disassemble(const std::filesystem::path& elf, const pipeline::PipelineConfig& config) {
  elf::ElfImage image = elf::load_elf(elf);
  return disassemble(elf::extract_facts(image, {config.jobs, elf.filename().string()}), config);
}

std::string print(const emit::AsmProgram& program) {
  std::ostringstream out;
  emit::print_asm(out, program);
  return out.str();
}

namespace {

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << "0x" << std::hex << v;
  return s.str();
}

std::set<std::pair<Value, Value>> pairs(const relfix::Database& db, const char* name) {
  std::set<std::pair<Value, Value>> out;
  for (const Tuple& t : db.at(name).sorted_rows()) out.insert({t[0], t[1]});
  return out;
}

std::uint64_t read_le(const std::map<Address, std::uint8_t>& bytes, Address a, int size, bool& ok) {
  std::uint64_t v = 0;
  ok = true;
  for (int i = 0; i < size; ++i) {
    auto it = bytes.find(a + static_cast<Address>(i));
    if (it == bytes.end()) {
      ok = false;
      return 0;
    }
    v |= static_cast<std::uint64_t>(it->second) << (8 * i);
  }
  return v;
}

std::uint64_t truncate(std::uint64_t v, int size) { return size >= 8 ? v : v & ((std::uint64_t{1} << (8 * size)) - 1); }

const facts::Section* section_of(const facts::FactBase& f, Address a) { return f.section_at(a); }

}  // namespace

std::vector<std::string> must_within_may(const relfix::Database& db) {
  std::vector<std::string> out;
  auto may = pairs(db, "may_fallthrough");
  for (const auto& [a, b] : pairs(db, "must_fallthrough"))
    if (!may.count({a, b})) out.push_back("must_fallthrough " + hex(static_cast<Address>(a)) + " not in may_fallthrough");
  return out;
}

std::vector<std::string> invalid_closure(const facts::FactBase& facts, const relfix::Database& db) {
  std::set<Address> insn;
  for (const facts::Instruction& i : facts.instructions) insn.insert(i.addr);
  std::multimap<Address, Address> reverse;
  std::set<Address> bad(facts.invalid.begin(), facts.invalid.end());
  for (const char* rel : {"must_fallthrough", "direct_jump", "direct_call", "pc_relative_jump", "pc_relative_call"})
    for (const auto& [from, to] : pairs(db, rel)) {
      reverse.emplace(static_cast<Address>(to), static_cast<Address>(from));
      if (!insn.count(static_cast<Address>(to))) bad.insert(static_cast<Address>(from));
    }
  std::vector<Address> work(bad.begin(), bad.end());
  while (!work.empty()) {
    Address a = work.back();
    work.pop_back();
    auto [lo, hi] = reverse.equal_range(a);
    for (auto it = lo; it != hi; ++it)
      if (bad.insert(it->second).second) work.push_back(it->second);
  }
  std::set<Address> derived;
  for (const Tuple& t : db.at("invalid").sorted_rows()) derived.insert(static_cast<Address>(t[0]));
  std::vector<std::string> out;
  for (Address a : bad)
    if (!derived.count(a)) out.push_back("oracle-invalid " + hex(a) + " not derived");
  for (Address a : derived)
    if (!bad.count(a)) out.push_back("derived invalid " + hex(a) + " not reached by oracle");
  return out;
}

std::vector<std::string> block_tiling(const facts::FactBase& facts, const ibi::CodeLayout& layout) {
  std::vector<std::pair<Address, Address>> spans;
  for (const ibi::Block& b : layout.blocks) spans.emplace_back(b.start, b.end);
  for (const auto& r : layout.data_regions) spans.push_back(r);
  std::sort(spans.begin(), spans.end());
  std::vector<std::string> out;
  for (const facts::Section& s : facts.sections) {
    if (!s.executable || !s.length) continue;
    Address at = s.start;
    for (const auto& [lo, hi] : spans) {
      if (hi <= s.start || lo >= s.end()) continue;
      if (lo != at) out.push_back(s.name + ": " + (lo < at ? "overlap" : "gap") + " at " + hex(std::min(lo, at)));
      if (hi <= lo) out.push_back(s.name + ": empty span at " + hex(lo));
      at = std::max(at, hi);
    }
    if (at != s.end()) out.push_back(s.name + ": tiling ends at " + hex(at) + " not " + hex(s.end()));
  }
  return out;
}

std::vector<std::string> objects_disjoint(const facts::FactBase& facts, const symbolization::Symbolization& s) {
  std::vector<std::string> out;
  Address end = 0;
  for (const symbolization::DataObject& o : s.objects) {
    if (o.addr < end) out.push_back("object " + hex(o.addr) + " overlaps its predecessor");
    end = std::max(end, o.addr + static_cast<Address>(o.size));
    const facts::Section* sec = section_of(facts, o.addr);
    if (!sec || o.addr + static_cast<Address>(o.size) > sec->end())
      out.push_back("object " + hex(o.addr) + " is not inside one section");
  }
  return out;
}

std::vector<std::string> label_bijection(const emit::AsmProgram& program) {
  std::vector<std::string> out;
  std::set<std::string> defined = emit::defined_labels(program);
  std::set<std::string> referenced = emit::referenced_labels(program);
  for (const std::string& l : referenced)
    if (!defined.count(l)) out.push_back("label " + l + " referenced but not defined");
  for (const std::string& l : defined)
    if (!referenced.count(l)) out.push_back("label " + l + " defined but not referenced");
  std::map<std::string, int> count;
  for (const emit::AsmSection& s : program.sections)
    for (const emit::AsmItem& it : s.items)
      if (it.kind == emit::ItemKind::label && ++count[it.text] == 2) out.push_back("label " + it.text + " defined twice");
  return out;
}

std::vector<std::string> expressions_reevaluate(const facts::FactBase& facts, const symbolization::Symbolization& s) {
  using symbolization::Context;
  using Kind = symbolization::SymbolicExpr::Kind;
  std::map<Address, std::uint8_t> bytes(facts.data_bytes.begin(), facts.data_bytes.end());
  std::map<Address, const facts::Instruction*> insns;
  for (const facts::Instruction& i : facts.instructions) insns[i.addr] = &i;
  facts::OperandTable ops(facts);
  std::map<Address, const symbolization::DataObject*> objects;
  for (const auto& o : s.objects) objects[o.addr] = &o;

  std::vector<std::string> out;
  for (const symbolization::Decision& d : s.decisions) {
    std::string where = hex(d.addr) + "/" + std::to_string(d.operand);
    const symbolization::SymbolicExpr& e = d.expr;
    // Original raw value at the location.
    std::optional<std::uint64_t> raw;
    int size = 8;
    if (d.context == Context::data) {
      auto o = objects.find(d.addr);
      if (o != objects.end() && o->second->kind == symbolization::CandidateKind::symbol_symbol)
        size = static_cast<int>(o->second->size);
      bool ok = false;
      std::uint64_t v = read_le(bytes, d.addr, size, ok);
      if (ok) raw = v;
    } else {
      auto it = insns.find(d.addr);
      if (it != insns.end() && d.operand >= 1 && d.operand <= 4) {
        facts::OperandId id = it->second->ops[d.operand - 1];
        if (const facts::Immediate* imm = ops.imm(id); imm && d.context == Context::immediate)
          raw = static_cast<std::uint64_t>(imm->value);
        if (const facts::Indirect* mem = ops.mem(id); mem && d.context == Context::displacement)
          raw = static_cast<std::uint64_t>(mem->disp);
      }
    }
    if (!raw) {
      out.push_back(where + ": no raw value at the location");
      continue;
    }
    if (truncate(static_cast<std::uint64_t>(e.value), size) != truncate(*raw, size))
      out.push_back(where + ": expression value " + std::to_string(e.value) + " differs from the raw value");
    if (e.kind == Kind::sym_plus && e.target + static_cast<std::uint64_t>(e.offset) != static_cast<std::uint64_t>(e.value))
      out.push_back(where + ": anchor + offset does not re-evaluate to the raw value");
    if (e.kind == Kind::sym_minus_sym && truncate(e.target - e.reference, size) != truncate(*raw, size))
      out.push_back(where + ": target - reference differs from the stored entry");
  }
  return out;
}

std::vector<std::string> report_complete(const facts::FactBase& facts, const symbolization::Symbolization& s,
                                         const relfix::Database& db) {
  using symbolization::Context;
  std::set<std::tuple<Address, int, Context>> expected;
  for (const auto& [a, v] : facts.address_in_data) expected.insert({a, 0, Context::data});
  for (const auto& o : s.objects)
    if (o.kind == symbolization::CandidateKind::symbol || o.kind == symbolization::CandidateKind::symbol_symbol)
      expected.insert({o.addr, 0, Context::data});
  for (const Tuple& t : db.at("code_number").sorted_rows())
    if (relfix::text_of(t[2]) == "immediate") expected.insert({static_cast<Address>(t[0]), static_cast<int>(t[1]), Context::immediate});
  for (const Tuple& t : db.at("repaired_immediate").sorted_rows())
    expected.insert({static_cast<Address>(t[0]), static_cast<int>(t[1]), Context::immediate});
  std::set<std::pair<Address, int>> repaired;
  for (const Tuple& t : db.at("repaired_displacement").sorted_rows())
    repaired.insert({static_cast<Address>(t[0]), static_cast<int>(t[1])});
  for (const Tuple& t : db.at("code_displacement").sorted_rows()) {
    Address disp = static_cast<Address>(t[5]);
    bool in_range = false;
    for (const facts::Section& sec : facts.sections)
      if (sec.start && disp >= sec.start && disp <= sec.end()) in_range = true;
    auto key = std::make_pair(static_cast<Address>(t[0]), static_cast<int>(t[1]));
    if (relfix::text_of(t[2]) == "RIP" || in_range || repaired.count(key))
      expected.insert({key.first, key.second, Context::displacement});
  }
  std::set<std::tuple<Address, int, Context>> got;
  for (const auto& d : s.decisions) got.insert({d.addr, d.operand, d.context});
  std::vector<std::string> out;
  if (got.size() != s.decisions.size()) out.push_back("duplicate decision keys");
  for (const auto& k : expected)
    if (!got.count(k)) out.push_back("no decision for " + hex(std::get<0>(k)) + "/" + std::to_string(std::get<1>(k)));
  for (const auto& k : got)
    if (!expected.count(k)) out.push_back("unexpected decision " + hex(std::get<0>(k)) + "/" + std::to_string(std::get<1>(k)));
  return out;
}

std::vector<std::string> dap_unique(const relfix::Database& db) {
  std::map<std::pair<Value, Value>, Value> best;
  for (const Tuple& t : db.at("dap_candidate").sorted_rows()) {
    auto [it, fresh] = best.emplace(std::make_pair(t[0], t[3]), t[2]);
    if (!fresh) it->second = std::max(it->second, t[2]);
  }
  std::map<std::pair<Value, Value>, int> count;
  std::vector<std::string> out;
  for (const Tuple& t : db.at("data_access_pattern").sorted_rows()) {
    auto key = std::make_pair(t[0], t[3]);
    if (++count[key] == 2) out.push_back("several patterns at " + hex(static_cast<Address>(t[0])));
    if (best[key] != t[2]) out.push_back("pattern at " + hex(static_cast<Address>(t[0])) + " keeps a non-maximal multiplier");
  }
  return out;
}

std::vector<std::string> propagation_bounded(const facts::FactBase& facts, const relfix::Database& db) {
  std::set<Address> dap_addrs;
  for (const Tuple& t : db.at("data_access_pattern").sorted_rows()) dap_addrs.insert(static_cast<Address>(t[0]));
  std::vector<std::string> out;
  for (const Tuple& t : db.at("propagation").sorted_rows()) {
    Address origin = static_cast<Address>(t[0]), at = static_cast<Address>(t[1]);
    const facts::Section* s = section_of(facts, origin);
    if (!s || at < s->start || at + static_cast<Address>(t[2]) > s->end())
      out.push_back("propagation to " + hex(at) + " leaves the section of " + hex(origin));
    auto next = dap_addrs.upper_bound(origin);
    if (next != dap_addrs.end() && at >= *next)
      out.push_back("propagation to " + hex(at) + " reaches the next pattern " + hex(*next));
  }
  return out;
}

std::vector<std::string> structural_violations(const Disassembly& d) {
  const auto& r = d.result;
  std::vector<std::string> out;
  auto add = [&](const char* what, std::vector<std::string> v) {
    for (std::string& m : v) out.push_back(std::string(what) + ": " + m);
  };
  add("must-within-may", must_within_may(r.db));
  add("invalid-closure", invalid_closure(r.facts, r.db));
  add("tiling", block_tiling(r.facts, r.layout));
  add("objects", objects_disjoint(r.facts, r.symbols));
  add("labels", label_bijection(d.program));
  add("re-evaluation", expressions_reevaluate(r.facts, r.symbols));
  add("report", report_complete(r.facts, r.symbols, r.db));
  add("dap", dap_unique(r.db));
  add("propagation", propagation_bounded(r.facts, r.db));
  return out;
}

int run_process(const std::vector<std::string>& argv, std::string& output) {
  output.clear();
  int fds[2];
  if (pipe(fds) != 0) return -1;
  pid_t pid = fork();
  if (pid < 0) return -1;
  if (pid == 0) {
    dup2(fds[1], STDOUT_FILENO);
    int null = open("/dev/null", O_RDWR);
    dup2(null, STDERR_FILENO);
    dup2(null, STDIN_FILENO);
    close(fds[0]);
    close(fds[1]);
    std::vector<char*> args;
    for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }
  close(fds[1]);
  char buf[4096];
  ssize_t n;
  while ((n = read(fds[0], buf, sizeof buf)) > 0) output.append(buf, static_cast<std::size_t>(n));
  close(fds[0]);
  int status = 0;
  if (waitpid(pid, &status, 0) < 0) return -1;
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -1;
}

}  // namespace rdis::support
