#include <gtest/gtest.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "rdis/emit/emit.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace rdis;
using emit::AsmItem;
using emit::AsmProgram;
using emit::AsmSection;
using emit::ItemKind;
using facts::Address;
using Context = symbolization::Context;

namespace {

std::string upper_hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::uppercase << std::hex << v;
  return s.str();
}

std::string signed_hex(std::int64_t v) {
  if (v < 0) return "-0x" + upper_hex(0 - static_cast<std::uint64_t>(v));
  return "0x" + upper_hex(static_cast<std::uint64_t>(v));
}

AsmItem insn(Address a, bool block_start = false) {
  AsmItem it;
  it.kind = ItemKind::instruction;
  it.addr = a;
  it.text = "inc";
  it.args = {"RAX"};
  it.block_start = block_start;
  return it;
}

AsmProgram straight_line(int n) {
  AsmProgram p;
  AsmSection text{".text", "ax", "@progbits", 0x1000, static_cast<std::uint64_t>(3 * n), 1, {}};
  for (int i = 0; i < n; ++i) text.items.push_back(insn(0x1000 + 3 * static_cast<Address>(i), i == 0));
  p.sections.push_back(text);
  return p;
}

int count_nops(const AsmSection& s) {
  return static_cast<int>(std::count_if(s.items.begin(), s.items.end(),
                                        [](const AsmItem& it) { return it.kind == ItemKind::instruction && it.addr == 0 && it.text == "nop"; }));
}

std::multiset<std::string> ref_multiset(const AsmProgram& p) {
  std::multiset<std::string> out;
  for (const AsmSection& s : p.sections)
    for (const AsmItem& it : s.items)
      for (const emit::LabelRef& r : it.refs) out.insert(r.render());
  return out;
}

const AsmItem* item_at(const AsmProgram& p, Address a, ItemKind kind) {
  for (const AsmSection& s : p.sections)
    for (const AsmItem& it : s.items)
      if (it.addr == a && it.kind == kind) return &it;
  return nullptr;
}

// Literal immediates print as their value and literal displacements keep
// their magnitude in the operand text.
std::vector<std::string> literals_preserved(const support::Disassembly& d) {
  std::vector<std::string> bad;
  for (const symbolization::Decision& x : d.result.symbols.decisions) {
    if (x.expr.symbolic() || x.context == Context::data) continue;
    const AsmItem* it = item_at(d.program, x.addr, ItemKind::instruction);
    if (!it) continue;  // raw bytes keep every literal
    bool ok = false;
    if (x.context == Context::immediate) {
      for (const std::string& a : it->args)
        ok |= a == signed_hex(x.expr.value) || a == "0x" + upper_hex(static_cast<std::uint64_t>(x.expr.value));
    } else {
      std::uint64_t mag = x.expr.value < 0 ? 0 - static_cast<std::uint64_t>(x.expr.value) : static_cast<std::uint64_t>(x.expr.value);
      for (const std::string& a : it->args) ok |= a.find("0x" + upper_hex(mag)) != std::string::npos;
      ok |= mag == 0;
    }
    if (!ok) {
      std::ostringstream s;
      s << "literal at 0x" << std::hex << x.addr << '/' << x.operand << " lost: " << it->text;
      for (const std::string& a : it->args) s << ' ' << a;
      bad.push_back(s.str());
    }
  }
  return bad;
}

std::vector<fs::path> fixtures_and_corpus_sample() {
  std::vector<fs::path> out;
  for (const std::string& name : support::kFixtures) out.push_back(support::fixture_elf(name));
  for (const std::string& bin : {"dispatch_O1", "records_O0", "strings_O1", "vm_O0"}) out.push_back(support::corpus_stripped(bin));
  return out;
}

}  // namespace

TEST(Emit, TarJumpTableEntryIsLabelDifference) {
  auto d = support::disassemble(support::fixture_elf("tar_jt"));
  EXPECT_NE(support::print(d.program).find("  .byte .L_47DB3F-.L_47DA93\n"), std::string::npos);
}

TEST(Emit, ConflictBoundIsLabelPlusConstant) {
  auto d = support::disassemble(support::fixture_elf("conflict"));
  EXPECT_NE(support::print(d.program).find("  mov EBP,OFFSET .L_402D40+168\n"), std::string::npos);
}

TEST(Emit, StretchPadsDataSections) {
  AsmProgram p;
  AsmSection data{".data", "aw", "@progbits", 0x2000, 64, 8, {}};
  AsmItem zero;
  zero.kind = ItemKind::zero;
  zero.addr = 0x2000;
  zero.count = 64;
  data.items.push_back(zero);
  p.sections.push_back(data);
  AsmSection init{".init_array", "aw", "@init_array", 0x3000, 0, 8, {}};
  p.sections.push_back(init);
  AsmProgram s = emit::stretch(p);
  ASSERT_EQ(s.sections[0].items.size(), 2u);
  EXPECT_EQ(s.sections[0].items[0].kind, ItemKind::zero);
  EXPECT_EQ(s.sections[0].items[0].count, 64);
  EXPECT_TRUE(s.sections[1].items.empty());
  std::string text = support::print(s);
  EXPECT_NE(text.find("  .zero 64\n"), std::string::npos);
}

TEST(Emit, StretchInsertsNopGroupsEveryEighthInstruction) {
  AsmProgram s = emit::stretch(straight_line(16));
  EXPECT_EQ(s.sections[0].items.size(), 32u);
  EXPECT_EQ(count_nops(s.sections[0]), 16);
  // Groups follow instructions 8 and 16.
  EXPECT_EQ(s.sections[0].items[8].text, "nop");
  EXPECT_EQ(s.sections[0].items[7].addr, 0x1000u + 3 * 7);
  EXPECT_EQ(s.sections[0].items[16].addr, 0x1000u + 3 * 8);
}

TEST(Emit, StretchCounterRestartsAtBlockStart) {
  AsmProgram p = straight_line(12);
  p.sections[0].items[6].block_start = true;
  AsmProgram s = emit::stretch(p);
  // 6 + 6 instructions: neither run reaches 8.
  EXPECT_EQ(count_nops(s.sections[0]), 0);
}

TEST(Emit, StretchSkipsProtectedSpans) {
  AsmProgram p = straight_line(16);
  p.no_stretch.emplace_back(0x1000 + 3 * 7, 0x1000 + 3 * 8);
  AsmProgram s = emit::stretch(p);
  EXPECT_EQ(count_nops(s.sections[0]), 8);
  for (std::size_t i = 0; i + 1 < s.sections[0].items.size(); ++i) {
    const AsmItem& it = s.sections[0].items[i];
    if (it.addr >= 0x1000 + 3 * 7 && it.addr < 0x1000 + 3 * 8) EXPECT_NE(s.sections[0].items[i + 1].text, "nop");
  }
}

TEST(Emit, StretchPreservesReferencesAndLabels) {
  for (const fs::path& path : fixtures_and_corpus_sample()) {
    auto d = support::disassemble(path);
    AsmProgram s = emit::stretch(d.program);
    EXPECT_EQ(ref_multiset(s), ref_multiset(d.program)) << path;
    EXPECT_EQ(emit::defined_labels(s), emit::defined_labels(d.program)) << path;
    EXPECT_NO_THROW(emit::check_labels(s)) << path;
    EXPECT_EQ(support::label_bijection(s), std::vector<std::string>{}) << path;
    // Nothing lands inside a protected span.
    for (const AsmSection& sec : s.sections)
      for (std::size_t i = 0; i + 1 < sec.items.size(); ++i) {
        Address a = sec.items[i].addr;
        bool prot = false;
        for (const auto& [lo, hi] : s.no_stretch) prot |= a != 0 && a >= lo && a < hi;
        if (prot && sec.items[i + 1].addr == 0) {
          ADD_FAILURE() << path << ": nop after 0x" << std::hex << a;
        }
      }
  }
}

TEST(Emit, LabelsAreBijective) {
  for (const fs::path& path : fixtures_and_corpus_sample()) {
    auto d = support::disassemble(path);
    EXPECT_EQ(support::label_bijection(d.program), std::vector<std::string>{}) << path;
  }
}

TEST(Emit, UndefinedReferenceIsUnresolvedLabel) {
  AsmProgram p = straight_line(1);
  p.sections[0].items[0].refs.push_back({".L_DEAD", 0, {}});
  try {
    emit::check_labels(p);
    FAIL() << "expected UnresolvedLabel";
  } catch (const emit::UnresolvedLabel& e) {
    EXPECT_EQ(e.label(), ".L_DEAD");
  }
}

TEST(Emit, LiteralsArePreserved) {
  for (const fs::path& path : fixtures_and_corpus_sample()) {
    auto d = support::disassemble(path);
    EXPECT_EQ(literals_preserved(d), std::vector<std::string>{}) << path;
  }
}

TEST(Emit, AsmDbRoundTrip) {
  for (const fs::path& path : fixtures_and_corpus_sample()) {
    auto d = support::disassemble(path);
    for (const AsmProgram& p : {d.program, emit::stretch(d.program)}) {
      std::stringstream s;
      emit::write_asm_db(s, p);
      AsmProgram back = emit::read_asm_db(s);
      EXPECT_TRUE(back == p) << path;
      EXPECT_EQ(support::print(back), support::print(p)) << path;
    }
  }
}

TEST(Emit, StretchedFixturesAssemble) {
  fs::path dir = fs::temp_directory_path() / ("rdis_emit_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  for (const std::string& name : support::kFixtures) {
    auto d = support::disassemble(support::fixture_elf(name));
    for (const auto& [tag, p] : std::map<std::string, AsmProgram>{{"plain", d.program}, {"stretched", emit::stretch(d.program)}}) {
      fs::path s = dir / (name + "_" + tag + ".s"), o = dir / (name + "_" + tag + ".o");
      std::ofstream(s) << support::print(p);
      std::string out;
      EXPECT_EQ(support::run_process({"as", "--64", "-o", o.string(), s.string()}, out), 0) << s;
    }
  }
  fs::remove_all(dir);
}
