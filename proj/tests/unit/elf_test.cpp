#include <elf.h>
#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rdis/elf/decoder.hpp"
#include "rdis/elf/elf_image.hpp"
#include "rdis/elf/extract.hpp"
#include "support.hpp"

using namespace rdis;
using elf::Address;

namespace {

// ELF64 with a one-byte .text (ret) at 0x401000 and a section name table.
std::vector<std::uint8_t> minimal_elf() {
  const char names[] = "\0.text\0.shstrtab\0";
  std::vector<std::uint8_t> file(0x40, 0);
  Elf64_Ehdr eh{};
  std::memcpy(eh.e_ident, ELFMAG, SELFMAG);
  eh.e_ident[EI_CLASS] = ELFCLASS64;
  eh.e_ident[EI_DATA] = ELFDATA2LSB;
  eh.e_ident[EI_VERSION] = EV_CURRENT;
  eh.e_type = ET_EXEC;
  eh.e_machine = EM_X86_64;
  eh.e_version = EV_CURRENT;
  eh.e_entry = 0x401000;
  eh.e_ehsize = sizeof(Elf64_Ehdr);
  eh.e_shentsize = sizeof(Elf64_Shdr);
  eh.e_shnum = 3;
  eh.e_shstrndx = 2;
  std::size_t text_off = file.size();
  file.push_back(0xC3);
  std::size_t names_off = file.size();
  file.insert(file.end(), names, names + sizeof names);
  while (file.size() % 8) file.push_back(0);
  eh.e_shoff = file.size();
  Elf64_Shdr sh[3]{};
  sh[1].sh_name = 1;
  sh[1].sh_type = SHT_PROGBITS;
  sh[1].sh_flags = SHF_ALLOC | SHF_EXECINSTR;
  sh[1].sh_addr = 0x401000;
  sh[1].sh_offset = text_off;
  sh[1].sh_size = 1;
  sh[2].sh_name = 7;
  sh[2].sh_type = SHT_STRTAB;
  sh[2].sh_offset = names_off;
  sh[2].sh_size = sizeof names;
  auto* shp = reinterpret_cast<const std::uint8_t*>(sh);
  file.insert(file.end(), shp, shp + sizeof sh);
  std::memcpy(file.data(), &eh, sizeof eh);
  return file;
}

elf::ElfImage image_with(std::vector<elf::ElfSection> sections) {
  elf::ElfImage img;
  img.sections.emplace_back();  // index 0
  for (auto& s : sections) img.sections.push_back(std::move(s));
  return img;
}

elf::ElfSection section(const std::string& name, Address addr, std::vector<std::uint8_t> bytes, bool exec) {
  elf::ElfSection s;
  s.name = name;
  s.type = SHT_PROGBITS;
  s.flags = SHF_ALLOC | (exec ? SHF_EXECINSTR : 0);
  s.addr = addr;
  s.size = bytes.size();
  s.bytes = std::move(bytes);
  return s;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

}  // namespace

TEST(Elf, MinimalImageHasOneExecutableSection) {
  elf::ElfImage img = elf::parse_elf(minimal_elf());
  int exec = 0;
  for (const auto& s : img.sections) exec += s.alloc() && s.exec();
  EXPECT_EQ(exec, 1);
  ASSERT_NE(img.section_named(".text"), nullptr);
  EXPECT_EQ(img.entry, img.section_named(".text")->addr);
  facts::FactBase f = elf::extract_facts(img);
  ASSERT_EQ(f.instructions.size(), 1u);
  EXPECT_EQ(f.instructions[0].opcode, "ret");
  EXPECT_EQ(f.entry_points, std::vector<Address>{0x401000});
}

TEST(Elf, ThirtyTwoBitIsUnsupportedClass) {
  auto file = minimal_elf();
  file[EI_CLASS] = ELFCLASS32;
  try {
    elf::parse_elf(file);
    FAIL();
  } catch (const elf::ElfError& e) {
    EXPECT_EQ(e.kind(), elf::ElfErrorKind::unsupported_class);
    EXPECT_EQ(elf::error_kind_name(e.kind()), "UnsupportedClass");
  }
}

TEST(Elf, BadMagicAndTruncation) {
  std::vector<std::uint8_t> junk(100, 0x41);
  try {
    elf::parse_elf(junk);
    FAIL();
  } catch (const elf::ElfError& e) {
    EXPECT_EQ(e.kind(), elf::ElfErrorKind::bad_magic);
  }
  auto file = minimal_elf();
  file.resize(0x30);
  try {
    elf::parse_elf(file);
    FAIL();
  } catch (const elf::ElfError& e) {
    EXPECT_EQ(e.kind(), elf::ElfErrorKind::truncated);
    EXPECT_EQ(elf::error_kind_name(e.kind()), "MalformedHeader");
  }
}

TEST(Elf, RetDecodes) {
  std::uint8_t b[] = {0xC3};
  auto d = elf::decode(b, 0x1000);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->length, 1);
  EXPECT_EQ(d->mnemonic, "ret");
  EXPECT_TRUE(d->operands.empty());
}

TEST(Elf, MovFromBaseDisplacementShape) {
  // mov rsi, qword ptr [rbx+0x45d328]
  std::uint8_t b[] = {0x48, 0x8B, 0xB3, 0x28, 0xD3, 0x45, 0x00};
  auto d = elf::decode(b, 0x416C47);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->length, 7);
  EXPECT_EQ(d->mnemonic, "mov");
  ASSERT_EQ(d->operands.size(), 2u);
  const elf::Operand& src = d->operands[1];
  ASSERT_EQ(src.kind, elf::OperandKind::mem);
  EXPECT_EQ(src.mem.base, "RBX");
  EXPECT_EQ(src.mem.index, "NONE");
  EXPECT_EQ(src.mem.scale, 1);
  EXPECT_EQ(src.mem.disp, 0x45D328);
  EXPECT_EQ(src.mem.size, 8);
  EXPECT_EQ(d->disp_offset, 3);
}

TEST(Elf, RipRelativeDisplacementIsAbsolute) {
  // mov rax, qword ptr [rip+0x10] at 0x1000: target 0x1000 + 7 + 0x10
  std::uint8_t b[] = {0x48, 0x8B, 0x05, 0x10, 0x00, 0x00, 0x00};
  auto d = elf::decode(b, 0x1000);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->operands[1].mem.base, "RIP");
  EXPECT_EQ(d->operands[1].mem.disp, 0x1017);
}

TEST(Elf, TruncatedTailIsInvalidAtBothAddresses) {
  elf::ElfImage img = image_with({section(".text", 0x1000, {0xC3, 0xFF, 0xFF}, true)});
  facts::FactBase f = elf::extract_facts(img);
  EXPECT_EQ(f.instructions.size(), 1u);
  EXPECT_EQ(f.invalid, (std::vector<Address>{0x1001, 0x1002}));
}

TEST(Elf, ScanFindsAddressOnlyWhenSomeSectionCoversIt) {
  std::vector<std::uint8_t> word = {0x00, 0x10, 0x40, 0, 0, 0, 0, 0};
  elf::ElfImage with = image_with({section(".text", 0x401000, {0xC3}, true), section(".data", 0x402000, word, false)});
  EXPECT_EQ(elf::scan_data_serial(with), (std::vector<std::pair<Address, Address>>{{0x402000, 0x401000}}));
  elf::ElfImage without = image_with({section(".text", 0x401800, {0xC3}, true), section(".data", 0x402000, word, false)});
  EXPECT_TRUE(elf::scan_data_serial(without).empty());
}

TEST(Elf, SharedObjectExportsBecomeEntryPoints) {
  std::string out;
  auto dir = support::corpus_build_dir();
  std::string src = (dir / "so_exports.c").string(), so = (dir / "so_exports.so").string();
  {
    std::ofstream f(src);
    f << "int exported_one(int x) { return x + 1; }\nint exported_two(int x) { return x * 2; }\n";
  }
  ASSERT_EQ(support::run_process({"gcc", "-O1", "-shared", "-fPIC", "-o", so, src}, out), 0);
  elf::ElfImage img = elf::load_elf(so);
  facts::FactBase f = elf::extract_facts(img);
  std::set<Address> entries(f.entry_points.begin(), f.entry_points.end());
  int found = 0;
  for (const auto& s : img.symbols)
    if (s.dynamic && (s.name == "exported_one" || s.name == "exported_two")) {
      EXPECT_TRUE(entries.count(s.value)) << s.name;
      ++found;
    }
  EXPECT_EQ(found, 2);
}

TEST(Elf, CorpusSectionsMatchReadelf) {
  for (const std::string& bin : support::corpus_binaries()) {
    std::string listing;
    ASSERT_EQ(support::run_process({"readelf", "-SW", support::corpus_stripped(bin).string()}, listing), 0);
    std::map<std::string, std::pair<Address, std::uint64_t>> reference;
    std::istringstream in(listing);
    std::string line;
    while (std::getline(in, line)) {
      auto lb = line.find(']');
      if (line.find('[') == std::string::npos || lb == std::string::npos || line.find("Nr]") != std::string::npos)
        continue;
      auto w = split_ws(line.substr(lb + 1));
      if (w.size() < 5 || w[0] == "NULL") continue;
      reference[w[0]] = {std::stoull(w[2], nullptr, 16), std::stoull(w[4], nullptr, 16)};
    }
    elf::ElfImage img = elf::load_elf(support::corpus_stripped(bin));
    std::map<std::string, std::pair<Address, std::uint64_t>> ours;
    for (const auto& s : img.sections)
      if (!s.name.empty()) ours[s.name] = {s.addr, s.size};
    EXPECT_EQ(ours, reference) << bin;
  }
}

// objdump's linear sweep is the reference: every instruction it prints must
// decode here with the same length, and common mnemonics must agree.
TEST(Elf, DecoderAgreesWithObjdumpOnCorpus) {
  const std::set<std::string> comparable = {"mov", "add", "sub", "lea", "push", "pop", "ret", "call", "jmp",
                                            "cmp", "test", "xor", "and", "or", "imul", "shl", "shr", "sar",
                                            "movzx", "movsx", "movsxd", "leave", "je", "jne", "jg", "jle",
                                            "jl", "jge", "ja", "jbe", "jb", "jae", "hlt", "cqo", "cdq"};
  for (const std::string& bin : support::corpus_binaries()) {
    std::string listing;
    ASSERT_EQ(support::run_process({"objdump", "-d", "-M", "intel", "--insn-width=16",
                                    support::corpus_stripped(bin).string()},
                                   listing),
              0);
    elf::ElfImage img = elf::load_elf(support::corpus_stripped(bin));
    std::istringstream in(listing);
    std::string line;
    int checked = 0;
    while (std::getline(in, line)) {
      auto colon = line.find(":\t");
      if (colon == std::string::npos || line.find("(bad)") != std::string::npos) continue;
      Address addr = std::stoull(line.substr(0, colon), nullptr, 16);
      std::string rest = line.substr(colon + 2);
      auto tab = rest.find('\t');
      if (tab == std::string::npos) continue;
      int length = static_cast<int>(split_ws(rest.substr(0, tab)).size());
      auto words = split_ws(rest.substr(tab + 1));
      if (words.empty()) continue;
      const elf::ElfSection* s = img.section_containing(addr);
      ASSERT_NE(s, nullptr);
      std::span<const std::uint8_t> bytes(s->bytes.data() + (addr - s->addr), s->bytes.size() - (addr - s->addr));
      auto d = elf::decode(bytes, addr);
      ASSERT_TRUE(d) << bin << " " << line;
      EXPECT_EQ(d->length, length) << bin << " " << line;
      if (comparable.count(words[0])) EXPECT_EQ(d->mnemonic, words[0]) << bin << " " << line;
      ++checked;
    }
    EXPECT_GT(checked, 100) << bin;
  }
}

TEST(Elf, DecodingIsPositionIndependentAndTotal) {
  for (const std::string& bin : support::corpus_binaries()) {
    elf::ElfImage img = elf::load_elf(support::corpus_stripped(bin));
    std::uint64_t exec_bytes = 0;
    for (const auto& s : img.sections) {
      if (!s.alloc() || !s.exec() || s.nobits()) continue;
      exec_bytes += s.size;
      for (std::size_t off = 0; off < s.bytes.size(); ++off) {
        std::span<const std::uint8_t> all(s.bytes.data() + off, s.bytes.size() - off);
        auto full = elf::decode(all, s.addr + off);
        auto window = elf::decode(all.first(std::min<std::size_t>(15, all.size())), s.addr + off);
        ASSERT_EQ(full.has_value(), window.has_value()) << bin << " at " << std::hex << s.addr + off;
        if (full) {
          ASSERT_EQ(full->length, window->length);
          ASSERT_EQ(full->mnemonic, window->mnemonic);
        }
      }
    }
    facts::FactBase f = elf::extract_facts(img);
    EXPECT_EQ(f.instructions.size() + f.invalid.size(), exec_bytes) << bin;
  }
}

TEST(Elf, SerialAndParallelKernelsAgree) {
  for (const std::string& bin : {std::string("vm_O1"), std::string("wordfreq_O0")}) {
    elf::ElfImage img = elf::load_elf(support::corpus_stripped(bin));
    auto a = elf::decode_all_serial(img);
    auto b = elf::decode_all_parallel(img, 4);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      ASSERT_EQ(a[i].addr, b[i].addr);
      ASSERT_EQ(a[i].insn.has_value(), b[i].insn.has_value());
      if (a[i].insn) ASSERT_EQ(a[i].insn->length, b[i].insn->length);
    }
    EXPECT_EQ(elf::scan_data_serial(img), elf::scan_data_parallel(img, 4));
  }
}

TEST(Elf, StrippedBinaryKeepsOnlyDynamicSymbols) {
  elf::ElfImage stripped = elf::load_elf(support::corpus_stripped("crc_O1"));
  elf::ElfImage twin = elf::load_elf(support::corpus_twin("crc_O1"));
  facts::FactBase fs = elf::extract_facts(stripped);
  facts::FactBase ft = elf::extract_facts(twin);
  std::set<std::string> dynamic;
  for (const auto& s : stripped.symbols) {
    EXPECT_TRUE(s.dynamic) << s.name;
    dynamic.insert(s.name);
  }
  for (const auto& s : fs.symbols) EXPECT_TRUE(dynamic.count(s.name)) << s.name;
  bool has_main = false;
  for (const auto& s : ft.symbols) has_main |= s.name == "main";
  EXPECT_TRUE(has_main);
  for (const auto& s : fs.symbols) EXPECT_NE(s.name, "main");
  auto d = support::disassemble(support::corpus_stripped("crc_O1"));
  EXPECT_FALSE(d.result.layout.blocks.empty());
}

TEST(Elf, WeakUndefinedImportsAreRecorded) {
  facts::FactBase f = elf::extract_facts(elf::load_elf(support::corpus_stripped("crc_O0")));
  bool weak = false;
  for (const auto& [k, v] : f.metadata) weak |= k == "weak" && v == "__gmon_start__";
  EXPECT_TRUE(weak);
}
