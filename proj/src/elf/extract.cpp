#include "rdis/elf/extract.hpp"

#include <elf.h>
#include <omp.h>

#include <algorithm>
#include <map>

namespace rdis::elf {
namespace {

struct ByteRange {
  const ElfSection* section;
  Address addr;
};

std::vector<const ElfSection*> exec_sections(const ElfImage& image) {
  std::vector<const ElfSection*> out;
  for (const ElfSection& s : image.sections)
    if (s.alloc() && s.exec() && !s.nobits() && s.size) out.push_back(&s);
  return out;
}

DecodedAt decode_at(const ElfSection& s, std::size_t off) {
  std::span<const std::uint8_t> bytes(s.bytes.data() + off, s.bytes.size() - off);
  return DecodedAt{s.addr + off, decode(bytes, s.addr + off)};
}

bool in_any_section(const ElfImage& image, Address v) {
  for (const ElfSection& s : image.sections)
    if (s.alloc() && v >= s.addr && v < s.addr + s.size) return true;
  return false;
}

std::uint64_t le64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::string operand_key(const Operand& op) {
  switch (op.kind) {
    case OperandKind::reg: return "r:" + op.reg;
    case OperandKind::imm: return "i:" + std::to_string(op.imm);
    case OperandKind::mem:
      return "m:" + op.mem.seg + ":" + op.mem.base + ":" + op.mem.index + ":" + std::to_string(op.mem.scale) +
             ":" + std::to_string(op.mem.disp) + ":" + std::to_string(op.mem.size);
  }
  return {};
}

}  // namespace

std::vector<DecodedAt> decode_all_serial(const ElfImage& image) {
  std::vector<DecodedAt> out;
  for (const ElfSection* s : exec_sections(image))
    for (std::size_t off = 0; off < s->bytes.size(); ++off) out.push_back(decode_at(*s, off));
  return out;
}

std::vector<DecodedAt> decode_all_parallel(const ElfImage& image, int jobs) {
  std::vector<DecodedAt> out;
  for (const ElfSection* s : exec_sections(image)) {
    const std::int64_t n = static_cast<std::int64_t>(s->bytes.size());
    std::size_t base = out.size();
    out.resize(base + static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static) num_threads(jobs)
    for (std::int64_t off = 0; off < n; ++off)
      out[base + static_cast<std::size_t>(off)] = decode_at(*s, static_cast<std::size_t>(off));
  }
  return out;
}

std::vector<std::pair<Address, Address>> scan_data_serial(const ElfImage& image) {
  std::vector<std::pair<Address, Address>> out;
  for (const ElfSection& s : image.sections) {
    if (!s.alloc() || s.nobits() || s.bytes.size() < 8) continue;
    for (std::size_t off = 0; off + 8 <= s.bytes.size(); ++off) {
      Address v = le64(s.bytes.data() + off);
      if (in_any_section(image, v)) out.emplace_back(s.addr + off, v);
    }
  }
  return out;
}

std::vector<std::pair<Address, Address>> scan_data_parallel(const ElfImage& image, int jobs) {
  std::vector<std::pair<Address, Address>> out;
  for (const ElfSection& s : image.sections) {
    if (!s.alloc() || s.nobits() || s.bytes.size() < 8) continue;
    const std::int64_t n = static_cast<std::int64_t>(s.bytes.size()) - 7;
    std::vector<Address> hit(static_cast<std::size_t>(n), 0);
    std::vector<char> found(static_cast<std::size_t>(n), 0);
#pragma omp parallel for schedule(static) num_threads(jobs)
    for (std::int64_t off = 0; off < n; ++off) {
      Address v = le64(s.bytes.data() + off);
      if (in_any_section(image, v)) {
        hit[static_cast<std::size_t>(off)] = v;
        found[static_cast<std::size_t>(off)] = 1;
      }
    }
    for (std::int64_t off = 0; off < n; ++off)
      if (found[static_cast<std::size_t>(off)]) out.emplace_back(s.addr + static_cast<Address>(off), hit[static_cast<std::size_t>(off)]);
  }
  return out;
}

void add_instruction_facts(const std::vector<DecodedAt>& decoded, facts::FactBase& out) {
  std::map<std::string, facts::OperandId> ids;
  auto id_for = [&](const Operand& op) {
    std::string key = operand_key(op);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    facts::OperandId id = static_cast<facts::OperandId>(ids.size()) + 1;
    ids.emplace(key, id);
    switch (op.kind) {
      case OperandKind::reg: out.regdirect.push_back({id, op.reg}); break;
      case OperandKind::imm: out.immediates.push_back({id, op.imm}); break;
      case OperandKind::mem:
        out.indirect.push_back({id, op.mem.seg, op.mem.base, op.mem.index, op.mem.scale, op.mem.disp, op.mem.size});
        break;
    }
    return id;
  };
  for (const DecodedAt& d : decoded) {
    if (!d.insn) {
      out.invalid.push_back(d.addr);
      continue;
    }
    facts::Instruction insn;
    insn.addr = d.addr;
    insn.size = d.insn->length;
    insn.prefix = d.insn->prefix;
    insn.opcode = d.insn->mnemonic;
    const auto& ops = d.insn->operands;
    // Facts list sources first and the destination last.
    for (std::size_t i = 0; i < ops.size() && i < 4; ++i) insn.ops[i] = id_for(ops[ops.size() - 1 - i]);
    out.instructions.push_back(std::move(insn));
  }
}

facts::FactBase extract_facts(const ElfImage& image, const ExtractOptions& options) {
  facts::FactBase f;
  for (const ElfSection& s : image.sections) {
    if (!s.alloc()) continue;
    f.sections.push_back({s.name, s.addr, s.size, s.exec(), s.write(), !s.nobits()});
    for (std::size_t i = 0; i < s.bytes.size(); ++i) f.data_bytes.emplace_back(s.addr + i, s.bytes[i]);
  }
  auto decoded = options.jobs > 1 ? decode_all_parallel(image, options.jobs) : decode_all_serial(image);
  add_instruction_facts(decoded, f);
  f.address_in_data = options.jobs > 1 ? scan_data_parallel(image, options.jobs) : scan_data_serial(image);

  bool has_symtab = false;
  for (const ElfSymbol& s : image.symbols) has_symtab |= !s.dynamic;
  for (const ElfSymbol& s : image.symbols) {
    if (s.dynamic == has_symtab) continue;
    if (s.name.empty() || s.shndx == SHN_UNDEF || s.shndx == SHN_ABS) continue;
    if (s.type != "FUNC" && s.type != "OBJECT" && s.type != "NOTYPE") continue;
    f.symbols.push_back({s.value, s.name, s.type});
  }
  for (const ElfRelocation& r : image.relocations)
    if (r.dynamic) f.relocations.push_back({r.offset, r.type_name, r.symbol, r.addend});
  if (image.section_containing(image.entry)) f.entry_points.push_back(image.entry);
  if (image.type == ET_DYN)
    for (const ElfSymbol& s : image.symbols)
      if (s.dynamic && s.type == "FUNC" && s.shndx != SHN_UNDEF && s.shndx < image.sections.size() &&
          image.sections[s.shndx].exec() && s.value != image.entry)
        f.entry_points.push_back(s.value);
  std::sort(f.entry_points.begin(), f.entry_points.end());
  f.entry_points.erase(std::unique(f.entry_points.begin(), f.entry_points.end()), f.entry_points.end());
  f.metadata.emplace_back("decoder", kDecoderSubset);
  if (!options.source.empty()) f.metadata.emplace_back("source", options.source);
  for (const std::string& n : image.needed) f.metadata.emplace_back("needed", n);
  for (const ElfSymbol& s : image.symbols)
    if (s.dynamic && s.bind == "WEAK" && s.shndx == SHN_UNDEF && !s.name.empty())
      f.metadata.emplace_back("weak", s.name);
  return f;
}

}  // namespace rdis::elf
