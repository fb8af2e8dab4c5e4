#include "rdis/cli/diff.hpp"

#include <elf.h>

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "rdis/elf/decoder.hpp"

namespace rdis::cli {
namespace {

using symbolization::Context;
using Key = std::tuple<Address, int, Context>;

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << "0x" << std::hex << v;
  return s.str();
}

// Linear sweep of one executable section; undecodable bytes are skipped.
void sweep(const elf::ElfSection& s, std::map<Address, elf::Decoded>& out) {
  std::size_t off = 0;
  while (off < s.bytes.size()) {
    std::span<const std::uint8_t> bytes(s.bytes.data() + off, s.bytes.size() - off);
    auto d = elf::decode(bytes, s.addr + off);
    if (!d) {
      ++off;
      continue;
    }
    out.emplace(s.addr + off, *d);
    off += static_cast<std::size_t>(d->length);
  }
}

bool pc_relative_type(const std::string& t) { return t == "PC32" || t == "PC64" || t == "PLT32"; }
bool got_type(const std::string& t) { return t.find("GOTPC") != std::string::npos || t == "GOT32" || t == "GOT64"; }

const ReportSection* section_of(const std::vector<ReportSection>& secs, Address a) {
  for (const ReportSection& s : secs)
    if (s.length && a >= s.start && a < s.start + s.length) return &s;
  return nullptr;
}

}  // namespace

void write_report_sections(std::ostream& out, const std::vector<facts::Section>& sections) {
  for (const facts::Section& s : sections)
    out << "# section " << s.name << ' ' << hex(s.start) << ' ' << hex(s.length) << '\n';
}

std::vector<ReportSection> read_report_sections(std::istream& in) {
  std::vector<ReportSection> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# section ", 0) != 0) continue;
    std::istringstream ss(line.substr(10));
    ReportSection s;
    std::string start, length;
    if (!(ss >> s.name >> start >> length)) throw std::runtime_error("MalformedReport: " + line);
    s.start = std::stoull(start, nullptr, 16);
    s.length = std::stoull(length, nullptr, 16);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TruthEntry> ground_truth(const elf::ElfImage& twin, const TruthOptions& options, std::size_t& skipped) {
  std::map<Address, elf::Decoded> insns;
  for (const elf::ElfSection& s : twin.sections)
    if (s.alloc() && s.exec() && !s.nobits()) sweep(s, insns);
  auto excluded = [&](const std::string& name) {
    return std::find(options.excluded_sections.begin(), options.excluded_sections.end(), name) !=
           options.excluded_sections.end();
  };

  std::vector<TruthEntry> out;
  skipped = 0;
  for (const elf::ElfRelocation& r : twin.relocations) {
    if (r.dynamic || r.type_name == "NONE") continue;
    const elf::ElfSection* at = twin.section_containing(r.offset);
    if (!at || excluded(at->name) || r.target_section >= twin.sections.size() ||
        !twin.sections[r.target_section].alloc()) {
      ++skipped;
      continue;
    }
    TruthEntry t;
    t.relocation = r.type_name;
    if (r.symbol_shndx == SHN_UNDEF) {
      // Undefined weak symbols resolve to 0 unless reached through the GOT or a PLT stub.
      if (!got_type(r.type_name) && r.type_name != "PLT32") {
        ++skipped;
        continue;
      }
      t.section = "*external";
    } else if (r.symbol_shndx == SHN_ABS || r.symbol_shndx >= twin.sections.size()) {
      ++skipped;
      continue;
    } else {
      t.section = twin.sections[r.symbol_shndx].name;
    }
    if (at->exec()) {
      auto it = insns.upper_bound(r.offset);
      if (it == insns.begin()) {
        ++skipped;
        continue;
      }
      --it;
      const elf::Decoded& d = it->second;
      Address off = r.offset - it->first;
      if (off >= static_cast<Address>(d.length)) {
        ++skipped;
        continue;
      }
      if (d.relative_branch && static_cast<int>(off) == d.imm_offset) {
        ++skipped;  // branch targets are not symbolization decisions
        continue;
      }
      int n = static_cast<int>(d.operands.size());
      bool found = false;
      for (int i = 0; i < n; ++i) {
        const elf::Operand& op = d.operands[static_cast<std::size_t>(i)];
        if (op.kind == elf::OperandKind::mem && static_cast<int>(off) == d.disp_offset) {
          t.context = Context::displacement;
        } else if (op.kind == elf::OperandKind::imm && static_cast<int>(off) == d.imm_offset) {
          t.context = Context::immediate;
        } else {
          continue;
        }
        t.addr = it->first;
        t.operand = n - i;  // facts order: sources first
        found = true;
        break;
      }
      if (!found) {
        ++skipped;
        continue;
      }
    } else {
      if (pc_relative_type(r.type_name)) {
        ++skipped;
        continue;
      }
      t.addr = r.offset;
      t.operand = 0;
      t.context = Context::data;
    }
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(), [](const TruthEntry& a, const TruthEntry& b) {
    return std::make_tuple(a.addr, a.operand, a.context) < std::make_tuple(b.addr, b.operand, b.context);
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const TruthEntry& a, const TruthEntry& b) {
                          return a.addr == b.addr && a.operand == b.operand && a.context == b.context;
                        }),
            out.end());
  return out;
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::ok: return "OK";
    case Verdict::fp: return "FP";
    case Verdict::fn: return "FN";
    case Verdict::ws: return "WS";
  }
  return "OK";
}

DiffResult diff(const std::vector<symbolization::Decision>& decisions, const std::vector<ReportSection>& sections,
                const elf::ElfImage& twin, const TruthOptions& options) {
  for (const elf::ElfSection& s : twin.sections) {
    if (!s.alloc()) continue;
    auto it = std::find_if(sections.begin(), sections.end(), [&](const ReportSection& r) { return r.name == s.name; });
    if (it == sections.end() || it->start != s.addr || it->length != s.size)
      throw GroundTruthMismatch("section " + s.name + " differs between report and twin binary");
  }
  if (sections.size() != static_cast<std::size_t>(std::count_if(twin.sections.begin(), twin.sections.end(),
                                                                  [](const elf::ElfSection& s) { return s.alloc(); })))
    throw GroundTruthMismatch("report lists sections the twin binary lacks");

  DiffResult res;
  std::vector<TruthEntry> truth = ground_truth(twin, options, res.skipped);
  std::map<Key, const TruthEntry*> by_key;
  for (const TruthEntry& t : truth) by_key[{t.addr, t.operand, t.context}] = &t;
  std::map<Key, const symbolization::Decision*> ours;
  auto excluded_at = [&](Address a) {
    const ReportSection* s = section_of(sections, a);
    return !s || std::find(options.excluded_sections.begin(), options.excluded_sections.end(), s->name) !=
                     options.excluded_sections.end();
  };
  for (const symbolization::Decision& d : decisions) {
    if (!d.expr.symbolic() || excluded_at(d.addr)) continue;
    ours[{d.addr, d.operand, d.context}] = &d;
  }

  std::map<Key, DiffRow> rows;
  for (const auto& [key, d] : ours) {
    DiffRow row{std::get<0>(key), std::get<1>(key), std::get<2>(key), Verdict::ok, d->expr.render(), "-"};
    auto t = by_key.find(key);
    if (t == by_key.end()) {
      row.verdict = Verdict::fp;
    } else {
      row.truth = t->second->section;
      Address target = d->expr.target;
      std::string mine = d->expr.section;
      if (mine.empty()) {
        const ReportSection* s = section_of(sections, target);
        mine = s ? s->name : "";
      }
      const ReportSection* ts = nullptr;
      for (const ReportSection& s : sections)
        if (s.name == row.truth) ts = &s;
      bool external_ok = row.truth == "*external";
      bool boundary = ts && (target == ts->start || target == ts->start + ts->length);
      if (!external_ok && mine != row.truth && !boundary) row.verdict = Verdict::ws;
    }
    rows[key] = row;
  }
  for (const auto& [key, t] : by_key) {
    if (rows.count(key) || excluded_at(t->addr)) continue;
    rows[key] = DiffRow{t->addr, t->operand, t->context, Verdict::fn, "-", t->section};
  }
  for (auto& [key, row] : rows) {
    switch (row.verdict) {
      case Verdict::ok: ++res.ok; break;
      case Verdict::fp: ++res.fp; break;
      case Verdict::fn: ++res.fn; break;
      case Verdict::ws: ++res.ws; break;
    }
    res.rows.push_back(row);
  }
  return res;
}

void write_diff(std::ostream& out, const DiffResult& r) {
  out << "FP=" << r.fp << " FN=" << r.fn << " WS=" << r.ws << '\n';
  out << "# ok " << r.ok << " skipped " << r.skipped << '\n';
  for (const DiffRow& row : r.rows)
    out << hex(row.addr) << '\t' << row.operand << '\t' << symbolization::context_name(row.context) << '\t'
        << verdict_name(row.verdict) << '\t' << row.ours << '\t' << row.truth << '\n';
}

}  // namespace rdis::cli
