#include "rdis/facts/fact_base.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "rdis/facts/registers.hpp"
#include "rdis/relfix/error.hpp"
#include "rdis/relfix/text_io.hpp"

namespace rdis::facts {
namespace {

using relfix::ColumnKind;
using relfix::intern;
using relfix::text_of;
using relfix::Value;
constexpr auto A = ColumnKind::address;
constexpr auto N = ColumnKind::number;
constexpr auto T = ColumnKind::text;

std::string hex(Address a) {
  std::ostringstream s;
  s << "0x" << std::hex << a;
  return s.str();
}

bool known_register(std::string_view r) {
  return r == "NONE" || register_width(r) != 0;
}

}  // namespace

const Section* FactBase::section_at(Address a) const {
  for (const Section& s : sections)
    if (s.contains(a)) return &s;
  return nullptr;
}

const Section* FactBase::section_named(std::string_view name) const {
  for (const Section& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

const std::vector<FactSchema>& fact_schemas() {
  static const std::vector<FactSchema> schemas = {
      {"instruction", {A, N, T, T, N, N, N, N}},
      {"invalid", {A}},
      {"op_regdirect", {N, T}},
      {"op_immediate", {N, N}},
      {"op_indirect", {N, T, T, T, N, N, N}},
      {"data_byte", {A, N}},
      {"address_in_data", {A, A}},
      {"section", {T, A, N, N, N, N}},
      {"symbol", {A, T, T}},
      {"relocation", {A, T, T, N}},
      {"entry_point", {A}},
      {"extra_target", {A}},
      {"metadata", {T, T}},
  };
  return schemas;
}

FactRelations declare_fact_inputs(relfix::Program& p) {
  const auto& s = fact_schemas();
  auto in = [&](std::size_t i) { return p.input(s[i].name, s[i].columns); };
  return FactRelations{in(0), in(1), in(2), in(3), in(4), in(5), in(6),
                       in(7), in(8), in(9), in(10), in(11), in(12)};
}

IntegrityError::IntegrityError(std::vector<std::string> violations)
    : std::runtime_error([&] {
        std::string msg = "fact base violates " + std::to_string(violations.size()) + " invariant(s)";
        for (std::size_t i = 0; i < violations.size() && i < 10; ++i) msg += "\n  " + violations[i];
        return msg;
      }()),
      violations_(std::move(violations)) {}

std::vector<std::string> validate(const FactBase& f) {
  std::vector<std::string> out;
  std::unordered_map<OperandId, int> kind_of;
  auto claim = [&](OperandId id, int kind) {
    if (id <= 0) {
      out.push_back("operand id " + std::to_string(id) + " is not positive");
      return;
    }
    auto [it, fresh] = kind_of.emplace(id, kind);
    if (!fresh) out.push_back("operand id " + std::to_string(id) + " has more than one payload");
  };
  for (const RegDirect& r : f.regdirect) {
    claim(r.id, 0);
    if (!known_register(r.reg) || r.reg == "NONE") out.push_back("unknown register '" + r.reg + "'");
  }
  for (const Immediate& i : f.immediates) claim(i.id, 1);
  for (const Indirect& m : f.indirect) {
    claim(m.id, 2);
    if (!known_register(m.base) || !known_register(m.index) || !known_register(m.seg))
      out.push_back("operand " + std::to_string(m.id) + " names an unknown register");
    if (m.mult != 1 && m.mult != 2 && m.mult != 4 && m.mult != 8)
      out.push_back("operand " + std::to_string(m.id) + " has scale " + std::to_string(m.mult));
    if (m.index == "NONE" && m.mult != 1)
      out.push_back("operand " + std::to_string(m.id) + " has a scale without an index");
    static const std::set<int> sizes = {1, 2, 4, 8, 10, 16};
    if (!sizes.count(m.size))
      out.push_back("operand " + std::to_string(m.id) + " has access size " + std::to_string(m.size));
  }

  std::unordered_set<Address> insn_addrs;
  for (const Instruction& i : f.instructions) {
    if (!insn_addrs.insert(i.addr).second) out.push_back("duplicate instruction at " + hex(i.addr));
    if (i.size <= 0 || i.size > 15) out.push_back("instruction at " + hex(i.addr) + " has size " + std::to_string(i.size));
    bool gap = false;
    for (OperandId op : i.ops) {
      if (op == 0) {
        gap = true;
        continue;
      }
      if (gap) out.push_back("instruction at " + hex(i.addr) + " has an operand after an empty slot");
      if (!kind_of.count(op))
        out.push_back("instruction at " + hex(i.addr) + " references dangling operand " + std::to_string(op));
    }
    const Section* s = f.section_at(i.addr);
    if (!s || !s->executable || i.addr + static_cast<Address>(i.size) > s->end())
      out.push_back("instruction at " + hex(i.addr) + " is not inside an executable section");
  }
  std::unordered_set<Address> invalid(f.invalid.begin(), f.invalid.end());
  for (Address a : f.invalid)
    if (insn_addrs.count(a)) out.push_back("address " + hex(a) + " is both an instruction and invalid");

  for (std::size_t i = 0; i < f.sections.size(); ++i)
    for (std::size_t j = i + 1; j < f.sections.size(); ++j) {
      const Section& a = f.sections[i];
      const Section& b = f.sections[j];
      if (a.length && b.length && a.start < b.end() && b.start < a.end())
        out.push_back("sections " + a.name + " and " + b.name + " overlap");
    }

  std::unordered_map<Address, std::uint8_t> bytes;
  for (const auto& [a, v] : f.data_bytes) {
    if (!bytes.emplace(a, v).second) out.push_back("duplicate data byte at " + hex(a));
    const Section* s = f.section_at(a);
    if (!s || !s->initialized) out.push_back("data byte at " + hex(a) + " is outside initialized sections");
  }
  for (const Section& s : f.sections) {
    if (!s.executable || !s.initialized) continue;
    for (Address a = s.start; a < s.end(); ++a)
      if (bytes.count(a) && !insn_addrs.count(a) && !invalid.count(a))
        out.push_back("executable address " + hex(a) + " has neither an instruction nor an invalid fact");
  }
  for (const auto& [a, v] : f.address_in_data) {
    const Section* s = f.section_at(a);
    if (!s || a + 8 > s->end()) out.push_back("address_in_data at " + hex(a) + " is not inside one section");
    if (!f.section_at(v)) out.push_back("address_in_data value " + hex(v) + " at " + hex(a) + " is outside all sections");
    Address word = 0;
    bool have = true;
    for (int k = 7; k >= 0; --k) {
      auto it = bytes.find(a + static_cast<Address>(k));
      if (it == bytes.end()) {
        have = false;
        break;
      }
      word = (word << 8) | it->second;
    }
    if (have && word != v) out.push_back("address_in_data at " + hex(a) + " disagrees with its data bytes");
  }
  for (Address e : f.entry_points) {
    const Section* s = f.section_at(e);
    if (!s || !s->executable) out.push_back("entry point " + hex(e) + " is not in an executable section");
  }
  return out;
}

void to_database(const FactBase& f, relfix::Database& db) {
  for (const FactSchema& s : fact_schemas()) db.add(s.name, s.columns);
  auto& insn = db.at("instruction");
  for (const Instruction& i : f.instructions)
    insn.insert({static_cast<Value>(i.addr), i.size, intern(i.prefix), intern(i.opcode), i.ops[0], i.ops[1],
                 i.ops[2], i.ops[3]});
  for (Address a : f.invalid) db.at("invalid").insert({static_cast<Value>(a)});
  for (const RegDirect& r : f.regdirect) db.at("op_regdirect").insert({r.id, intern(r.reg)});
  for (const Immediate& i : f.immediates) db.at("op_immediate").insert({i.id, i.value});
  for (const Indirect& m : f.indirect)
    db.at("op_indirect").insert({m.id, intern(m.seg), intern(m.base), intern(m.index), m.mult, m.disp, m.size});
  for (const auto& [a, v] : f.data_bytes) db.at("data_byte").insert({static_cast<Value>(a), v});
  for (const auto& [a, v] : f.address_in_data)
    db.at("address_in_data").insert({static_cast<Value>(a), static_cast<Value>(v)});
  for (const Section& s : f.sections)
    db.at("section").insert({intern(s.name), static_cast<Value>(s.start), static_cast<Value>(s.length),
                             s.executable, s.writable, s.initialized});
  for (const Symbol& s : f.symbols)
    db.at("symbol").insert({static_cast<Value>(s.addr), intern(s.name), intern(s.kind)});
  for (const Relocation& r : f.relocations)
    db.at("relocation").insert({static_cast<Value>(r.addr), intern(r.kind), intern(r.symbol), r.addend});
  for (Address a : f.entry_points) db.at("entry_point").insert({static_cast<Value>(a)});
  for (Address a : f.extra_targets) db.at("extra_target").insert({static_cast<Value>(a)});
  for (const auto& [k, v] : f.metadata) db.at("metadata").insert({intern(k), intern(v)});
}

FactBase from_database(const relfix::Database& db) {
  FactBase f;
  auto rows = [&](const char* name) {
    const relfix::Relation* r = db.find(name);
    return r ? r->sorted_rows() : std::vector<relfix::Tuple>{};
  };
  auto addr = [](Value v) { return static_cast<Address>(v); };
  for (const auto& t : rows("instruction"))
    f.instructions.push_back({addr(t[0]), static_cast<int>(t[1]), text_of(t[2]), text_of(t[3]), {t[4], t[5], t[6], t[7]}});
  for (const auto& t : rows("invalid")) f.invalid.push_back(addr(t[0]));
  for (const auto& t : rows("op_regdirect")) f.regdirect.push_back({t[0], text_of(t[1])});
  for (const auto& t : rows("op_immediate")) f.immediates.push_back({t[0], t[1]});
  for (const auto& t : rows("op_indirect"))
    f.indirect.push_back({t[0], text_of(t[1]), text_of(t[2]), text_of(t[3]), t[4], t[5], static_cast<int>(t[6])});
  for (const auto& t : rows("data_byte")) f.data_bytes.emplace_back(addr(t[0]), static_cast<std::uint8_t>(t[1]));
  for (const auto& t : rows("address_in_data")) f.address_in_data.emplace_back(addr(t[0]), addr(t[1]));
  for (const auto& t : rows("section"))
    f.sections.push_back({text_of(t[0]), addr(t[1]), static_cast<std::uint64_t>(t[2]), t[3] != 0, t[4] != 0, t[5] != 0});
  std::sort(f.sections.begin(), f.sections.end(),
            [](const Section& a, const Section& b) { return a.start < b.start || (a.start == b.start && a.name < b.name); });
  for (const auto& t : rows("symbol")) f.symbols.push_back({addr(t[0]), text_of(t[1]), text_of(t[2])});
  for (const auto& t : rows("relocation")) f.relocations.push_back({addr(t[0]), text_of(t[1]), text_of(t[2]), t[3]});
  for (const auto& t : rows("entry_point")) f.entry_points.push_back(addr(t[0]));
  for (const auto& t : rows("extra_target")) f.extra_targets.push_back(addr(t[0]));
  for (const auto& t : rows("metadata")) f.metadata.emplace_back(text_of(t[0]), text_of(t[1]));
  return f;
}

void dump_facts(const FactBase& facts, const std::filesystem::path& dir) {
  relfix::Database db;
  to_database(facts, db);
  std::vector<std::string> names;
  for (const FactSchema& s : fact_schemas()) names.push_back(s.name);
  relfix::dump_relations(db, names, dir);
}

FactBase load_facts(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw relfix::Error(relfix::ErrorKind::parse_error, "not a fact directory: " + dir.string());
  relfix::Database db;
  for (const FactSchema& s : fact_schemas()) db.add(s.name, s.columns);
  relfix::load_relations(db, dir);
  FactBase f = from_database(db);
  auto violations = validate(f);
  if (!violations.empty()) throw IntegrityError(std::move(violations));
  return f;
}

OperandTable::OperandTable(const FactBase& facts) {
  for (const RegDirect& r : facts.regdirect) regs_[r.id] = &r;
  for (const Immediate& i : facts.immediates) imms_[i.id] = &i;
  for (const Indirect& m : facts.indirect) mems_[m.id] = &m;
}

const RegDirect* OperandTable::reg(OperandId id) const {
  auto it = regs_.find(id);
  return it == regs_.end() ? nullptr : it->second;
}
const Immediate* OperandTable::imm(OperandId id) const {
  auto it = imms_.find(id);
  return it == imms_.end() ? nullptr : it->second;
}
const Indirect* OperandTable::mem(OperandId id) const {
  auto it = mems_.find(id);
  return it == mems_.end() ? nullptr : it->second;
}

}  // namespace rdis::facts
