#include "rdis/emit/emit.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "rdis/facts/registers.hpp"

namespace rdis::emit {
namespace {

using symbolization::Context;
using symbolization::SymbolicExpr;

std::string hex(std::uint64_t v, bool upper = true) {
  std::ostringstream s;
  if (upper) s << std::uppercase;
  s << std::hex << v;
  return s.str();
}

std::string signed_hex(std::int64_t v) {
  if (v < 0) return "-0x" + hex(static_cast<std::uint64_t>(0) - static_cast<std::uint64_t>(v));
  return "0x" + hex(static_cast<std::uint64_t>(v));
}

std::string label_name(Address a) { return ".L_" + hex(a); }

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

bool is_branch(const std::string& op) {
  return op == "jmp" || op == "call" || op == "loop" || op == "loope" || op == "loopne" || op == "jrcxz" ||
         (op.size() >= 2 && op[0] == 'j');
}

bool is_string_op(const std::string& op) {
  return op == "stos" || op == "lods" || op == "movs" || op == "scas" || op == "cmps";
}

std::string size_keyword(int size) {
  switch (size) {
    case 1: return "BYTE PTR ";
    case 2: return "WORD PTR ";
    case 4: return "DWORD PTR ";
    case 8: return "QWORD PTR ";
    case 10: return "TBYTE PTR ";
    case 16: return "XMMWORD PTR ";
    default: return "";
  }
}

std::string escape_string(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  for (std::uint8_t b : bytes) {
    if (b == '"' || b == '\\') {
      out += '\\';
      out += static_cast<char>(b);
    } else if (b == '\n') {
      out += "\\n";
    } else if (b == '\t') {
      out += "\\t";
    } else if (b >= 0x20 && b <= 0x7e) {
      out += static_cast<char>(b);
    } else {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\%03o", b);
      out += buf;
    }
  }
  return out;
}

std::uint64_t section_align(Address start) {
  std::uint64_t a = 1;
  while (a < 64 && start % (a * 2) == 0) a *= 2;
  return start == 0 ? 1 : a;
}

// One contiguous piece of a section: an instruction, a resolved data object
// or a run of plain bytes.
struct Atom {
  enum class Kind { insn, object, bytes };
  Kind kind = Kind::bytes;
  Address addr = 0;
  std::uint64_t size = 0;
  const facts::Instruction* insn = nullptr;
  const symbolization::DataObject* object = nullptr;
  bool block_start = false;
};

struct SectionPlan {
  const facts::Section* section = nullptr;
  std::vector<Atom> atoms;
  std::set<Address> labels;  // addresses in [start, end)
  bool end_label = false;
  std::string end_name;
};

class Builder {
 public:
  Builder(const facts::FactBase& f, const ibi::CodeLayout& layout, const symbolization::Symbolization& s)
      : facts_(f), layout_(layout), symbols_(s), operands_(f), ext_(external_names(f)) {
    for (const auto& [a, b] : f.data_bytes) bytes_[a] = b;
    for (const facts::Instruction& i : f.instructions) insns_[i.addr] = &i;
    for (const auto& [a, n] : ext_.plt) plt_[a] = n;
    for (const auto& [a, n] : ext_.got) got_[a] = n;
    for (const auto& [a, n] : ext_.copy) copy_[a] = n;
  }

  AsmProgram run() {
    plan_sections();
    std::vector<std::vector<AsmItem>> rendered(plans_.size());
    for (std::size_t i = 0; i < plans_.size(); ++i)
      for (const Atom& atom : plans_[i].atoms) rendered[i].push_back(render(plans_[i], atom));
    Address entry = facts_.entry_points.empty() ? 0 : facts_.entry_points.front();

    for (std::size_t i = 0; i < plans_.size(); ++i) {
      SectionPlan& plan = plans_[i];
      const facts::Section& s = *plan.section;
      AsmSection sec;
      sec.name = s.name;
      sec.flags = s.executable ? "ax" : (s.writable ? "aw" : "a");
      sec.type = !s.initialized ? "@nobits"
                 : s.name == ".init_array" ? "@init_array"
                 : s.name == ".fini_array" ? "@fini_array"
                                           : "@progbits";
      sec.addr = s.start;
      sec.size = s.length;
      sec.align = section_align(s.start);
      if (s.name == ".init" || s.name == ".fini") sec.items.push_back(label_item("_" + s.name.substr(1), s.start));
      for (std::size_t k = 0; k < plan.atoms.size(); ++k) {
        const Atom& atom = plan.atoms[k];
        AsmItem& item = rendered[i][k];
        if (atom.kind == Atom::Kind::bytes) {
          // Split plain runs at every label inside them.
          Address lo = atom.addr, hi = atom.addr + atom.size;
          auto it = plan.labels.lower_bound(lo);
          Address cur = lo;
          while (cur < hi) {
            if (it != plan.labels.end() && *it == cur) {
              sec.items.push_back(label_item(label_name(cur), cur));
              ++it;
            }
            if (cur == entry) sec.items.push_back(label_item("_start", cur));
            Address next = (it != plan.labels.end() && *it < hi) ? *it : hi;
            sec.items.push_back(bytes_item(s, cur, next));
            cur = next;
          }
          continue;
        }
        if (plan.labels.count(atom.addr)) sec.items.push_back(label_item(label_name(atom.addr), atom.addr));
        if (atom.addr == entry) sec.items.push_back(label_item("_start", atom.addr));
        sec.items.push_back(std::move(item));
      }
      if (plan.end_label) sec.items.push_back(label_item(plan.end_name, s.end()));
      program_.sections.push_back(std::move(sec));
    }

    for (const symbolization::JumpTable& jt : symbols_.tables) {
      if (jt.entry_size >= 8 || jt.targets.empty()) continue;
      Address lo = std::min(jt.reference, *std::min_element(jt.targets.begin(), jt.targets.end()));
      Address hi = std::max(jt.reference, *std::max_element(jt.targets.begin(), jt.targets.end()));
      program_.no_stretch.emplace_back(lo, hi);
    }
    std::sort(program_.no_stretch.begin(), program_.no_stretch.end());
    program_.entry_label = "_start";
    for (const auto& [k, v] : facts_.metadata)
      if (k == "needed") program_.needed.push_back(v);
    program_.weak.assign(used_weak_.begin(), used_weak_.end());
    return std::move(program_);
  }

 private:
  static AsmItem label_item(const std::string& name, Address a) {
    AsmItem it;
    it.kind = ItemKind::label;
    it.addr = a;
    it.text = name;
    return it;
  }

  AsmItem bytes_item(const facts::Section& s, Address lo, Address hi) {
    AsmItem it;
    it.addr = lo;
    bool zero = !s.initialized;
    if (!zero) {
      zero = hi - lo >= 16;
      for (Address a = lo; zero && a < hi; ++a) zero = byte(a) == 0;
    }
    if (zero) {
      it.kind = ItemKind::zero;
      it.count = static_cast<std::int64_t>(hi - lo);
      return it;
    }
    it.kind = ItemKind::raw;
    for (Address a = lo; a < hi; ++a) it.bytes.push_back(byte(a));
    return it;
  }

  std::uint8_t byte(Address a) const {
    auto it = bytes_.find(a);
    return it == bytes_.end() ? 0 : it->second;
  }

  void plan_sections() {
    std::vector<const facts::Section*> secs;
    for (const facts::Section& s : facts_.sections)
      if (!skipped_section(s.name)) secs.push_back(&s);
    std::sort(secs.begin(), secs.end(), [](auto* a, auto* b) { return a->start < b->start; });

    std::map<Address, const symbolization::DataObject*> objects;
    for (const symbolization::DataObject& o : symbols_.objects)
      if (o.kind != symbolization::CandidateKind::other) objects[o.addr] = &o;

    for (const facts::Section* s : secs) {
      SectionPlan plan;
      plan.section = s;
      std::vector<Atom> fixed;
      if (s->executable)
        for (const ibi::Block& b : layout_.blocks) {
          if (!s->contains(b.start)) continue;
          for (Address a : b.instructions) {
            const facts::Instruction* i = insns_.at(a);
            fixed.push_back({Atom::Kind::insn, a, static_cast<std::uint64_t>(i->size), i, nullptr, a == b.start});
          }
        }
      std::sort(fixed.begin(), fixed.end(), [](const Atom& x, const Atom& y) { return x.addr < y.addr; });
      Address cur = s->start;
      auto flush_bytes = [&](Address upto) {
        // Objects live in the gaps between instructions.
        while (cur < upto) {
          auto o = objects.lower_bound(cur);
          if (o != objects.end() && o->first < upto && o->first + static_cast<Address>(o->second->size) <= upto &&
              s->initialized) {
            if (o->first > cur) plan.atoms.push_back({Atom::Kind::bytes, cur, o->first - cur, nullptr, nullptr, false});
            plan.atoms.push_back({Atom::Kind::object, o->first, static_cast<std::uint64_t>(o->second->size), nullptr,
                                  o->second, false});
            cur = o->first + static_cast<Address>(o->second->size);
            continue;
          }
          if (o != objects.end() && o->first < upto) {
            // Straddles an instruction or the section end: kept as bytes.
            Address stop = o->first + 1;
            plan.atoms.push_back({Atom::Kind::bytes, cur, stop - cur, nullptr, nullptr, false});
            cur = stop;
            continue;
          }
          plan.atoms.push_back({Atom::Kind::bytes, cur, upto - cur, nullptr, nullptr, false});
          cur = upto;
        }
      };
      for (const Atom& a : fixed) {
        if (a.addr < cur) continue;
        flush_bytes(a.addr);
        plan.atoms.push_back(a);
        cur = a.addr + a.size;
      }
      flush_bytes(s->end());
      plans_.push_back(std::move(plan));
    }
  }

  // Anchors `target` at a defined label, requesting it. Returns false when
  // no emitted section holds or ends at the target.
  bool anchor(Address target, const std::string& hint, LabelRef& out) {
    SectionPlan* containing = nullptr;
    SectionPlan* ending = nullptr;
    for (SectionPlan& p : plans_) {
      if (p.section->contains(target)) containing = &p;
      if (p.section->end() == target && (!ending || p.section->name == hint)) ending = &p;
    }
    if (ending && (!containing || ending->section->name == hint)) {
      ending->end_label = true;
      ending->end_name = label_name(target) + (containing ? "_end" : "");
      out = {ending->end_name, 0, {}};
      return true;
    }
    if (!containing) return false;
    auto it = std::upper_bound(containing->atoms.begin(), containing->atoms.end(), target,
                               [](Address t, const Atom& a) { return t < a.addr; });
    const Atom& atom = *std::prev(it);
    Address at = atom.kind == Atom::Kind::bytes ? target : atom.addr;
    containing->labels.insert(at);
    out = {label_name(at), static_cast<std::int64_t>(target - at), {}};
    return true;
  }

  // Rendering of a symbolic expression; nullopt when it cannot be anchored.
  std::optional<LabelRef> reference(const SymbolicExpr& e) {
    LabelRef r;
    if (e.kind == SymbolicExpr::Kind::sym_minus_sym) {
      LabelRef minus;
      if (!anchor(e.target, "", r) || !anchor(e.reference, "", minus)) return std::nullopt;
      if (minus.offset) return std::nullopt;
      r.minus = minus.label;
      return r;
    }
    // Copy-relocated objects live wherever the linker puts them.
    if (auto it = copy_.find(e.target); it != copy_.end()) return LabelRef{note_weak(it->second), e.offset, {}};
    if (anchor(e.target, e.section, r)) {
      r.offset += e.offset;
      return r;
    }
    auto named = external(e.target);
    if (!named) return std::nullopt;
    return LabelRef{*named, e.offset, {}};
  }

  std::optional<std::string> external(Address target) {
    if (auto it = plt_.find(target); it != plt_.end()) return note_weak(it->second);
    return std::nullopt;
  }

  std::string note_weak(const std::string& name) {
    if (ext_.weak.count(name)) used_weak_.insert(name);
    return name;
  }

  void warn(Address a, const std::string& what) {
    program_.warnings.push_back("0x" + hex(a) + ": " + what);
  }

  AsmItem render(const SectionPlan& plan, const Atom& atom) {
    AsmItem it;
    it.addr = atom.addr;
    it.block_start = atom.block_start;
    if (atom.kind == Atom::Kind::insn) return render_insn(*atom.insn, atom.block_start);
    if (atom.kind == Atom::Kind::bytes) return it;  // rebuilt per label split
    const symbolization::DataObject& o = *atom.object;
    using symbolization::CandidateKind;
    if (o.kind == CandidateKind::string) {
      std::vector<std::uint8_t> body;
      for (Address a = o.addr; a + 1 < o.addr + static_cast<Address>(o.size); ++a) body.push_back(byte(a));
      it.kind = ItemKind::string;
      it.args = {escape_string(body)};
      return it;
    }
    const symbolization::Decision* d = symbols_.find(o.addr, 0, Context::data);
    std::optional<LabelRef> ref;
    if (d && d->expr.symbolic()) ref = reference(d->expr);
    if (!ref) {
      warn(o.addr, "data object left as bytes");
      it.kind = ItemKind::raw;
      for (Address a = o.addr; a < o.addr + static_cast<Address>(o.size); ++a) it.bytes.push_back(byte(a));
      return it;
    }
    static const std::map<std::int64_t, std::string> directive = {
        {1, ".byte"}, {2, ".word"}, {4, ".long"}, {8, ".quad"}};
    it.kind = ItemKind::data;
    it.text = directive.at(o.size);
    it.args = {ref->render()};
    it.refs = {*ref};
    (void)plan;
    return it;
  }

  AsmItem render_insn(const facts::Instruction& insn, bool block_start) {
    AsmItem it;
    it.kind = ItemKind::instruction;
    it.addr = insn.addr;
    it.block_start = block_start;
    it.prefix = insn.prefix;
    it.text = insn.opcode;
    if (insn.opcode == "nop") {
      for (Address a = insn.addr; a < insn.addr + static_cast<Address>(insn.size); ++a) it.bytes.push_back(byte(a));
      it.prefix.clear();
      return it;
    }
    int n = insn.operand_count();
    if (is_string_op(insn.opcode)) {
      const facts::Indirect* m = nullptr;
      for (int i = 0; i < n && !m; ++i) m = operands_.mem(insn.ops[i]);
      static const std::map<int, std::string> suffix = {{1, "b"}, {2, "w"}, {4, "d"}, {8, "q"}};
      it.text += suffix.at(m ? m->size : 1);
      return it;
    }
    bool branch = is_branch(insn.opcode);
    for (int k = n; k >= 1; --k) {
      facts::OperandId id = insn.ops[k - 1];
      if (const facts::RegDirect* r = operands_.reg(id)) {
        it.args.push_back(r->reg);
      } else if (const facts::Immediate* imm = operands_.imm(id)) {
        it.args.push_back(render_imm(insn, k, imm->value, branch, it.refs));
      } else if (const facts::Indirect* mem = operands_.mem(id)) {
        it.args.push_back(render_mem(insn, k, *mem, it.refs));
      }
    }
    return it;
  }

  std::string render_imm(const facts::Instruction& insn, int k, std::int64_t v, bool branch,
                         std::vector<LabelRef>& refs) {
    if (branch) {
      SymbolicExpr e;
      e.kind = SymbolicExpr::Kind::sym_plus;
      e.target = static_cast<Address>(v);
      e.value = v;
      if (auto r = reference(e)) {
        refs.push_back(*r);
        return r->render();
      }
      warn(insn.addr, "branch target 0x" + hex(static_cast<Address>(v)) + " kept absolute");
      return "0x" + hex(static_cast<Address>(v));
    }
    const symbolization::Decision* d = symbols_.find(insn.addr, k, Context::immediate);
    if (d && d->expr.symbolic()) {
      if (auto r = reference(d->expr)) {
        refs.push_back(*r);
        return "OFFSET " + r->render();
      }
      warn(insn.addr, "symbolic immediate kept literal");
    }
    if (insn.opcode == "movabs") return "0x" + hex(static_cast<std::uint64_t>(v));
    return signed_hex(v);
  }

  std::string render_mem(const facts::Instruction& insn, int k, const facts::Indirect& m,
                         std::vector<LabelRef>& refs) {
    std::string out = insn.opcode == "lea" ? "" : size_keyword(m.size);
    std::string seg = m.seg == "NONE" ? "" : m.seg;
    std::transform(seg.begin(), seg.end(), seg.begin(), [](unsigned char c) { return std::tolower(c); });
    const symbolization::Decision* d = symbols_.find(insn.addr, k, Context::displacement);
    std::optional<LabelRef> ref;
    if (d && d->expr.symbolic()) ref = reference(d->expr);
    if (m.base == "RIP") {
      if (auto g = got_.find(static_cast<Address>(m.disp)); g != got_.end() && !ref) {
        LabelRef r{note_weak(g->second) + "@GOTPCREL", 0, {}};
        refs.push_back(r);
        return out + (seg.empty() ? "" : seg + ":") + "[rip+" + r.render() + "]";
      }
      if (ref) {
        refs.push_back(*ref);
        return out + (seg.empty() ? "" : seg + ":") + "[rip+" + ref->render() + "]";
      }
      warn(insn.addr, "pc-relative operand kept absolute");
      return out + (seg.empty() ? "ds" : seg) + ":" + "0x" + hex(static_cast<std::uint64_t>(m.disp));
    }
    if (d && d->expr.symbolic() && !ref) warn(insn.addr, "symbolic displacement kept literal");
    if (ref) refs.push_back(*ref);
    bool has_base = m.base != "NONE", has_index = m.index != "NONE";
    if (!has_base && !has_index) {
      if (ref) return out + (seg.empty() ? "" : seg + ":") + "[" + ref->render() + "]";
      return out + (seg.empty() ? "ds" : seg) + ":" + signed_hex(m.disp);
    }
    std::string inner;
    if (has_base) inner = m.base;
    if (has_index) inner += (inner.empty() ? "" : "+") + m.index + "*" + std::to_string(m.mult);
    if (ref) {
      inner += "+" + ref->render();
    } else if (m.disp > 0) {
      inner += "+" + signed_hex(m.disp);
    } else if (m.disp < 0) {
      inner += signed_hex(m.disp);
    }
    return out + (seg.empty() ? "" : seg + ":") + "[" + inner + "]";
  }

  const facts::FactBase& facts_;
  const ibi::CodeLayout& layout_;
  const symbolization::Symbolization& symbols_;
  facts::OperandTable operands_;
  ExternalNames ext_;
  std::map<Address, std::uint8_t> bytes_;
  std::map<Address, const facts::Instruction*> insns_;
  std::map<Address, std::string> plt_, got_, copy_;
  std::set<std::string> used_weak_;
  std::vector<SectionPlan> plans_;
  AsmProgram program_;
};

void print_bytes(std::ostream& out, const std::vector<std::uint8_t>& bytes) {
  for (std::size_t i = 0; i < bytes.size(); i += 16) {
    out << "  .byte ";
    for (std::size_t j = i; j < bytes.size() && j < i + 16; ++j)
      out << (j > i ? "," : "") << "0x" << hex(bytes[j], false);
    out << '\n';
  }
}

bool is_local(const std::string& label) { return starts_with(label, ".L_"); }

}  // namespace

std::string LabelRef::render() const {
  std::string s = label;
  if (!minus.empty()) s += "-" + minus;
  if (offset > 0) s += "+" + std::to_string(offset);
  if (offset < 0) s += std::to_string(offset);
  return s;
}

bool skipped_section(const std::string& name) {
  static const std::set<std::string> exact = {".interp", ".dynsym", ".dynstr", ".dynamic", ".got", ".got.plt",
                                              ".plt", ".plt.got", ".plt.sec", ".eh_frame", ".eh_frame_hdr",
                                              ".gcc_except_table", ".comment", ".hash"};
  return exact.count(name) || starts_with(name, ".note") || starts_with(name, ".gnu.") ||
         starts_with(name, ".rela");
}

ExternalNames external_names(const facts::FactBase& facts) {
  ExternalNames out;
  std::map<Address, std::string> slots;
  for (const facts::Relocation& r : facts.relocations) {
    if (r.symbol.empty()) continue;
    if (r.kind == "GLOB_DAT" || r.kind == "JUMP_SLOT") slots[r.addr] = r.symbol;
    if (r.kind == "COPY") out.copy.emplace_back(r.addr, r.symbol);
  }
  out.got.assign(slots.begin(), slots.end());
  facts::OperandTable ops(facts);
  std::map<Address, const facts::Instruction*> insns;
  for (const facts::Instruction& i : facts.instructions) insns[i.addr] = &i;
  std::map<Address, std::string> plt;
  for (const facts::Section& s : facts.sections) {
    if (!s.executable || !skipped_section(s.name)) continue;
    for (auto it = insns.lower_bound(s.start); it != insns.end() && it->first < s.end(); ++it) {
      const facts::Instruction& i = *it->second;
      if (i.opcode != "jmp") continue;
      const facts::Indirect* m = ops.mem(i.ops[0]);
      if (!m || m->base != "RIP") continue;
      auto slot = slots.find(static_cast<Address>(m->disp));
      if (slot == slots.end()) continue;
      plt.emplace(i.addr, slot->second);
      auto prev = insns.find(i.addr - 4);
      if (prev != insns.end() && prev->second->opcode == "endbr64") plt.emplace(i.addr - 4, slot->second);
    }
  }
  out.plt.assign(plt.begin(), plt.end());
  for (const auto& [k, v] : facts.metadata)
    if (k == "weak") out.weak.insert(v);
  return out;
}

AsmProgram build_asm(const facts::FactBase& facts, const ibi::CodeLayout& layout,
                     const symbolization::Symbolization& symbols) {
  return Builder(facts, layout, symbols).run();
}

std::set<std::string> defined_labels(const AsmProgram& program) {
  std::set<std::string> out;
  for (const AsmSection& s : program.sections)
    for (const AsmItem& it : s.items)
      if (it.kind == ItemKind::label && is_local(it.text)) out.insert(it.text);
  return out;
}

std::set<std::string> referenced_labels(const AsmProgram& program) {
  std::set<std::string> out;
  for (const AsmSection& s : program.sections)
    for (const AsmItem& it : s.items)
      for (const LabelRef& r : it.refs) {
        if (is_local(r.label)) out.insert(r.label);
        if (is_local(r.minus)) out.insert(r.minus);
      }
  return out;
}

void check_labels(const AsmProgram& program) {
  std::set<std::string> seen;
  for (const AsmSection& s : program.sections)
    for (const AsmItem& it : s.items)
      if (it.kind == ItemKind::label && !seen.insert(it.text).second) throw UnresolvedLabel(it.text + " (defined twice)");
  std::set<std::string> defined = defined_labels(program);
  for (const std::string& l : referenced_labels(program))
    if (!defined.count(l)) throw UnresolvedLabel(l);
}

void print_asm(std::ostream& out, const AsmProgram& program) {
  out << ".intel_syntax noprefix\n";
  for (const std::string& w : program.weak) out << ".weak " << w << '\n';
  for (const AsmSection& s : program.sections) {
    out << "\n.section " << s.name << ",\"" << s.flags << "\"," << s.type << '\n';
    out << ".align " << s.align << '\n';
    for (const AsmItem& it : s.items) {
      switch (it.kind) {
        case ItemKind::label:
          if (!is_local(it.text)) out << ".globl " << it.text << '\n';
          out << it.text << ":\n";
          break;
        case ItemKind::instruction:
          if (!it.bytes.empty()) {
            print_bytes(out, it.bytes);
            break;
          }
          out << "  " << (it.prefix.empty() ? "" : it.prefix + " ") << it.text;
          for (std::size_t i = 0; i < it.args.size(); ++i) out << (i ? "," : " ") << it.args[i];
          out << '\n';
          break;
        case ItemKind::raw: print_bytes(out, it.bytes); break;
        case ItemKind::data: out << "  " << it.text << ' ' << it.args.at(0) << '\n'; break;
        case ItemKind::string: out << "  .string \"" << it.args.at(0) << "\"\n"; break;
        case ItemKind::zero: out << "  .zero " << it.count << '\n'; break;
      }
    }
  }
  out << "\n.section .note.GNU-stack,\"\",@progbits\n";
}

AsmProgram stretch(const AsmProgram& program, const StretchOptions& options) {
  AsmProgram out = program;
  auto protected_at = [&](Address a) {
    for (const auto& [lo, hi] : program.no_stretch)
      if (a >= lo && a < hi) return true;
    return false;
  };
  for (AsmSection& s : out.sections) {
    if (s.flags.find('x') != std::string::npos) {
      std::vector<AsmItem> items;
      int count = 0;
      for (AsmItem& it : s.items) {
        bool insn = it.kind == ItemKind::instruction;
        if (insn && it.block_start) count = 0;
        Address a = it.addr;
        items.push_back(std::move(it));
        if (!insn || ++count % options.every != 0 || protected_at(a)) continue;
        for (int k = 0; k < options.nops; ++k) {
          AsmItem nop;
          nop.kind = ItemKind::instruction;
          nop.text = "nop";
          items.push_back(std::move(nop));
        }
      }
      s.items = std::move(items);
      continue;
    }
    if (s.type == "@init_array" || s.type == "@fini_array") continue;
    AsmItem pad;
    pad.kind = ItemKind::zero;
    pad.count = options.padding;
    s.items.insert(s.items.begin(), pad);
  }
  return out;
}

bool operator==(const LabelRef& a, const LabelRef& b) {
  return a.label == b.label && a.offset == b.offset && a.minus == b.minus;
}

bool operator==(const AsmItem& a, const AsmItem& b) {
  return a.kind == b.kind && a.addr == b.addr && a.prefix == b.prefix && a.text == b.text && a.args == b.args &&
         a.refs == b.refs && a.bytes == b.bytes && a.count == b.count && a.block_start == b.block_start;
}

bool operator==(const AsmSection& a, const AsmSection& b) {
  return a.name == b.name && a.flags == b.flags && a.type == b.type && a.addr == b.addr && a.size == b.size &&
         a.align == b.align && a.items == b.items;
}

bool operator==(const AsmProgram& a, const AsmProgram& b) {
  return a.sections == b.sections && a.entry_label == b.entry_label && a.weak == b.weak && a.needed == b.needed &&
         a.no_stretch == b.no_stretch && a.warnings == b.warnings;
}

namespace {

using nlohmann::json;

constexpr const char* kItemKinds[] = {"label", "instruction", "raw", "data", "string", "zero"};

ItemKind item_kind(const std::string& s) {
  for (std::size_t i = 0; i < std::size(kItemKinds); ++i)
    if (s == kItemKinds[i]) return static_cast<ItemKind>(i);
  throw std::runtime_error("asm-db: unknown item kind '" + s + "'");
}

}  // namespace

void write_asm_db(std::ostream& out, const AsmProgram& program) {
  json j;
  j["format"] = "rdis-asm-db-1";
  j["entry_label"] = program.entry_label;
  j["weak"] = program.weak;
  j["needed"] = program.needed;
  j["no_stretch"] = program.no_stretch;
  j["warnings"] = program.warnings;
  j["sections"] = json::array();
  for (const AsmSection& s : program.sections) {
    json js = {{"name", s.name}, {"flags", s.flags}, {"type", s.type},
               {"addr", s.addr}, {"size", s.size},   {"align", s.align}};
    js["items"] = json::array();
    for (const AsmItem& it : s.items) {
      json ji = {{"kind", kItemKinds[static_cast<int>(it.kind)]}, {"addr", it.addr}};
      if (!it.prefix.empty()) ji["prefix"] = it.prefix;
      if (!it.text.empty()) ji["text"] = it.text;
      if (!it.args.empty()) ji["args"] = it.args;
      if (!it.bytes.empty()) ji["bytes"] = it.bytes;
      if (it.count) ji["count"] = it.count;
      if (it.block_start) ji["block_start"] = true;
      if (!it.refs.empty()) {
        ji["refs"] = json::array();
        for (const LabelRef& r : it.refs) ji["refs"].push_back({{"label", r.label}, {"offset", r.offset}, {"minus", r.minus}});
      }
      js["items"].push_back(std::move(ji));
    }
    j["sections"].push_back(std::move(js));
  }
  out << j.dump(1) << '\n';
}

AsmProgram read_asm_db(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("asm-db: ") + e.what());
  }
  if (j.value("format", "") != "rdis-asm-db-1") throw std::runtime_error("asm-db: unknown format");
  AsmProgram p;
  try {
    p.entry_label = j.at("entry_label").get<std::string>();
    p.weak = j.at("weak").get<std::vector<std::string>>();
    p.needed = j.at("needed").get<std::vector<std::string>>();
    p.no_stretch = j.at("no_stretch").get<std::vector<std::pair<Address, Address>>>();
    p.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const json& js : j.at("sections")) {
      AsmSection s;
      s.name = js.at("name");
      s.flags = js.at("flags");
      s.type = js.at("type");
      s.addr = js.at("addr");
      s.size = js.at("size");
      s.align = js.at("align");
      for (const json& ji : js.at("items")) {
        AsmItem it;
        it.kind = item_kind(ji.at("kind"));
        it.addr = ji.at("addr");
        it.prefix = ji.value("prefix", "");
        it.text = ji.value("text", "");
        it.args = ji.value("args", std::vector<std::string>{});
        it.bytes = ji.value("bytes", std::vector<std::uint8_t>{});
        it.count = ji.value("count", std::int64_t{0});
        it.block_start = ji.value("block_start", false);
        if (ji.contains("refs"))
          for (const json& r : ji.at("refs")) it.refs.push_back({r.at("label"), r.at("offset"), r.at("minus")});
        s.items.push_back(std::move(it));
      }
      p.sections.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("asm-db: ") + e.what());
  }
  return p;
}

std::vector<std::string> link_command(const AsmProgram& program, const std::string& asm_path,
                                      const std::string& out_path) {
  std::vector<std::string> cmd = {"gcc", "-nostartfiles", "-no-pie", "-o", out_path, asm_path};
  for (const std::string& n : program.needed) cmd.push_back("-l:" + n);
  return cmd;
}

void write_link_recipe(std::ostream& out, const AsmProgram& program, const std::string& asm_path,
                       const std::string& out_path) {
  out << "entry = " << program.entry_label << '\n';
  for (const std::string& n : program.needed) out << "needed = " << n << '\n';
  for (const AsmSection& s : program.sections)
    out << "section = " << s.name << " 0x" << hex(s.addr, false) << " 0x" << hex(s.size, false) << '\n';
  out << "link =";
  for (const std::string& a : link_command(program, asm_path, out_path)) out << ' ' << a;
  out << '\n';
}

}  // namespace rdis::emit
