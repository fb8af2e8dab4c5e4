#include "rdis/elf/decoder.hpp"

#include <array>
#include <cstring>

#include "rdis/facts/registers.hpp"

namespace rdis::elf {
namespace {

using facts::gpr_name;

constexpr std::array<const char*, 8> kAlu = {"add", "or", "adc", "sbb", "and", "sub", "xor", "cmp"};
constexpr std::array<const char*, 8> kShift = {"rol", "ror", "rcl", "rcr", "shl", "shr", "shl", "sar"};

std::string cond(int c) {
  static const char* names[16] = {"o", "no", "b", "ae", "e", "ne", "be", "a",
                                  "s", "ns", "p", "np", "l", "ge", "le", "g"};
  return names[c & 15];
}

struct Failure {};

class Decoder {
 public:
  Decoder(std::span<const std::uint8_t> bytes, std::uint64_t addr) : bytes_(bytes), addr_(addr) {}

  std::optional<Decoded> run() {
    try {
      prefixes();
      opcode();
      if (pos_ > 15) return std::nullopt;
      out_.length = static_cast<int>(pos_);
      for (Operand& op : out_.operands)
        if (op.kind == OperandKind::mem && op.mem.base == "RIP")
          op.mem.disp = static_cast<std::int64_t>(addr_ + pos_) + op.mem.disp;
      if (out_.relative_branch)
        out_.operands[0].imm = static_cast<std::int64_t>(addr_ + pos_) + out_.operands[0].imm;
      return out_;
    } catch (const Failure&) {
      return std::nullopt;
    }
  }

 private:
  std::uint8_t byte() {
    if (pos_ >= bytes_.size() || pos_ >= 15) throw Failure{};
    return bytes_[pos_++];
  }

  std::int64_t signed_imm(int size) {
    std::uint64_t v = 0;
    for (int i = 0; i < size; ++i) v |= static_cast<std::uint64_t>(byte()) << (8 * i);
    if (size < 8) {
      std::uint64_t sign = 1ULL << (8 * size - 1);
      if (v & sign) v |= ~((sign << 1) - 1);
    }
    return static_cast<std::int64_t>(v);
  }

  std::int64_t read_imm(int size, bool zero_extend = false) {
    out_.imm_offset = static_cast<int>(pos_);
    out_.imm_size = size;
    std::int64_t v = signed_imm(size);
    if (zero_extend && size < 8) v &= static_cast<std::int64_t>((1ULL << (8 * size)) - 1);
    return v;
  }

  void prefixes() {
    while (true) {
      if (pos_ >= bytes_.size()) throw Failure{};
      std::uint8_t b = bytes_[pos_];
      switch (b) {
        case 0xf0: lock_ = true; break;
        case 0xf2: rep_ = 0xf2; last_mandatory_ = 0xf2; break;
        case 0xf3: rep_ = 0xf3; last_mandatory_ = 0xf3; break;
        case 0x66: opsize_ = true; if (!last_mandatory_) last_mandatory_ = 0x66; break;
        case 0x67: throw Failure{};
        case 0x2e: seg_ = "CS"; break;
        case 0x36: seg_ = "SS"; break;
        case 0x3e: seg_ = "DS"; break;
        case 0x26: seg_ = "ES"; break;
        case 0x64: seg_ = "FS"; break;
        case 0x65: seg_ = "GS"; break;
        default:
          if ((b & 0xf0) == 0x40) {
            rex_ = true;
            w_ = b & 8;
            r_ = (b & 4) ? 8 : 0;
            x_ = (b & 2) ? 8 : 0;
            b_ = (b & 1) ? 8 : 0;
            ++pos_;
            if (pos_ < bytes_.size() && (bytes_[pos_] & 0xf0) == 0x40) throw Failure{};
          }
          return;
      }
      ++pos_;
    }
  }

  int osize() const { return w_ ? 8 : (opsize_ ? 2 : 4); }

  Operand reg(int number, int width) {
    Operand o;
    o.kind = OperandKind::reg;
    o.reg = std::string(gpr_name(number, width, rex_));
    o.size = width;
    return o;
  }

  Operand xmm(int number) {
    Operand o;
    o.kind = OperandKind::reg;
    o.reg = "XMM" + std::to_string(number);
    o.size = 16;
    return o;
  }

  Operand imm(std::int64_t v, int size) {
    Operand o;
    o.kind = OperandKind::imm;
    o.imm = v;
    o.size = size;
    return o;
  }

  struct ModRM {
    int mod = 0;
    int reg = 0;  // includes REX.R
    int rm = 0;   // includes REX.B when mod == 3
    Operand mem;
  };

  ModRM modrm() {
    std::uint8_t m = byte();
    ModRM r;
    r.mod = m >> 6;
    r.reg = ((m >> 3) & 7) | r_;
    int rm = m & 7;
    if (r.mod == 3) {
      r.rm = rm | b_;
      return r;
    }
    MemRef ref;
    ref.seg = seg_;
    int disp_size = 0;
    if (rm == 4) {
      std::uint8_t sib = byte();
      int scale = 1 << (sib >> 6);
      int index = ((sib >> 3) & 7) | x_;
      int base = (sib & 7) | b_;
      if (index != 4) {
        ref.index = std::string(gpr_name(index, 8, true));
        ref.scale = scale;
      }
      if ((base & 7) == 5 && r.mod == 0) {
        disp_size = 4;
      } else {
        ref.base = std::string(gpr_name(base, 8, true));
      }
    } else if (rm == 5 && r.mod == 0) {
      ref.base = "RIP";
      disp_size = 4;
    } else {
      ref.base = std::string(gpr_name(rm | b_, 8, true));
    }
    if (r.mod == 1) disp_size = 1;
    if (r.mod == 2) disp_size = 4;
    if (disp_size) {
      out_.disp_offset = static_cast<int>(pos_);
      out_.disp_size = disp_size;
      ref.disp = signed_imm(disp_size);
    }
    r.mem.kind = OperandKind::mem;
    r.mem.mem = ref;
    return r;
  }

  Operand rm_operand(const ModRM& m, int width) {
    if (m.mod == 3) return reg(m.rm, width);
    Operand o = m.mem;
    o.mem.size = width;
    o.size = width;
    return o;
  }

  Operand rm_xmm(const ModRM& m, int width) {
    if (m.mod == 3) return xmm(m.rm);
    Operand o = m.mem;
    o.mem.size = width;
    o.size = width;
    return o;
  }

  void emit(const std::string& mnemonic, std::vector<Operand> ops) {
    out_.mnemonic = mnemonic;
    out_.operands = std::move(ops);
  }

  void no_rep() {
    if (rep_) throw Failure{};
  }

  void string_op(const char* name, int width, bool compare) {
    if (rep_ == 0xf3) out_.prefix = compare ? "repe" : "rep";
    if (rep_ == 0xf2) {
      if (!compare) throw Failure{};
      out_.prefix = "repne";
    }
    MemRef dst;
    dst.seg = "ES";
    dst.base = "RDI";
    dst.size = width;
    MemRef src;
    src.seg = seg_ == "NONE" ? "DS" : seg_;
    src.base = "RSI";
    src.size = width;
    Operand d{OperandKind::mem, {}, 0, dst, width};
    Operand s{OperandKind::mem, {}, 0, src, width};
    std::string n = name;
    if (n == "stos") emit(n, {d, reg(0, width)});
    else if (n == "lods") emit(n, {reg(0, width), s});
    else if (n == "scas") emit(n, {reg(0, width), d});
    else if (n == "movs") emit(n, {d, s});
    else emit(n, {s, d});
  }

  void opcode() {
    std::uint8_t op = byte();
    if (lock_) out_.prefix = "lock";
    if (op == 0x0f) return two_byte();
    int os = osize();

    if (op < 0x40 && (op & 7) < 6) {
      no_rep();
      std::string name = kAlu[op >> 3];
      switch (op & 7) {
        case 0: { auto m = modrm(); return emit(name, {rm_operand(m, 1), reg(m.reg, 1)}); }
        case 1: { auto m = modrm(); return emit(name, {rm_operand(m, os), reg(m.reg, os)}); }
        case 2: { auto m = modrm(); return emit(name, {reg(m.reg, 1), rm_operand(m, 1)}); }
        case 3: { auto m = modrm(); return emit(name, {reg(m.reg, os), rm_operand(m, os)}); }
        case 4: return emit(name, {reg(0, 1), imm(read_imm(1), 1)});
        case 5: return emit(name, {reg(0, os), imm(read_imm(os == 2 ? 2 : 4), os)});
      }
    }
    if (op >= 0x50 && op <= 0x57) { no_rep(); return emit("push", {reg((op & 7) | b_, opsize_ ? 2 : 8)}); }
    if (op >= 0x58 && op <= 0x5f) { no_rep(); return emit("pop", {reg((op & 7) | b_, opsize_ ? 2 : 8)}); }
    if (op >= 0x70 && op <= 0x7f) {
      no_rep();
      out_.relative_branch = true;
      return emit("j" + cond(op & 15), {imm(read_imm(1), 8)});
    }
    if (op >= 0x91 && op <= 0x97) { no_rep(); return emit("xchg", {reg((op & 7) | b_, os), reg(0, os)}); }
    if (op >= 0xb0 && op <= 0xb7) { no_rep(); return emit("mov", {reg((op & 7) | b_, 1), imm(read_imm(1), 1)}); }
    if (op >= 0xb8 && op <= 0xbf) {
      no_rep();
      int r = (op & 7) | b_;
      if (w_) return emit("movabs", {reg(r, 8), imm(read_imm(8), 8)});
      return emit("mov", {reg(r, os), imm(read_imm(os, os == 4), os)});
    }

    switch (op) {
      case 0x63: {
        no_rep();
        if (!w_) throw Failure{};
        auto m = modrm();
        return emit("movsxd", {reg(m.reg, 8), rm_operand(m, 4)});
      }
      case 0x68: no_rep(); return emit("push", {imm(read_imm(opsize_ ? 2 : 4), opsize_ ? 2 : 8)});
      case 0x6a: no_rep(); return emit("push", {imm(read_imm(1), opsize_ ? 2 : 8)});
      case 0x69:
      case 0x6b: {
        no_rep();
        auto m = modrm();
        Operand src = rm_operand(m, os);
        return emit("imul", {reg(m.reg, os), src, imm(read_imm(op == 0x6b ? 1 : (os == 2 ? 2 : 4)), os)});
      }
      case 0x80:
      case 0x81:
      case 0x83: {
        no_rep();
        auto m = modrm();
        int w = op == 0x80 ? 1 : os;
        Operand dst = rm_operand(m, w);
        int isz = op == 0x81 ? (os == 2 ? 2 : 4) : 1;
        return emit(kAlu[m.reg & 7], {dst, imm(read_imm(isz), w)});
      }
      case 0x84: { no_rep(); auto m = modrm(); return emit("test", {rm_operand(m, 1), reg(m.reg, 1)}); }
      case 0x85: { no_rep(); auto m = modrm(); return emit("test", {rm_operand(m, os), reg(m.reg, os)}); }
      case 0x86: { no_rep(); auto m = modrm(); return emit("xchg", {rm_operand(m, 1), reg(m.reg, 1)}); }
      case 0x87: { no_rep(); auto m = modrm(); return emit("xchg", {rm_operand(m, os), reg(m.reg, os)}); }
      case 0x88: { no_rep(); auto m = modrm(); return emit("mov", {rm_operand(m, 1), reg(m.reg, 1)}); }
      case 0x89: { no_rep(); auto m = modrm(); return emit("mov", {rm_operand(m, os), reg(m.reg, os)}); }
      case 0x8a: { no_rep(); auto m = modrm(); return emit("mov", {reg(m.reg, 1), rm_operand(m, 1)}); }
      case 0x8b: { no_rep(); auto m = modrm(); return emit("mov", {reg(m.reg, os), rm_operand(m, os)}); }
      case 0x8d: {
        no_rep();
        auto m = modrm();
        if (m.mod == 3) throw Failure{};
        return emit("lea", {reg(m.reg, os), rm_operand(m, os)});
      }
      case 0x8f: {
        no_rep();
        auto m = modrm();
        if ((m.reg & 7) != 0) throw Failure{};
        return emit("pop", {rm_operand(m, 8)});
      }
      case 0x90:
        if (b_) return emit("xchg", {reg(8, os), reg(0, os)});
        if (rep_ == 0xf3) return emit("pause", {});
        no_rep();
        return emit("nop", {});
      case 0x98: no_rep(); return emit(w_ ? "cdqe" : (opsize_ ? "cbw" : "cwde"), {});
      case 0x99: no_rep(); return emit(w_ ? "cqo" : (opsize_ ? "cwd" : "cdq"), {});
      case 0xa8: no_rep(); return emit("test", {reg(0, 1), imm(read_imm(1), 1)});
      case 0xa9: no_rep(); return emit("test", {reg(0, os), imm(read_imm(os == 2 ? 2 : 4), os)});
      case 0xa4: return string_op("movs", 1, false);
      case 0xa5: return string_op("movs", os, false);
      case 0xaa: return string_op("stos", 1, false);
      case 0xab: return string_op("stos", os, false);
      case 0xac: return string_op("lods", 1, false);
      case 0xad: return string_op("lods", os, false);
      case 0xa6: return string_op("cmps", 1, true);
      case 0xa7: return string_op("cmps", os, true);
      case 0xae: return string_op("scas", 1, true);
      case 0xaf: return string_op("scas", os, true);
      case 0xc0:
      case 0xc1:
      case 0xd0:
      case 0xd1:
      case 0xd2:
      case 0xd3: {
        no_rep();
        auto m = modrm();
        int w = (op & 1) ? os : 1;
        Operand dst = rm_operand(m, w);
        const char* name = kShift[m.reg & 7];
        if (op <= 0xc1) return emit(name, {dst, imm(read_imm(1), 1)});
        if (op <= 0xd1) return emit(name, {dst, imm(1, 1)});
        return emit(name, {dst, reg(1, 1)});
      }
      case 0xc2:
        if (rep_ == 0xf2) out_.prefix = "bnd";
        else no_rep();
        return emit("ret", {imm(read_imm(2, true), 2)});
      case 0xc3:
        if (rep_ == 0xf2) out_.prefix = "bnd";
        else if (rep_ == 0xf3) out_.prefix = "rep";
        return emit("ret", {});
      case 0xc6:
      case 0xc7: {
        no_rep();
        auto m = modrm();
        if ((m.reg & 7) != 0) throw Failure{};
        int w = op == 0xc6 ? 1 : os;
        Operand dst = rm_operand(m, w);
        return emit("mov", {dst, imm(read_imm(w == 8 ? 4 : w), w)});
      }
      case 0xc9: no_rep(); return emit("leave", {});
      case 0xcc: no_rep(); return emit("int3", {});
      case 0xcd: no_rep(); return emit("int", {imm(read_imm(1, true), 1)});
      case 0xe8:
        if (rep_ == 0xf2) out_.prefix = "bnd";
        else no_rep();
        out_.relative_branch = true;
        return emit("call", {imm(read_imm(4), 8)});
      case 0xe9:
        if (rep_ == 0xf2) out_.prefix = "bnd";
        else no_rep();
        out_.relative_branch = true;
        return emit("jmp", {imm(read_imm(4), 8)});
      case 0xeb:
        no_rep();
        out_.relative_branch = true;
        return emit("jmp", {imm(read_imm(1), 8)});
      case 0xe0:
      case 0xe1:
      case 0xe2:
      case 0xe3: {
        no_rep();
        static const char* names[] = {"loopne", "loope", "loop", "jrcxz"};
        out_.relative_branch = true;
        return emit(names[op - 0xe0], {imm(read_imm(1), 8)});
      }
      case 0xf4: no_rep(); return emit("hlt", {});
      case 0xf6:
      case 0xf7: {
        no_rep();
        auto m = modrm();
        int w = op == 0xf6 ? 1 : os;
        Operand dst = rm_operand(m, w);
        switch (m.reg & 7) {
          case 0:
          case 1: return emit("test", {dst, imm(read_imm(w == 8 ? 4 : w), w)});
          case 2: return emit("not", {dst});
          case 3: return emit("neg", {dst});
          case 4: return emit("mul", {dst});
          case 5: return emit("imul", {dst});
          case 6: return emit("div", {dst});
          case 7: return emit("idiv", {dst});
        }
        break;
      }
      case 0xfe: {
        no_rep();
        auto m = modrm();
        if ((m.reg & 7) > 1) throw Failure{};
        return emit((m.reg & 7) ? "dec" : "inc", {rm_operand(m, 1)});
      }
      case 0xff: {
        auto m = modrm();
        switch (m.reg & 7) {
          case 0: no_rep(); return emit("inc", {rm_operand(m, os)});
          case 1: no_rep(); return emit("dec", {rm_operand(m, os)});
          case 2:
          case 4:
            if (rep_ == 0xf2) out_.prefix = "bnd";
            else no_rep();
            return emit((m.reg & 7) == 2 ? "call" : "jmp", {rm_operand(m, 8)});
          case 6: no_rep(); return emit("push", {rm_operand(m, 8)});
          default: throw Failure{};
        }
      }
      default: break;
    }
    throw Failure{};
  }

  struct SseForm {
    enum Kind : std::uint8_t { xm, mx, xg, gx, gxm, xmi, gxr } kind;
    const char* name;
    int size;
  };

  static bool sse_entry(int pfx, int op, SseForm& f) {
    struct Entry {
      int pfx;
      int op;
      SseForm form;
    };
    static const Entry table[] = {
        {0, 0x10, {SseForm::xm, "movups", 16}},     {0x66, 0x10, {SseForm::xm, "movupd", 16}},
        {0xf3, 0x10, {SseForm::xm, "movss", 4}},    {0xf2, 0x10, {SseForm::xm, "movsd", 8}},
        {0, 0x11, {SseForm::mx, "movups", 16}},     {0x66, 0x11, {SseForm::mx, "movupd", 16}},
        {0xf3, 0x11, {SseForm::mx, "movss", 4}},    {0xf2, 0x11, {SseForm::mx, "movsd", 8}},
        {0x66, 0x12, {SseForm::xm, "movlpd", 8}},   {0x66, 0x13, {SseForm::mx, "movlpd", 8}},
        {0, 0x13, {SseForm::mx, "movlps", 8}},
        {0, 0x14, {SseForm::xm, "unpcklps", 16}},   {0x66, 0x14, {SseForm::xm, "unpcklpd", 16}},
        {0, 0x15, {SseForm::xm, "unpckhps", 16}},   {0x66, 0x15, {SseForm::xm, "unpckhpd", 16}},
        {0x66, 0x16, {SseForm::xm, "movhpd", 8}},   {0, 0x17, {SseForm::mx, "movhps", 8}},
        {0x66, 0x17, {SseForm::mx, "movhpd", 8}},
        {0, 0x28, {SseForm::xm, "movaps", 16}},     {0x66, 0x28, {SseForm::xm, "movapd", 16}},
        {0, 0x29, {SseForm::mx, "movaps", 16}},     {0x66, 0x29, {SseForm::mx, "movapd", 16}},
        {0xf3, 0x2a, {SseForm::xg, "cvtsi2ss", 0}}, {0xf2, 0x2a, {SseForm::xg, "cvtsi2sd", 0}},
        {0xf3, 0x2c, {SseForm::gxm, "cvttss2si", 4}}, {0xf2, 0x2c, {SseForm::gxm, "cvttsd2si", 8}},
        {0xf3, 0x2d, {SseForm::gxm, "cvtss2si", 4}},  {0xf2, 0x2d, {SseForm::gxm, "cvtsd2si", 8}},
        {0, 0x2e, {SseForm::xm, "ucomiss", 4}},     {0x66, 0x2e, {SseForm::xm, "ucomisd", 8}},
        {0, 0x2f, {SseForm::xm, "comiss", 4}},      {0x66, 0x2f, {SseForm::xm, "comisd", 8}},
        {0, 0x50, {SseForm::gxr, "movmskps", 16}},  {0x66, 0x50, {SseForm::gxr, "movmskpd", 16}},
        {0, 0x51, {SseForm::xm, "sqrtps", 16}},     {0x66, 0x51, {SseForm::xm, "sqrtpd", 16}},
        {0xf3, 0x51, {SseForm::xm, "sqrtss", 4}},   {0xf2, 0x51, {SseForm::xm, "sqrtsd", 8}},
        {0, 0x54, {SseForm::xm, "andps", 16}},      {0x66, 0x54, {SseForm::xm, "andpd", 16}},
        {0, 0x55, {SseForm::xm, "andnps", 16}},     {0x66, 0x55, {SseForm::xm, "andnpd", 16}},
        {0, 0x56, {SseForm::xm, "orps", 16}},       {0x66, 0x56, {SseForm::xm, "orpd", 16}},
        {0, 0x57, {SseForm::xm, "xorps", 16}},      {0x66, 0x57, {SseForm::xm, "xorpd", 16}},
        {0, 0x58, {SseForm::xm, "addps", 16}},      {0x66, 0x58, {SseForm::xm, "addpd", 16}},
        {0xf3, 0x58, {SseForm::xm, "addss", 4}},    {0xf2, 0x58, {SseForm::xm, "addsd", 8}},
        {0, 0x59, {SseForm::xm, "mulps", 16}},      {0x66, 0x59, {SseForm::xm, "mulpd", 16}},
        {0xf3, 0x59, {SseForm::xm, "mulss", 4}},    {0xf2, 0x59, {SseForm::xm, "mulsd", 8}},
        {0, 0x5a, {SseForm::xm, "cvtps2pd", 8}},    {0x66, 0x5a, {SseForm::xm, "cvtpd2ps", 16}},
        {0xf3, 0x5a, {SseForm::xm, "cvtss2sd", 4}}, {0xf2, 0x5a, {SseForm::xm, "cvtsd2ss", 8}},
        {0, 0x5b, {SseForm::xm, "cvtdq2ps", 16}},   {0x66, 0x5b, {SseForm::xm, "cvtps2dq", 16}},
        {0xf3, 0x5b, {SseForm::xm, "cvttps2dq", 16}},
        {0, 0x5c, {SseForm::xm, "subps", 16}},      {0x66, 0x5c, {SseForm::xm, "subpd", 16}},
        {0xf3, 0x5c, {SseForm::xm, "subss", 4}},    {0xf2, 0x5c, {SseForm::xm, "subsd", 8}},
        {0, 0x5d, {SseForm::xm, "minps", 16}},      {0x66, 0x5d, {SseForm::xm, "minpd", 16}},
        {0xf3, 0x5d, {SseForm::xm, "minss", 4}},    {0xf2, 0x5d, {SseForm::xm, "minsd", 8}},
        {0, 0x5e, {SseForm::xm, "divps", 16}},      {0x66, 0x5e, {SseForm::xm, "divpd", 16}},
        {0xf3, 0x5e, {SseForm::xm, "divss", 4}},    {0xf2, 0x5e, {SseForm::xm, "divsd", 8}},
        {0, 0x5f, {SseForm::xm, "maxps", 16}},      {0x66, 0x5f, {SseForm::xm, "maxpd", 16}},
        {0xf3, 0x5f, {SseForm::xm, "maxss", 4}},    {0xf2, 0x5f, {SseForm::xm, "maxsd", 8}},
        {0x66, 0x60, {SseForm::xm, "punpcklbw", 16}}, {0x66, 0x61, {SseForm::xm, "punpcklwd", 16}},
        {0x66, 0x62, {SseForm::xm, "punpckldq", 16}}, {0x66, 0x63, {SseForm::xm, "packsswb", 16}},
        {0x66, 0x64, {SseForm::xm, "pcmpgtb", 16}},   {0x66, 0x65, {SseForm::xm, "pcmpgtw", 16}},
        {0x66, 0x66, {SseForm::xm, "pcmpgtd", 16}},   {0x66, 0x67, {SseForm::xm, "packuswb", 16}},
        {0x66, 0x68, {SseForm::xm, "punpckhbw", 16}}, {0x66, 0x69, {SseForm::xm, "punpckhwd", 16}},
        {0x66, 0x6a, {SseForm::xm, "punpckhdq", 16}}, {0x66, 0x6b, {SseForm::xm, "packssdw", 16}},
        {0x66, 0x6c, {SseForm::xm, "punpcklqdq", 16}}, {0x66, 0x6d, {SseForm::xm, "punpckhqdq", 16}},
        {0x66, 0x6e, {SseForm::xg, "movd", 0}},
        {0x66, 0x6f, {SseForm::xm, "movdqa", 16}},    {0xf3, 0x6f, {SseForm::xm, "movdqu", 16}},
        {0x66, 0x70, {SseForm::xmi, "pshufd", 16}},   {0xf2, 0x70, {SseForm::xmi, "pshuflw", 16}},
        {0xf3, 0x70, {SseForm::xmi, "pshufhw", 16}},
        {0x66, 0x74, {SseForm::xm, "pcmpeqb", 16}},   {0x66, 0x75, {SseForm::xm, "pcmpeqw", 16}},
        {0x66, 0x76, {SseForm::xm, "pcmpeqd", 16}},
        {0x66, 0x7e, {SseForm::gx, "movd", 0}},       {0xf3, 0x7e, {SseForm::xm, "movq", 8}},
        {0x66, 0x7f, {SseForm::mx, "movdqa", 16}},    {0xf3, 0x7f, {SseForm::mx, "movdqu", 16}},
        {0, 0xc2, {SseForm::xmi, "cmpps", 16}},       {0x66, 0xc2, {SseForm::xmi, "cmppd", 16}},
        {0xf3, 0xc2, {SseForm::xmi, "cmpss", 4}},     {0xf2, 0xc2, {SseForm::xmi, "cmpsd", 8}},
        {0, 0xc6, {SseForm::xmi, "shufps", 16}},      {0x66, 0xc6, {SseForm::xmi, "shufpd", 16}},
        {0x66, 0xd4, {SseForm::xm, "paddq", 16}},     {0x66, 0xd6, {SseForm::mx, "movq", 8}},
        {0x66, 0xd7, {SseForm::gxr, "pmovmskb", 16}}, {0x66, 0xda, {SseForm::xm, "pminub", 16}},
        {0x66, 0xdb, {SseForm::xm, "pand", 16}},      {0x66, 0xde, {SseForm::xm, "pmaxub", 16}},
        {0x66, 0xdf, {SseForm::xm, "pandn", 16}},     {0x66, 0xe7, {SseForm::mx, "movntdq", 16}},
        {0x66, 0xeb, {SseForm::xm, "por", 16}},       {0x66, 0xef, {SseForm::xm, "pxor", 16}},
        {0x66, 0xf8, {SseForm::xm, "psubb", 16}},     {0x66, 0xfa, {SseForm::xm, "psubd", 16}},
        {0x66, 0xfb, {SseForm::xm, "psubq", 16}},     {0x66, 0xfc, {SseForm::xm, "paddb", 16}},
        {0x66, 0xfe, {SseForm::xm, "paddd", 16}},
    };
    for (const Entry& e : table)
      if (e.pfx == pfx && e.op == op) {
        f = e.form;
        return true;
      }
    return false;
  }

  void sse(std::uint8_t op) {
    int pfx = last_mandatory_;
    if (pfx == 0 && (op == 0x12 || op == 0x16)) {
      auto m = modrm();
      if (m.mod == 3) return emit(op == 0x12 ? "movhlps" : "movlhps", {xmm(m.reg), xmm(m.rm)});
      return emit(op == 0x12 ? "movlps" : "movhps", {xmm(m.reg), rm_xmm(m, 8)});
    }
    SseForm f;
    if (!sse_entry(pfx, op, f)) throw Failure{};
    rep_ = 0;
    auto m = modrm();
    int gw = w_ ? 8 : 4;
    switch (f.kind) {
      case SseForm::xm: return emit(f.name, {xmm(m.reg), rm_xmm(m, f.size)});
      case SseForm::mx: return emit(f.name, {rm_xmm(m, f.size), xmm(m.reg)});
      case SseForm::xg: {
        std::string name = f.name;
        if (name == "movd" && w_) name = "movq";
        return emit(name, {xmm(m.reg), rm_operand(m, gw)});
      }
      case SseForm::gx: {
        std::string name = w_ ? "movq" : "movd";
        return emit(name, {rm_operand(m, gw), xmm(m.reg)});
      }
      case SseForm::gxm: return emit(f.name, {reg(m.reg, gw), rm_xmm(m, f.size)});
      case SseForm::gxr:
        if (m.mod != 3) throw Failure{};
        return emit(f.name, {reg(m.reg, 4), xmm(m.rm)});
      case SseForm::xmi: {
        Operand src = rm_xmm(m, f.size);
        return emit(f.name, {xmm(m.reg), src, imm(read_imm(1, true), 1)});
      }
    }
  }

  void two_byte() {
    std::uint8_t op = byte();
    int os = osize();
    if (op >= 0x40 && op <= 0x4f) {
      no_rep();
      auto m = modrm();
      return emit("cmov" + cond(op & 15), {reg(m.reg, os), rm_operand(m, os)});
    }
    if (op >= 0x80 && op <= 0x8f) {
      if (rep_ == 0xf2) out_.prefix = "bnd";
      else no_rep();
      out_.relative_branch = true;
      return emit("j" + cond(op & 15), {imm(read_imm(4), 8)});
    }
    if (op >= 0x90 && op <= 0x9f) {
      no_rep();
      auto m = modrm();
      return emit("set" + cond(op & 15), {rm_operand(m, 1)});
    }
    if (op >= 0xc8 && op <= 0xcf) { no_rep(); return emit("bswap", {reg((op & 7) | b_, os)}); }
    switch (op) {
      case 0x05: no_rep(); return emit("syscall", {});
      case 0x0b: no_rep(); return emit("ud2", {});
      case 0xa2: no_rep(); return emit("cpuid", {});
      case 0x1e:
        if (rep_ == 0xf3 && pos_ < bytes_.size() && bytes_[pos_] == 0xfa) {
          ++pos_;
          return emit("endbr64", {});
        }
        throw Failure{};
      case 0x1f: {
        no_rep();
        auto m = modrm();
        return emit("nop", {rm_operand(m, os)});
      }
      case 0xa3:
      case 0xab:
      case 0xb3:
      case 0xbb: {
        no_rep();
        static const char* names[] = {"bt", "bts", "btr", "btc"};
        auto m = modrm();
        return emit(names[(op >> 3) & 3], {rm_operand(m, os), reg(m.reg, os)});
      }
      case 0xba: {
        no_rep();
        auto m = modrm();
        if ((m.reg & 7) < 4) throw Failure{};
        static const char* names[] = {"bt", "bts", "btr", "btc"};
        Operand dst = rm_operand(m, os);
        return emit(names[(m.reg & 7) - 4], {dst, imm(read_imm(1, true), 1)});
      }
      case 0xa4:
      case 0xac: {
        no_rep();
        auto m = modrm();
        Operand dst = rm_operand(m, os);
        return emit(op == 0xa4 ? "shld" : "shrd", {dst, reg(m.reg, os), imm(read_imm(1, true), 1)});
      }
      case 0xa5:
      case 0xad: {
        no_rep();
        auto m = modrm();
        return emit(op == 0xa5 ? "shld" : "shrd", {rm_operand(m, os), reg(m.reg, os), reg(1, 1)});
      }
      case 0xaf: { no_rep(); auto m = modrm(); return emit("imul", {reg(m.reg, os), rm_operand(m, os)}); }
      case 0xb0: { no_rep(); auto m = modrm(); return emit("cmpxchg", {rm_operand(m, 1), reg(m.reg, 1)}); }
      case 0xb1: { no_rep(); auto m = modrm(); return emit("cmpxchg", {rm_operand(m, os), reg(m.reg, os)}); }
      case 0xc0: { no_rep(); auto m = modrm(); return emit("xadd", {rm_operand(m, 1), reg(m.reg, 1)}); }
      case 0xc1: { no_rep(); auto m = modrm(); return emit("xadd", {rm_operand(m, os), reg(m.reg, os)}); }
      case 0xb6:
      case 0xb7:
      case 0xbe:
      case 0xbf: {
        no_rep();
        auto m = modrm();
        int src = (op & 1) ? 2 : 1;
        return emit(op < 0xbe ? "movzx" : "movsx", {reg(m.reg, os), rm_operand(m, src)});
      }
      case 0xb8: {
        if (rep_ != 0xf3) throw Failure{};
        rep_ = 0;
        auto m = modrm();
        return emit("popcnt", {reg(m.reg, os), rm_operand(m, os)});
      }
      case 0xbc:
      case 0xbd: {
        const char* name = op == 0xbc ? "bsf" : "bsr";
        if (rep_ == 0xf3) name = op == 0xbc ? "tzcnt" : "lzcnt";
        else no_rep();
        rep_ = 0;
        auto m = modrm();
        return emit(name, {reg(m.reg, os), rm_operand(m, os)});
      }
      case 0x71:
      case 0x72:
      case 0x73: {
        if (last_mandatory_ != 0x66) throw Failure{};
        auto m = modrm();
        if (m.mod != 3) throw Failure{};
        static const char* names[3][8] = {
            {nullptr, nullptr, "psrlw", nullptr, "psraw", nullptr, "psllw", nullptr},
            {nullptr, nullptr, "psrld", nullptr, "psrad", nullptr, "pslld", nullptr},
            {nullptr, nullptr, "psrlq", "psrldq", nullptr, nullptr, "psllq", "pslldq"}};
        const char* name = names[op - 0x71][m.reg & 7];
        if (!name) throw Failure{};
        return emit(name, {xmm(m.rm), imm(read_imm(1, true), 1)});
      }
      default: break;
    }
    return sse(op);
  }

  std::span<const std::uint8_t> bytes_;
  std::uint64_t addr_;
  std::size_t pos_ = 0;
  bool rex_ = false;
  bool w_ = false;
  int r_ = 0, x_ = 0, b_ = 0;
  bool opsize_ = false;
  bool lock_ = false;
  int rep_ = 0;
  int last_mandatory_ = 0;
  std::string seg_ = "NONE";
  Decoded out_;
};

}  // namespace

std::optional<Decoded> decode(std::span<const std::uint8_t> bytes, std::uint64_t addr) {
  return Decoder(bytes, addr).run();
}

}  // namespace rdis::elf
