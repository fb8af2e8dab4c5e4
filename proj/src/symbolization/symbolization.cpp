#include "rdis/symbolization/symbolization.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include "rdis/facts/registers.hpp"
#include "rdis/relfix/engine.hpp"

namespace rdis::symbolization {
namespace {

using namespace relfix;
constexpr auto A = ColumnKind::address;
constexpr auto N = ColumnKind::number;
constexpr auto T = ColumnKind::text;
constexpr Value kValueBound = Value{1} << 46;

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::uppercase << v;
  return s.str();
}

std::string signed_hex(std::int64_t v) {
  if (v < 0) return "-0x" + hex(static_cast<std::uint64_t>(0) - static_cast<std::uint64_t>(v));
  return "0x" + hex(static_cast<std::uint64_t>(v));
}

bool printable(std::uint8_t b) { return (b >= 0x20 && b <= 0x7e) || b == '\t' || b == '\n'; }

CandidateKind kind_from(std::string_view s) {
  if (s == "Symbol") return CandidateKind::symbol;
  if (s == "String") return CandidateKind::string;
  if (s == "SymbolSymbol") return CandidateKind::symbol_symbol;
  return CandidateKind::other;
}

int kind_rank(CandidateKind k) {
  switch (k) {
    case CandidateKind::symbol_symbol: return 0;
    case CandidateKind::symbol: return 1;
    case CandidateKind::string: return 2;
    case CandidateKind::other: return 3;
  }
  return 4;
}

}  // namespace

std::string_view kind_name(CandidateKind kind) {
  switch (kind) {
    case CandidateKind::symbol: return "Symbol";
    case CandidateKind::string: return "String";
    case CandidateKind::symbol_symbol: return "SymbolSymbol";
    case CandidateKind::other: return "Other";
  }
  return "Other";
}

std::string_view context_name(Context c) {
  switch (c) {
    case Context::data: return "data";
    case Context::immediate: return "immediate";
    case Context::displacement: return "displacement";
  }
  return "data";
}

std::string SymbolicExpr::render() const {
  switch (kind) {
    case Kind::literal: return signed_hex(value);
    case Kind::sym_plus: {
      std::string s = ".L_" + hex(target);
      if (offset > 0) s += "+" + std::to_string(offset);
      if (offset < 0) s += std::to_string(offset);
      return s;
    }
    case Kind::sym_minus_sym: return ".L_" + hex(target) + "-.L_" + hex(reference);
  }
  return {};
}

const Decision* Symbolization::find(Address addr, int operand, Context context) const {
  auto it = std::lower_bound(decisions.begin(), decisions.end(), std::make_tuple(addr, operand, context),
                             [](const Decision& d, const std::tuple<Address, int, Context>& k) {
                               return std::make_tuple(d.addr, d.operand, d.context) < k;
                             });
  if (it != decisions.end() && it->addr == addr && it->operand == operand && it->context == context) return &*it;
  return nullptr;
}

Program build_program(const SymbolizationOptions& options) {
  const SymbolizationWeights& w = options.weights;
  Program p;
  facts::FactRelations f = facts::declare_fact_inputs(p);
  auto instruction_operand = p.input("instruction_operand", {A, N, N});
  auto section_range = p.input("section_range", {A, A});
  auto code_in_block = p.input("code_in_block", {A, A});
  auto block = p.input("block", {A, A});
  auto data_region = p.input("data_region", {A, A});
  auto jump_op = p.input("jump_operation", {T});
  auto call_op = p.input("call_operation", {T});
  auto reg_full = p.input("register_alias", {T, T, N});
  auto def = p.input("def", {A, T});
  auto def_used = p.input("def_used", {A, T, A, N});
  auto dua = p.input("def_used_for_address", {A, T});
  auto reg_jump = p.input("reg_jump", {A, T});
  auto reg_reg_op = p.input("reg_reg_op", {A, T, T, T, N, N});
  auto reg_val = p.input("reg_val", {A, T, A, T, N, N, N});
  auto use_val = p.input("use_value", {A, N, T, T, N, N});
  auto dap = p.input("data_access_pattern", {A, N, N, A});
  auto pda = p.input("propagated_data_access", {A, N, N, A});
  auto string_candidate = p.input("string_candidate", {A, N});
  auto memory_value = p.input("memory_value", {A, N, N, N});
  auto special_range = p.input("special_section_range", {A, A});
  auto preliminary = p.input("preliminary_mode", {N});

  auto data_section = p.relation("data_section", {A, A});
  auto located = p.relation("data_location", {A, N});
  auto signed_load = p.relation("signed_table_load", {A});
  auto jt_match = p.relation("jump_table_match", {A, N, A, A, A});
  auto jt_start = p.relation("jump_table_start", {A, N, A, A});
  auto jt_access = p.relation("jump_table_access", {A, A});
  auto jt_value = p.relation("jump_table_value", {A, A, N});
  auto jt_target_ok = p.relation("jump_table_target_ok", {A});
  auto jt_entry = p.relation("jump_table_entry", {A, A, N, A, A});
  auto symbol_cand = p.relation("symbol_candidate", {A, A});
  auto candidate = p.relation("data_candidate", {A, T, N});
  auto points = p.relation("data_candidate_points", {A, T, N, T, N});
  auto total = p.relation("data_candidate_total", {A, T, N, N});
  auto sym_run = p.relation("symbol_array_run", {A, A});
  auto sym_array = p.relation("symbol_array", {A, N});
  auto array_target_kind = p.relation("symbol_array_target", {A, A, T});
  auto array_kind_count = p.relation("symbol_array_kind_count", {A, T, N});
  auto uncommon_op = p.relation("uncommon_pointer_operation", {T});
  auto compare_op = p.relation("compare_operation", {T});
  auto move_op = p.relation("immediate_move_operation", {T});
  auto imm_in_range = p.relation("immediate_in_range", {N});
  auto disp_in_range = p.relation("displacement_in_range", {N});
  auto code_imm = p.relation("code_immediate", {A, N, N});
  auto code_disp = p.relation("code_displacement", {A, N, T, T, N, N});
  auto code_number = p.relation("code_number", {A, N, T, N});
  auto code_points = p.relation("code_number_points", {A, N, T, T, N});
  auto code_total = p.relation("code_number_total", {A, N, T, N});
  auto imm_to_reg = p.relation("immediate_to_register", {A, N, T});
  auto cmp_non_address = p.relation("compared_to_non_address", {A, T});
  auto repair_need = p.relation("displacement_repair_candidate", {A, N, N});
  auto repair_blocked = p.relation("displacement_repair_blocked", {A, N});
  auto repair_dap = p.relation("displacement_repair_dap", {A, N, A});
  auto repair_has_dap = p.relation("displacement_repair_has_dap", {A, N});
  auto boundary = p.relation("data_section_boundary", {A});
  auto boundary_dist = p.relation("displacement_boundary_distance", {A, N, A, N});
  auto boundary_min = p.relation("displacement_boundary_min", {A, N, N});
  auto repaired_disp = p.relation("repaired_displacement", {A, N, A});
  auto counter_base = p.relation("loop_counter", {A, T, A, N});
  auto ext_range = p.relation("extended_section_range", {A, A, A, A, N, A});
  auto with_counter = p.relation("compared_with_counter", {A, N, N, A, T});
  auto repaired_imm = p.relation("repaired_immediate", {A, N, A, N});

  for (const char* op : {"imul", "mul", "div", "idiv", "xor", "and", "or", "not", "neg", "shl", "sal", "shr",
                         "sar", "rol", "ror"})
    p.fact(uncommon_op, {intern(op)});
  p.fact(compare_op, {intern("cmp")});
  for (const char* op : {"mov", "movabs"}) p.fact(move_op, {intern(op)});

  Var X("X"), Y("Y"), B("B"), I("I"), O("O"), O1("O1"), O2("O2"), Op("Op"), R("R"), R2("R2"), Reg("Reg"),
      Reg2("Reg2"), V("V"), W("W"), D("D"), Lo("Lo"), Hi("Hi"), L("L"), Size("Size"), Start("Start"),
      Ref("Ref"), Tg("Tg"), U("U"), Sg("Sg"), AJ("AJ"), ASum("ASum"), AEntry("AEntry"), ARef("ARef"),
      RegEntry("RegEntry"), RegRef("RegRef"), Nx("Nx"), K("K"), Kind("Kind"), Pts("Pts"), Why("Why"),
      Tot("Tot"), Base("Base"), Index("Index"), Mult("Mult"), M("M"), Ms("Ms"), C("C"), Org("Org"),
      Addr("Addr"), Dist("Dist"), Md("Md"), SLo("SLo"), SHi("SHi"), Ctx("Ctx"), Run("Run"), Cnt("Cnt"), J("J");
  const Expr none = text("NONE"), rip = text("RIP");
  const Expr kSymbol = text("Symbol"), kString = text("String"), kSymSym = text("SymbolSymbol"),
             kOther = text("Other");
  const Expr kImm = text("immediate"), kDisp = text("displacement");

  p.rule("data-section", data_section(Lo, Hi), {f.section(_, Lo, L, 0, _, _), L > 0, Hi == Lo + L});
  p.rule("located-data", located(X, Size),
         {data_section(Lo, Hi), pda(X, Size, _, _), X >= Lo, X + Size <= Hi});
  p.rule("located-symbol", located(X, 8),
         {f.address_in_data(X, _), data_section(Lo, Hi), X >= Lo, X + 8 <= Hi});
  p.rule("located-symbol-code", located(X, 8),
         {f.address_in_data(X, _), data_region(Lo, Hi), X >= Lo, X + 8 <= Hi});

  // Symbol-symbol jump tables: jump through Reg = RegEntry + RegRef, RegEntry
  // read from a table, RegRef a constant.
  p.rule("jump-table-match", jt_match(AJ, Size, Start, Ref, AEntry),
         {reg_jump(AJ, _), def_used(ASum, Reg, AJ, _), reg_reg_op(ASum, Reg, RegEntry, RegRef, 1, 0),
          def_used(AEntry, RegEntry, ASum, _), dap(Start, Size, Size, AEntry), def_used(ARef, RegRef, ASum, _),
          reg_val(ARef, RegRef, _, none, 0, Ref, _)});
  p.rule("jump-table-start", jt_start(AJ, Size, Start, Ref), {jt_match(AJ, Size, Start, Ref, _)});
  p.rule("jump-table-access", jt_access(Start, AEntry), {jt_match(_, _, Start, _, AEntry)});
  p.rule("signed-load", signed_load(X), {f.instruction(X, _, _, Op, _, _, _, _), Op == text("movsx")});
  p.rule("signed-load-d", signed_load(X), {f.instruction(X, _, _, Op, _, _, _, _), Op == text("movsxd")});
  p.rule("table-value-signed", jt_value(Start, X, Sg),
         {jt_access(Start, AEntry), signed_load(AEntry), pda(X, Size, Size, AEntry), memory_value(X, Size, _, Sg)});
  p.rule("table-value-unsigned", jt_value(Start, X, U),
         {jt_access(Start, AEntry), !signed_load(AEntry), pda(X, Size, Size, AEntry), memory_value(X, Size, U, _)});
  p.rule("target-final", jt_target_ok(X), {block(X, _), preliminary(0)});
  p.rule("target-preliminary", jt_target_ok(X), {f.instruction(X, _, _, _, _, _, _, _), preliminary(1)});
  p.rule("table-entry-first", jt_entry(Start, Start, Size, Ref, Tg),
         {jt_start(_, Size, Start, Ref), jt_value(Start, Start, V), V >= -kValueBound, V <= kValueBound,
          Tg == Ref + V, jt_target_ok(Tg)});
  p.rule("table-entry-next", jt_entry(Start, Nx, Size, Ref, Tg),
         {jt_entry(Start, X, Size, Ref, _), Nx == X + Size, jt_value(Start, Nx, V), V >= -kValueBound,
          V <= kValueBound, Tg == Ref + V, jt_target_ok(Tg)});

  // Data object candidates.
  p.rule("symbol-candidate", symbol_cand(X, Tg), {f.address_in_data(X, Tg), located(X, 8)});
  p.rule("candidate-symbol", candidate(X, kSymbol, 8), {symbol_cand(X, _)});
  p.rule("candidate-string", candidate(X, kString, L), {string_candidate(X, L)});
  p.rule("candidate-symbol-symbol", candidate(X, kSymSym, Size), {jt_entry(_, X, Size, _, _)});
  p.rule("candidate-other", candidate(X, kOther, Size), {pda(X, Size, _, _), Size != 8, Size > 0, located(X, Size)});

  auto pts = [&](const char* why, std::int64_t weight) { return points(X, Kind, Size, text(why), weight); };
  p.rule("points-instruction", pts("pointer-to-instruction-beginning", w.pointer_to_instruction),
         {candidate(X, Kind, Size), Kind == kSymbol, symbol_cand(X, Tg), code_in_block(Tg, _)});
  p.rule("points-access", pts("data-access-match", w.data_access_match),
         {candidate(X, Kind, Size), pda(X, Size, _, _)});
  for (auto [lo, hi] : {std::pair{-16, -8}, std::pair{-8, 8}, std::pair{8, 16}})
    p.rule("points-array", pts("symbol-arrays", w.symbol_array),
           {candidate(X, Kind, Size), Kind == kSymbol, symbol_cand(X + lo, _), symbol_cand(X + hi, _)});
  p.rule("points-array-strided", pts("symbol-arrays", w.symbol_array),
         {candidate(X, Kind, Size), Kind == kSymbol, pda(X, 8, M, _), M > 8, symbol_cand(X + M, _),
          symbol_cand(X + M + M, _)});
  p.rule("points-array-strided-mid", pts("symbol-arrays", w.symbol_array),
         {candidate(X, Kind, Size), Kind == kSymbol, pda(X, 8, M, _), M > 8, symbol_cand(X - M, _),
          symbol_cand(X + M, _)});
  p.rule("points-array-strided-end", pts("symbol-arrays", w.symbol_array),
         {candidate(X, Kind, Size), Kind == kSymbol, pda(X, 8, M, _), M > 8, symbol_cand(X - M, _),
          symbol_cand(X - M - M, _)});
  p.rule("points-aligned", pts("aligned", w.aligned), {candidate(X, Kind, Size), Kind == kSymbol, X % 8 == 0});
  p.rule("points-string", pts("string-default", w.string_default), {candidate(X, Kind, Size), Kind == kString});
  p.rule("points-long-string", pts("long-string-bonus", w.long_string),
         {candidate(X, Kind, Size), Kind == kString, Size > 6});
  p.rule("points-symbol-symbol", pts("jump-table-entry", w.symbol_symbol),
         {candidate(X, Kind, Size), Kind == kSymSym});
  p.rule("points-conflict", pts("access-conflict", w.access_conflict),
         {candidate(X, Kind, Size), Kind == kSymbol, pda(Y, _, _, _), Y > X, Y < X + 8});
  p.rule("points-special", pts("special-section", w.special_section),
         {candidate(X, Kind, Size), Kind == kSymbol, symbol_cand(X, Tg), special_range(Lo, Hi), Tg >= Lo,
          Tg < Hi});

  // Contiguous runs of symbol candidates; runs of at least three are arrays.
  p.rule("run-start", sym_run(X, X), {symbol_cand(X, _), !symbol_cand(X - 8, _)});
  p.rule("run-step", sym_run(Run, Y), {sym_run(Run, X), Y == X + 8, symbol_cand(Y, _)});
  p.rule("array", sym_array(Run, Cnt), {sym_run(Run, _), count(Cnt, {sym_run(Run, _)}), Cnt >= 3});
  p.rule("array-target", array_target_kind(Run, Tg, Kind),
         {sym_array(Run, _), sym_run(Run, X), symbol_cand(X, Tg), candidate(Tg, Kind, _), Kind != kSymbol});
  p.rule("array-kind-count", array_kind_count(Run, Kind, Cnt),
         {array_target_kind(Run, _, Kind), count(Cnt, {array_target_kind(Run, _, Kind)})});
  p.rule("points-pointed", pts("pointed-by-symbol-array", w.pointed_by_symbol_array),
         {array_target_kind(Run, X, Kind), array_kind_count(Run, Kind, Cnt), Cnt >= 2, candidate(X, Kind, Size)});
  p.rule("candidate-total", total(X, Kind, Size, Tot),
         {candidate(X, Kind, Size), sum(Tot, Pts, {points(X, Kind, Size, _, Pts)})});

  // Numbers in code. Direct branch targets are rendered as labels elsewhere.
  // Empty sections contribute their single boundary address.
  auto number_range = p.relation("number_range", {A, A});
  p.rule("number-range", number_range(Lo, Hi), {section_range(Lo, Hi)});
  p.rule("number-range-empty", number_range(Lo, Lo), {f.section(_, Lo, L, _, _, _), L == 0, Lo != 0});
  p.rule("immediate-in-range", imm_in_range(V),
         {f.op_immediate(_, V), number_range(Lo, Hi), V >= Lo, V <= Hi});
  p.rule("displacement-in-range", disp_in_range(D),
         {f.op_indirect(_, _, _, _, _, D, _), number_range(Lo, Hi), D >= Lo, D <= Hi});
  p.rule("code-immediate", code_imm(X, I, V),
         {code_in_block(X, _), instruction_operand(X, I, O), f.op_immediate(O, V),
          f.instruction(X, _, _, Op, _, _, _, _), !jump_op(Op), !call_op(Op)});
  p.rule("code-displacement", code_disp(X, I, Base, Index, Mult, D),
         {code_in_block(X, _), instruction_operand(X, I, O), f.op_indirect(O, _, Base, Index, Mult, D, _)});
  p.rule("number-immediate", code_number(X, I, kImm, V), {code_imm(X, I, V), imm_in_range(V)});
  p.rule("number-displacement", code_number(X, I, kDisp, D),
         {code_disp(X, I, Base, _, _, D), Base != rip, disp_in_range(D)});

  auto cpts = [&](const char* why, std::int64_t weight) { return code_points(X, I, Ctx, text(why), weight); };
  p.rule("code-points-instruction", cpts("pointer-to-instruction-beginning", w.pointer_to_instruction),
         {code_number(X, I, Ctx, V), code_in_block(V, _)});
  p.rule("code-points-special", cpts("special-section", w.special_section),
         {code_number(X, I, Ctx, V), special_range(Lo, Hi), V >= Lo, V < Hi});
  p.rule("immediate-to-register", imm_to_reg(X, I, R),
         {code_imm(X, I, _), f.instruction(X, _, _, Op, O1, O2, 0, 0), move_op(Op), f.op_regdirect(O2, Reg),
          reg_full(Reg, R, _)});
  p.rule("code-points-address", cpts("used-for-address", w.used_for_address),
         {code_number(X, I, Ctx, _), Ctx == kImm, imm_to_reg(X, I, R), dua(X, R)});
  p.rule("code-points-uncommon", cpts("uncommon-pointer-operation", w.uncommon_operation),
         {code_number(X, I, Ctx, _), Ctx == kImm, f.instruction(X, _, _, Op, _, _, _, _), uncommon_op(Op)});
  p.rule("code-points-uncommon-use", cpts("uncommon-pointer-operation", w.uncommon_operation),
         {code_number(X, I, Ctx, _), Ctx == kImm, imm_to_reg(X, I, R), def_used(X, R, Y, J),
          f.instruction(Y, _, _, Op, _, _, _, _), uncommon_op(Op), instruction_operand(Y, J, O),
          f.op_regdirect(O, Reg), reg_full(Reg, R, _)});
  p.rule("compared-to-non-address", cmp_non_address(Y, R),
         {code_imm(Y, _, W), W != 0, !imm_in_range(W), f.instruction(Y, _, _, Op, _, _, _, _), compare_op(Op),
          instruction_operand(Y, _, O), f.op_regdirect(O, Reg), reg_full(Reg, R, _)});
  p.rule("code-points-compared-moved", cpts("compared-to-non-address", w.compared_to_non_address),
         {code_number(X, I, Ctx, _), Ctx == kImm, imm_to_reg(X, I, R), def_used(X, R, Y, _),
          cmp_non_address(Y, R)});
  p.rule("code-points-compared", cpts("compared-to-non-address", w.compared_to_non_address),
         {code_number(X, I, Ctx, _), Ctx == kImm, f.instruction(X, _, _, Op, _, _, _, _), compare_op(Op),
          instruction_operand(X, _, O), f.op_regdirect(O, Reg), reg_full(Reg, R, _), def_used(D, R, X, _),
          def_used(D, R, Y, _), Y != X, cmp_non_address(Y, R)});
  p.rule("code-total", code_total(X, I, Ctx, Tot),
         {code_number(X, I, Ctx, _), sum(Tot, Pts, {code_points(X, I, Ctx, _, Pts)})});

  // Out-of-range displacements that act as base addresses.
  p.rule("repair-scaled", repair_need(X, I, D),
         {code_disp(X, I, Base, Index, Mult, D), Base != rip, Index != none, Mult > 1, !disp_in_range(D)});
  p.rule("repair-scaled-base", repair_need(X, I, D),
         {code_disp(X, I, Base, none, _, D), Base != rip, Base != none, !disp_in_range(D), reg_full(Base, R, _),
          use_val(X, I, R, text("reg"), 0, M), M > 1});
  p.rule("repair-blocked", repair_blocked(X, I),
         {repair_need(X, I, _), code_disp(X, I, Base, _, _, _), reg_full(Base, R, _),
          use_val(X, I, R, text("const"), C, _), data_section(Lo, Hi), C >= Lo, C < Hi});
  p.rule("repair-dap", repair_dap(X, I, Addr),
         {repair_need(X, I, _), !repair_blocked(X, I), dap(Addr, _, _, X), data_section(Lo, Hi), Addr >= Lo,
          Addr < Hi});
  p.rule("repair-has-dap", repair_has_dap(X, I), {repair_dap(X, I, _)});
  p.rule("boundary-start", boundary(Lo), {data_section(Lo, _)});
  p.rule("boundary-end", boundary(Hi), {data_section(_, Hi)});
  p.rule("boundary-distance", boundary_dist(X, I, B, Dist),
         {repair_need(X, I, D), !repair_blocked(X, I), !repair_has_dap(X, I), boundary(B),
          Dist == max_of(D - B, B - D), Dist <= w.repair_distance});
  p.rule("boundary-min", boundary_min(X, I, Md), {boundary_dist(X, I, _, _), minimum(Md, Dist, {boundary_dist(X, I, _, Dist)})});
  p.rule("repaired-by-dap", repaired_disp(X, I, Addr),
         {repair_dap(X, I, _), minimum(Addr, Y, {repair_dap(X, I, Y)})});
  p.rule("repaired-by-boundary", repaired_disp(X, I, Addr),
         {boundary_min(X, I, Md), minimum(Addr, B, {boundary_dist(X, I, B, Md)})});

  // Loop counters with a constant base inside a section extend that section
  // by one step on each side; immediates compared with the counter inside the
  // extended range are rewritten against the base.
  p.rule("loop-counter", counter_base(X, R, Base, Ms),
         {reg_val(X, R, Org, text("Unknown"), M, _, _), reg_val(Org, _, Org, none, 0, Base, _),
          Ms == max_of(M, -M), Ms > 0});
  p.rule("extended-range", ext_range(SLo, SHi, Lo, Hi, Ms, Base),
         {counter_base(_, _, Base, Ms), section_range(SLo, SHi), Base >= SLo, Base < SHi, Lo == SLo - Ms,
          Hi == SHi + Ms});
  p.rule("compared-direct", with_counter(X, I, V, Y, R),
         {code_imm(X, I, V), f.instruction(X, _, _, Op, _, _, _, _), compare_op(Op), def_used(Y, R, X, _),
          counter_base(Y, R, _, _)});
  p.rule("compared-moved", with_counter(X, I, V, Y, R),
         {code_imm(X, I, V), imm_to_reg(X, I, R2), def_used(X, R2, B, _), f.instruction(B, _, _, Op, _, _, _, _),
          compare_op(Op), def_used(Y, R, B, _), R != R2, counter_base(Y, R, _, _)});
  p.rule("repaired-immediate", repaired_imm(X, I, Base, K),
         {with_counter(X, I, V, Y, R), counter_base(Y, R, Base, Ms), ext_range(SLo, SHi, Lo, Hi, Ms, Base),
          V >= Lo, V <= Hi, K == V - Base});
  return p;
}

std::vector<std::pair<Address, std::int64_t>> find_strings(const facts::FactBase& facts) {
  std::vector<std::pair<Address, std::int64_t>> out;
  std::map<Address, std::uint8_t> bytes(facts.data_bytes.begin(), facts.data_bytes.end());
  for (const facts::Section& s : facts.sections) {
    if (s.executable || !s.initialized) continue;
    std::int64_t run = 0;
    for (Address a = s.start; a < s.end(); ++a) {
      auto it = bytes.find(a);
      if (it == bytes.end()) {
        run = 0;
        continue;
      }
      if (it->second == 0 && run >= 2) out.emplace_back(a - static_cast<Address>(run), run + 1);
      run = printable(it->second) ? run + 1 : 0;
    }
  }
  return out;
}

namespace {

struct Sections {
  std::vector<facts::Section> all;  // sorted by start
  const std::vector<std::string>* special;

  bool is_special(const facts::Section& s) const {
    return std::find(special->begin(), special->end(), s.name) != special->end();
  }
  // Section whose label represents `a`: the one containing it, else one
  // ending at it, else the nearest boundary.
  std::string for_target(Address a) const {
    for (const facts::Section& s : all)
      if (s.length && s.contains(a)) return s.name;
    const facts::Section* end = nullptr;
    for (const facts::Section& s : all)
      if (s.end() == a && (!end || (is_special(*end) && !is_special(s)))) end = &s;
    if (end) return end->name;
    const facts::Section* best = nullptr;
    std::uint64_t dist = ~0ULL;
    for (const facts::Section& s : all) {
      std::uint64_t d = a < s.start ? s.start - a : a - s.end();
      if (d < dist) dist = d, best = &s;
    }
    return best ? best->name : std::string();
  }
  // Nearest boundary of any section to an address outside all sections.
  Address nearest_boundary(Address a) const {
    Address best = 0;
    std::uint64_t dist = ~0ULL;
    for (const facts::Section& s : all)
      for (Address b : {s.start, s.end()}) {
        std::uint64_t d = a < b ? b - a : a - b;
        if (d < dist) dist = d, best = b;
      }
    return best;
  }
};

SymbolicExpr sym_plus(const Sections& secs, Address target, std::int64_t value) {
  SymbolicExpr e;
  e.kind = SymbolicExpr::Kind::sym_plus;
  e.value = value;
  e.target = target;
  e.offset = value - static_cast<std::int64_t>(target);
  e.section = secs.for_target(target);
  return e;
}

SymbolicExpr literal(std::int64_t value) {
  SymbolicExpr e;
  e.value = value;
  return e;
}

std::int64_t read_value(const std::map<Address, std::uint8_t>& bytes, Address a, int size, bool sign,
                        bool& ok) {
  std::uint64_t v = 0;
  ok = true;
  for (int i = size - 1; i >= 0; --i) {
    auto it = bytes.find(a + static_cast<Address>(i));
    if (it == bytes.end()) {
      ok = false;
      return 0;
    }
    v = (v << 8) | it->second;
  }
  if (sign && size < 8 && (v >> (size * 8 - 1)) & 1) v |= ~0ULL << (size * 8);
  return static_cast<std::int64_t>(v);
}

void add_inputs(const facts::FactBase& facts, const SymbolizationOptions& options, Database& db) {
  Relation& strings = db.add("string_candidate", {A, N});
  for (auto [a, len] : find_strings(facts)) strings.insert({static_cast<Value>(a), len});
  std::map<Address, std::uint8_t> bytes(facts.data_bytes.begin(), facts.data_bytes.end());
  Relation& values = db.add("memory_value", {A, N, N, N});
  if (const Relation* pda = db.find("propagated_data_access"))
    for (std::size_t i = 0; i < pda->size(); ++i) {
      auto row = pda->row(i);
      Address a = static_cast<Address>(row[0]);
      int size = static_cast<int>(row[1]);
      if (size != 1 && size != 2 && size != 4 && size != 8) continue;
      bool ok = false;
      std::int64_t u = read_value(bytes, a, size, false, ok);
      if (!ok) continue;
      std::int64_t s = read_value(bytes, a, size, true, ok);
      values.insert({static_cast<Value>(a), size, u, s});
    }
  Relation& special = db.add("special_section_range", {A, A});
  for (const facts::Section& s : facts.sections)
    if (s.length && std::find(options.special_sections.begin(), options.special_sections.end(), s.name) !=
                        options.special_sections.end())
      special.insert({static_cast<Value>(s.start), static_cast<Value>(s.end())});
  Relation& mode = db.add("preliminary_mode", {N});
  mode.insert({options.preliminary ? 1 : 0});
}

struct Candidate {
  DataObject obj;
  std::vector<std::string> heuristics;
};

}  // namespace

std::vector<Address> preliminary_jump_targets(const facts::FactBase& facts, const ibi::CodeLayout& layout,
                                              const SymbolizationOptions& options, int jobs, Database& db) {
  (void)layout;
  SymbolizationOptions prelim = options;
  prelim.preliminary = true;
  add_inputs(facts, prelim, db);
  evaluate(build_program(prelim), db, EvalOptions{jobs});
  std::set<Address> out;
  for (const Tuple& t : db.at("jump_table_entry").sorted_rows()) {
    out.insert(static_cast<Address>(t[3]));
    out.insert(static_cast<Address>(t[4]));
  }
  return {out.begin(), out.end()};
}

Symbolization run_symbolization(const facts::FactBase& facts, const ibi::CodeLayout& layout,
                                const SymbolizationOptions& options, int jobs, Database& db) {
  (void)layout;
  add_inputs(facts, options, db);
  evaluate(build_program(options), db, EvalOptions{jobs});
  const SymbolizationWeights& w = options.weights;
  Sections secs{facts.sections, &options.special_sections};
  std::sort(secs.all.begin(), secs.all.end(),
            [](const facts::Section& a, const facts::Section& b) { return a.start < b.start; });

  Symbolization out;

  // Jump tables.
  std::map<Address, JumpTable> tables;
  for (const Tuple& t : db.at("jump_table_start").sorted_rows()) {
    JumpTable& jt = tables[static_cast<Address>(t[2])];
    if (jt.start && (jt.jump != static_cast<Address>(t[0]) || jt.reference != static_cast<Address>(t[3])))
      out.warnings.push_back("jump table at " + hex(static_cast<Address>(t[2])) + " matched more than once");
    if (jt.start) continue;
    jt = {static_cast<Address>(t[0]), t[1], static_cast<Address>(t[2]), static_cast<Address>(t[3]), {}};
  }
  std::map<Address, std::pair<Address, Address>> entry_at;  // entry -> (target, reference)
  for (const Tuple& t : db.at("jump_table_entry").sorted_rows()) {
    Address start = static_cast<Address>(t[0]);
    auto it = tables.find(start);
    if (it == tables.end() || static_cast<Address>(t[3]) != it->second.reference) continue;
    it->second.targets.push_back(static_cast<Address>(t[4]));
    entry_at[static_cast<Address>(t[1])] = {static_cast<Address>(t[4]), static_cast<Address>(t[3])};
  }
  for (auto& [start, jt] : tables) out.tables.push_back(jt);

  // Data object candidates.
  std::map<std::tuple<Address, CandidateKind, std::int64_t>, Candidate> cands;
  std::map<Address, Address> symbol_target;
  for (const Tuple& t : db.at("symbol_candidate").sorted_rows())
    symbol_target[static_cast<Address>(t[0])] = static_cast<Address>(t[1]);
  for (const Tuple& t : db.at("data_candidate").sorted_rows()) {
    CandidateKind k = kind_from(text_of(t[1]));
    Candidate& c = cands[{static_cast<Address>(t[0]), k, t[2]}];
    c.obj.addr = static_cast<Address>(t[0]);
    c.obj.kind = k;
    c.obj.size = t[2];
    if (k == CandidateKind::symbol) c.obj.target = symbol_target[c.obj.addr];
    if (k == CandidateKind::symbol_symbol) {
      auto [target, ref] = entry_at[c.obj.addr];
      c.obj.target = target;
      c.obj.reference = ref;
    }
  }
  for (const Tuple& t : db.at("data_candidate_points").sorted_rows()) {
    auto it = cands.find({static_cast<Address>(t[0]), kind_from(text_of(t[1])), t[2]});
    if (it != cands.end()) it->second.heuristics.push_back(text_of(t[3]) + ":" + std::to_string(t[4]));
  }
  for (const Tuple& t : db.at("data_candidate_total").sorted_rows()) {
    auto it = cands.find({static_cast<Address>(t[0]), kind_from(text_of(t[1])), t[2]});
    if (it != cands.end()) it->second.obj.points = t[3];
  }

  std::vector<const Candidate*> order;
  std::map<std::pair<Address, CandidateKind>, std::string> discard_note;
  for (auto& [key, c] : cands) {
    if (c.obj.points < w.data_threshold) {
      out.discarded.push_back({c.obj.addr, c.obj.kind, "below-threshold", 0});
      continue;
    }
    order.push_back(&c);
  }
  std::stable_sort(order.begin(), order.end(), [](const Candidate* a, const Candidate* b) {
    return std::make_tuple(-a->obj.points, a->obj.addr, kind_rank(a->obj.kind), -a->obj.size) <
           std::make_tuple(-b->obj.points, b->obj.addr, kind_rank(b->obj.kind), -b->obj.size);
  });
  std::map<Address, const Candidate*> kept;  // by start; kept objects never overlap
  for (const Candidate* c : order) {
    Address lo = c->obj.addr, hi = c->obj.addr + static_cast<Address>(c->obj.size);
    const Candidate* winner = nullptr;
    auto it = kept.upper_bound(lo);
    if (it != kept.begin()) {
      auto prev = std::prev(it);
      if (prev->first + static_cast<Address>(prev->second->obj.size) > lo) winner = prev->second;
    }
    if (!winner && it != kept.end() && it->first < hi) winner = it->second;
    if (!winner) {
      kept[lo] = c;
      continue;
    }
    out.discarded.push_back({c->obj.addr, c->obj.kind, "overlap", winner->obj.addr});
    if (winner->obj.points == c->obj.points)
      out.warnings.push_back("tie between data objects " + hex(winner->obj.addr) + " and " + hex(c->obj.addr) +
                             " at " + std::to_string(c->obj.points) + " points; kept " + hex(winner->obj.addr));
  }
  for (auto& [a, c] : kept) out.objects.push_back(c->obj);
  std::sort(out.discarded.begin(), out.discarded.end(), [](const DataDiscard& a, const DataDiscard& b) {
    return std::make_tuple(a.addr, kind_rank(a.kind)) < std::make_tuple(b.addr, kind_rank(b.kind));
  });

  // Data decisions: every address_in_data location plus table entries.
  std::map<Address, const Candidate*> kept_symbol;
  for (auto& [a, c] : kept)
    if (c->obj.kind == CandidateKind::symbol || c->obj.kind == CandidateKind::symbol_symbol) kept_symbol[a] = c;
  std::set<Address> data_locations;
  for (const auto& [a, v] : facts.address_in_data) data_locations.insert(a);
  for (auto& [a, c] : kept_symbol) data_locations.insert(a);
  std::map<Address, Address> raw_value(facts.address_in_data.begin(), facts.address_in_data.end());
  std::map<Address, std::uint8_t> bytes(facts.data_bytes.begin(), facts.data_bytes.end());
  for (Address a : data_locations) {
    Decision d;
    d.addr = a;
    d.context = Context::data;
    auto k = kept_symbol.find(a);
    if (k != kept_symbol.end()) {
      const DataObject& o = k->second->obj;
      d.heuristics = k->second->heuristics;
      d.total = o.points;
      if (o.kind == CandidateKind::symbol) {
        d.expr = sym_plus(secs, o.target, static_cast<std::int64_t>(o.target));
      } else {
        bool ok = false;
        d.expr.kind = SymbolicExpr::Kind::sym_minus_sym;
        d.expr.value = read_value(bytes, a, static_cast<int>(o.size), false, ok);
        d.expr.target = o.target;
        d.expr.reference = o.reference;
      }
    } else {
      d.expr = literal(static_cast<std::int64_t>(raw_value[a]));
      auto c = cands.find({a, CandidateKind::symbol, 8});
      if (c != cands.end()) {
        d.heuristics = c->second.heuristics;
        d.total = c->second.obj.points;
      }
    }
    out.decisions.push_back(std::move(d));
  }

  // Code decisions.
  std::map<std::tuple<Address, int, std::string>, std::vector<std::string>> code_heur;
  std::map<std::tuple<Address, int, std::string>, std::int64_t> code_tot;
  for (const Tuple& t : db.at("code_number_points").sorted_rows())
    code_heur[{static_cast<Address>(t[0]), static_cast<int>(t[1]), text_of(t[2])}].push_back(
        text_of(t[3]) + ":" + std::to_string(t[4]));
  for (const Tuple& t : db.at("code_number_total").sorted_rows())
    code_tot[{static_cast<Address>(t[0]), static_cast<int>(t[1]), text_of(t[2])}] = t[3];
  std::map<std::pair<Address, int>, std::pair<Address, std::int64_t>> rep_imm;
  for (const Tuple& t : db.at("repaired_immediate").sorted_rows()) {
    auto key = std::make_pair(static_cast<Address>(t[0]), static_cast<int>(t[1]));
    if (!rep_imm.count(key)) rep_imm[key] = {static_cast<Address>(t[2]), t[3]};
  }
  std::map<std::pair<Address, int>, Address> rep_disp;
  for (const Tuple& t : db.at("repaired_displacement").sorted_rows())
    rep_disp[{static_cast<Address>(t[0]), static_cast<int>(t[1])}] = static_cast<Address>(t[2]);
  std::set<std::pair<Address, int>> imm_in_range;
  for (const Tuple& t : db.at("code_number").sorted_rows())
    if (text_of(t[2]) == "immediate") imm_in_range.insert({static_cast<Address>(t[0]), static_cast<int>(t[1])});

  for (const Tuple& t : db.at("code_immediate").sorted_rows()) {
    Address a = static_cast<Address>(t[0]);
    int i = static_cast<int>(t[1]);
    std::int64_t v = t[2];
    Decision d{a, i, Context::immediate, literal(v), {}, 0};
    auto rep = rep_imm.find({a, i});
    if (rep != rep_imm.end()) {
      d.expr = sym_plus(secs, rep->second.first, v);
      d.expr.section = secs.for_target(rep->second.first);
      d.heuristics.push_back("loop-bound-repair");
    } else if (imm_in_range.count({a, i})) {
      auto key = std::make_tuple(a, i, std::string("immediate"));
      d.heuristics = code_heur[key];
      d.total = code_tot.count(key) ? code_tot[key] : 0;
      if (d.total >= w.code_threshold) d.expr = sym_plus(secs, static_cast<Address>(v), v);
    } else {
      continue;
    }
    out.decisions.push_back(std::move(d));
  }
  for (const Tuple& t : db.at("code_displacement").sorted_rows()) {
    Address a = static_cast<Address>(t[0]);
    int i = static_cast<int>(t[1]);
    std::string base = text_of(t[2]);
    std::int64_t disp = t[5];
    Decision d{a, i, Context::displacement, literal(disp), {}, 0};
    auto key = std::make_tuple(a, i, std::string("displacement"));
    bool in_range = false;
    for (const facts::Section& s : secs.all)
      if (s.start && static_cast<Address>(disp) >= s.start && static_cast<Address>(disp) <= s.end()) in_range = true;
    auto rep = rep_disp.find({a, i});
    if (base == "RIP") {
      Address target = in_range ? static_cast<Address>(disp) : secs.nearest_boundary(static_cast<Address>(disp));
      d.expr = sym_plus(secs, target, disp);
      d.heuristics.push_back("pc-relative");
    } else if (in_range) {
      d.heuristics = code_heur[key];
      d.total = code_tot.count(key) ? code_tot[key] : 0;
      if (d.total >= w.code_threshold) d.expr = sym_plus(secs, static_cast<Address>(disp), disp);
    } else if (rep != rep_disp.end()) {
      d.expr = sym_plus(secs, rep->second, disp);
      d.heuristics.push_back("base-address-repair");
    } else {
      continue;
    }
    out.decisions.push_back(std::move(d));
  }
  std::sort(out.decisions.begin(), out.decisions.end(), [](const Decision& x, const Decision& y) {
    return std::make_tuple(x.addr, x.operand, x.context) < std::make_tuple(y.addr, y.operand, y.context);
  });

  for (const Tuple& t : db.at("extended_section_range").sorted_rows())
    out.extended.push_back({secs.for_target(static_cast<Address>(t[0])), static_cast<Address>(t[2]),
                            static_cast<Address>(t[3]), t[4], static_cast<Address>(t[5])});
  return out;
}

void write_report(std::ostream& out, const Symbolization& s) {
  std::size_t symbolic = 0;
  for (const Decision& d : s.decisions) {
    out << "0x" << hex(d.addr) << '\t' << d.operand << '\t' << context_name(d.context) << '\t'
        << (d.expr.symbolic() ? "symbolic" : "literal") << '\t' << d.expr.render() << '\t' << d.total << '\t';
    for (std::size_t i = 0; i < d.heuristics.size(); ++i) out << (i ? "," : "") << d.heuristics[i];
    if (d.heuristics.empty()) out << '-';
    out << '\t' << d.expr.value << '\t' << (d.expr.section.empty() ? "-" : d.expr.section) << '\n';
    symbolic += d.expr.symbolic();
  }
  out << "# decisions " << s.decisions.size() << " symbolic " << symbolic << " objects " << s.objects.size()
      << " discarded " << s.discarded.size() << " tables " << s.tables.size() << '\n';
  for (const std::string& w : s.warnings) out << "# warning " << w << '\n';
}

std::vector<Decision> read_report(std::istream& in) {
  std::vector<Decision> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) f.push_back(field);
    if (f.size() != 9) throw std::runtime_error("MalformedReport: line " + std::to_string(lineno));
    Decision d;
    d.addr = std::stoull(f[0], nullptr, 16);
    d.operand = std::stoi(f[1]);
    d.context = f[2] == "data" ? Context::data : f[2] == "immediate" ? Context::immediate : Context::displacement;
    d.total = std::stoll(f[5]);
    d.expr.value = std::stoll(f[7]);
    if (f[3] == "symbolic") {
      const std::string& e = f[4];
      auto minus = e.find("-.L_");
      if (minus != std::string::npos) {
        d.expr.kind = SymbolicExpr::Kind::sym_minus_sym;
        d.expr.target = std::stoull(e.substr(3, minus - 3), nullptr, 16);
        d.expr.reference = std::stoull(e.substr(minus + 4), nullptr, 16);
      } else {
        d.expr.kind = SymbolicExpr::Kind::sym_plus;
        std::size_t end = 3;
        while (end < e.size() && std::isxdigit(static_cast<unsigned char>(e[end]))) ++end;
        d.expr.target = std::stoull(e.substr(3, end - 3), nullptr, 16);
        d.expr.offset = end < e.size() ? std::stoll(e.substr(end)) : 0;
        d.expr.section = f[8] == "-" ? "" : f[8];
      }
    }
    if (f[6] != "-") {
      std::stringstream hs(f[6]);
      while (std::getline(hs, field, ',')) d.heuristics.push_back(field);
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace rdis::symbolization
