#include "rdis/analyses/analyses.hpp"

#include <set>
#include <string>

#include "rdis/facts/registers.hpp"
#include "rdis/relfix/engine.hpp"

namespace rdis::analyses {
namespace {

using namespace relfix;
constexpr auto A = ColumnKind::address;
constexpr auto N = ColumnKind::number;
constexpr auto T = ColumnKind::text;

// Bounds keeping rule arithmetic inside 64 bits across step_limit chainings.
constexpr Value kMultBound = Value{1} << 16;
constexpr Value kDispBound = Value{1} << 44;

const char* const kConditions[] = {"o", "no", "b", "ae", "e", "ne", "be", "a",
                                   "s", "no", "p", "np", "l", "ge", "le", "g", "ns"};

}  // namespace

Program build_program(const AnalysisOptions& options) {
  Program p;
  facts::FactRelations f = facts::declare_fact_inputs(p);
  auto instruction_operand = p.input("instruction_operand", {A, N, N});
  auto may_fallthrough = p.input("may_fallthrough", {A, A});
  auto direct_jump = p.input("direct_jump", {A, A});
  auto jump_op = p.input("jump_operation", {T});
  auto call_op = p.input("call_operation", {T});
  auto loop_prefix = p.input("instruction_has_loop_prefix", {A});
  auto section_range = p.input("section_range", {A, A});
  auto code_in_block = p.input("code_in_block", {A, A});

  auto reg_full = p.relation("register_alias", {T, T, N});
  auto write_only_op = p.relation("write_only_operation", {T});
  auto read_only_op = p.relation("read_only_operation", {T});
  auto no_effect_op = p.relation("no_register_effect_operation", {T});
  auto implicit_def = p.relation("implicit_definition", {T, T});
  auto implicit_use = p.relation("implicit_use", {T, T});
  auto call_defined = p.relation("call_defined_register", {T});
  auto move_op = p.relation("move_operation", {T});
  auto zero_op = p.relation("zeroing_operation", {T});

  for (int n = 0; n < 16; ++n)
    for (int w : {8, 4, 2, 1})
      for (bool rex : {true, false}) {
        std::string_view name = facts::gpr_name(n, w, rex);
        p.fact(reg_full, {intern(name), intern(facts::full_register(name)), w});
      }
  for (const char* op : {"mov", "movabs", "movzx", "movsx", "movsxd", "lea", "pop", "cvttsd2si", "cvtsd2si",
                         "cvttss2si", "cvtss2si", "movd", "movq", "movmskps", "movmskpd", "pmovmskb", "bsf",
                         "bsr", "popcnt", "lzcnt", "tzcnt"})
    p.fact(write_only_op, {intern(op)});
  for (const char* c : kConditions) p.fact(write_only_op, {intern(std::string("set") + c)});
  for (const char* op : {"cmp", "test", "bt", "push", "ucomisd", "ucomiss", "comisd", "comiss", "jmp", "call", "mul",
                         "div", "idiv", "loop", "loope", "loopne", "jrcxz"})
    p.fact(read_only_op, {intern(op)});
  for (const char* c : kConditions) p.fact(read_only_op, {intern(std::string("j") + c)});
  for (const char* op : {"nop", "endbr64", "hlt", "int3", "ud2", "pause", "ret"}) p.fact(no_effect_op, {intern(op)});
  const std::pair<const char*, const char*> defs[] = {
      {"cdq", "RDX"},  {"cqo", "RDX"},     {"cwd", "RDX"},  {"cdqe", "RAX"}, {"cwde", "RAX"}, {"cbw", "RAX"},
      {"mul", "RAX"},  {"mul", "RDX"},     {"div", "RAX"},  {"div", "RDX"},  {"idiv", "RAX"}, {"idiv", "RDX"},
      {"leave", "RBP"}, {"cpuid", "RAX"},  {"cpuid", "RBX"}, {"cpuid", "RCX"}, {"cpuid", "RDX"},
      {"syscall", "RAX"}, {"syscall", "RCX"}, {"syscall", "R11"}, {"cmpxchg", "RAX"}, {"lods", "RAX"},
      {"lods", "RSI"}, {"stos", "RDI"},    {"movs", "RSI"}, {"movs", "RDI"}, {"scas", "RDI"}, {"cmps", "RSI"},
      {"cmps", "RDI"}};
  for (auto [op, r] : defs) p.fact(implicit_def, {intern(op), intern(r)});
  const std::pair<const char*, const char*> uses[] = {
      {"cdq", "RAX"},  {"cqo", "RAX"},  {"cwd", "RAX"},     {"cdqe", "RAX"},    {"cwde", "RAX"},
      {"cbw", "RAX"},  {"mul", "RAX"},  {"div", "RAX"},     {"div", "RDX"},     {"idiv", "RAX"},
      {"idiv", "RDX"}, {"leave", "RBP"}, {"cmpxchg", "RAX"}, {"syscall", "RAX"}, {"syscall", "RDI"},
      {"syscall", "RSI"}, {"syscall", "RDX"}, {"syscall", "R10"}, {"syscall", "R8"}, {"syscall", "R9"}};
  for (auto [op, r] : uses) p.fact(implicit_use, {intern(op), intern(r)});
  const std::set<std::string> callee_saved = {"RBX", "RBP", "RSP", "R12", "R13", "R14", "R15"};
  for (int n = 0; n < 16; ++n) {
    std::string r(facts::gpr_name(n, 8, true));
    if (options.call_kills_all ? r != "RSP" : !callee_saved.count(r)) p.fact(call_defined, {intern(r)});
  }
  for (const char* op : {"mov", "movabs"}) p.fact(move_op, {intern(op)});
  for (const char* op : {"xor", "sub"}) p.fact(zero_op, {intern(op)});

  auto last_operand = p.relation("last_operand", {A, N});
  auto operand_reg = p.relation("operand_register", {A, N, T, N});
  auto read_only = p.relation("read_only_instruction", {A});
  auto write_only = p.relation("write_only_instruction", {A});
  auto no_effect = p.relation("no_register_effect", {A});
  auto zero_idiom = p.relation("zero_idiom", {A});
  auto def = p.relation("def", {A, T});
  auto use = p.relation("use", {A, T, N});
  auto flow = p.relation("local_flow", {A, A});
  auto reach = p.relation("reaching_def", {A, T, A});
  auto def_used = p.relation("def_used", {A, T, A, N});
  auto dua = p.relation("def_used_for_address", {A, T});
  auto reg_jump = p.relation("reg_jump", {A, T});
  auto reg_call = p.relation("reg_call", {A, T});
  auto modeled = p.relation("value_modeled", {A});
  auto value_source = p.relation("value_source", {A, T});
  auto source_reached = p.relation("value_source_reached", {A, T});
  auto unreached = p.relation("value_source_unreached", {A});
  auto lea_mem = p.relation("lea_operand", {A, T, T, T, N, N});
  auto edge = p.relation("reg_val_edge", {A, T, A, T, N, N});
  auto reg_reg_op = p.relation("reg_reg_op", {A, T, T, T, N, N});
  auto reg_val = p.relation("reg_val", {A, T, A, T, N, N, N});
  auto use_val = p.relation("use_value", {A, N, T, T, N, N});
  auto mem_access = p.relation("memory_access", {A, N, T, T, N, N, N});
  auto dap_cand = p.relation("dap_candidate", {A, N, N, A});
  auto dap_best = p.relation("dap_best_mult", {A, A, N});
  auto dap = p.relation("data_access_pattern", {A, N, N, A});
  auto dap_addr = p.relation("dap_address", {A});
  auto next_dap = p.relation("next_dap", {A, A});
  auto dap_section = p.relation("dap_section", {A, A});
  auto prop = p.relation("propagation", {A, A, N, N, A});
  auto propagated = p.relation("propagated_data_access", {A, N, N, A});
  auto step_limit = p.relation("step_limit", {N});
  p.fact(step_limit, {options.step_limit});

  Var X("X"), Y("Y"), K("K"), K1("K1"), O("O"), O1("O1"), O2("O2"), Op("Op"), R("R"), R1("R1"), R2("R2"),
      R3("R3"), Reg("Reg"), Reg2("Reg2"), W("W"), W2("W2"), I("I"), Ad("Ad"), Ad2("Ad2"), Au("Au"), C("C"),
      C2("C2"), D("D"), D1("D1"), D2("D2"), M("M"), M1("M1"), M2("M2"), S("S"), S1("S1"), S2("S2"), Lim("Lim"),
      A2("A2"), A3("A3"), Base("Base"), Index("Index"), Mult("Mult"), Disp("Disp"), Size("Size"), Kind("Kind"),
      Addr("Addr"), Orig("Orig"), Nx("Nx"), Lo("Lo"), Hi("Hi");
  const Expr none = text("NONE"), unknown = text("Unknown"), rip = text("RIP");
  const Expr kConst = text("const"), kLoop = text("loop"), kReg = text("reg");

  // Operand shapes.
  p.rule("last-operand", last_operand(X, K),
         {instruction_operand(X, K, _), K1 == K + 1, !instruction_operand(X, K1, _)});
  p.rule("operand-register", operand_reg(X, K, R, W),
         {instruction_operand(X, K, O), f.op_regdirect(O, Reg), reg_full(Reg, R, W)});
  p.rule("read-only", read_only(X), {f.instruction(X, _, _, Op, _, _, _, _), read_only_op(Op)});
  p.rule("read-only-imul", read_only(X), {f.instruction(X, _, _, text("imul"), _, _, _, _), last_operand(X, 1)});
  p.rule("write-only", write_only(X), {f.instruction(X, _, _, Op, _, _, _, _), write_only_op(Op)});
  p.rule("write-only-imul", write_only(X), {f.instruction(X, _, _, text("imul"), _, _, _, _), last_operand(X, 3)});
  p.rule("no-effect", no_effect(X), {f.instruction(X, _, _, Op, _, _, _, _), no_effect_op(Op)});
  p.rule("zero-idiom", zero_idiom(X),
         {f.instruction(X, _, _, Op, O1, O2, 0, 0), zero_op(Op), f.op_regdirect(O1, Reg), f.op_regdirect(O2, Reg)});

  // Definitions; 32-bit and 64-bit names share one register.
  p.rule("def-dest", def(X, R), {last_operand(X, K), operand_reg(X, K, R, _), !read_only(X), !no_effect(X)});
  p.rule("def-xchg", def(X, R), {f.instruction(X, _, _, text("xchg"), _, _, _, _), operand_reg(X, 1, R, _)});
  p.rule("def-xadd", def(X, R), {f.instruction(X, _, _, text("xadd"), _, _, _, _), operand_reg(X, 1, R, _)});
  p.rule("def-implicit", def(X, R), {f.instruction(X, _, _, Op, _, _, _, _), implicit_def(Op, R)});
  p.rule("def-imul-wide", def(X, text("RAX")), {read_only(X), f.instruction(X, _, _, text("imul"), _, _, _, _)});
  p.rule("def-imul-wide-rdx", def(X, text("RDX")), {read_only(X), f.instruction(X, _, _, text("imul"), _, _, _, _)});
  p.rule("def-call", def(X, R), {f.instruction(X, _, _, Op, _, _, _, _), call_op(Op), call_defined(R)});
  p.rule("def-rep", def(X, text("RCX")), {loop_prefix(X)});

  // Uses, indexed by operand position; implicit uses carry index 0.
  p.rule("use-source", use(X, R, I),
         {operand_reg(X, I, R, _), last_operand(X, K), I < K, !no_effect(X), !zero_idiom(X)});
  p.rule("use-dest", use(X, R, K),
         {last_operand(X, K), operand_reg(X, K, R, _), !write_only(X), !no_effect(X), !zero_idiom(X)});
  p.rule("use-partial", use(X, R, K), {last_operand(X, K), operand_reg(X, K, R, W), W < 4, def(X, R)});
  p.rule("use-base", use(X, R, I),
         {instruction_operand(X, I, O), f.op_indirect(O, _, Reg, _, _, _, _), reg_full(Reg, R, _), !no_effect(X)});
  p.rule("use-index", use(X, R, I),
         {instruction_operand(X, I, O), f.op_indirect(O, _, _, Reg, _, _, _), reg_full(Reg, R, _), !no_effect(X)});
  p.rule("use-implicit", use(X, R, 0), {f.instruction(X, _, _, Op, _, _, _, _), implicit_use(Op, R)});
  p.rule("use-imul-wide", use(X, text("RAX"), 0), {read_only(X), f.instruction(X, _, _, text("imul"), _, _, _, _)});
  p.rule("use-rep", use(X, text("RCX"), 0), {loop_prefix(X)});

  // Intra-procedural propagation over final blocks; calls are not entered.
  p.rule("flow-fallthrough", flow(X, Y), {code_in_block(X, _), may_fallthrough(X, Y), code_in_block(Y, _)});
  p.rule("flow-jump", flow(X, Y), {code_in_block(X, _), direct_jump(X, Y), code_in_block(Y, _)});
  p.rule("reach-def", reach(Ad, R, Y), {def(Ad, R), code_in_block(Ad, _), flow(Ad, Y)});
  p.rule("reach-step", reach(Ad, R, Y), {reach(Ad, R, X), !def(X, R), flow(X, Y)});
  p.rule("def-used", def_used(Ad, R, X, I), {reach(Ad, R, X), use(X, R, I)});

  p.rule("reg-jump", reg_jump(X, R),
         {f.instruction(X, _, _, text("jmp"), O, 0, 0, 0), f.op_regdirect(O, Reg), reg_full(Reg, R, _)});
  p.rule("reg-call", reg_call(X, R),
         {f.instruction(X, _, _, text("call"), O, 0, 0, 0), f.op_regdirect(O, Reg), reg_full(Reg, R, _)});
  p.rule("address-seed", dua(Ad, R),
         {def_used(Ad, R, X, I), instruction_operand(X, I, O), f.op_indirect(O, _, _, _, _, _, _),
          f.instruction(X, _, _, Op, _, _, _, _), Op != text("lea"), Op != text("nop")});
  p.rule("address-seed-jump", dua(Ad, R), {def_used(Ad, R, X, _), reg_jump(X, R)});
  p.rule("address-seed-call", dua(Ad, R), {def_used(Ad, R, X, _), reg_call(X, R)});
  p.rule("address-closure", dua(Ad, R), {dua(Au, _), def_used(Ad, R, Au, _)});

  // Value edges. Shapes are recognized syntactically (value_modeled);
  // edges exist only for definitions used for addresses.
  p.rule("lea-operand", lea_mem(X, R, Base, Index, Mult, Disp),
         {f.instruction(X, _, _, text("lea"), O1, O2, 0, 0), f.op_indirect(O1, _, Base, Index, Mult, Disp, _),
          f.op_regdirect(O2, Reg), reg_full(Reg, R, W), W >= 4});
  p.rule("modeled-const", modeled(X),
         {f.instruction(X, _, _, Op, O1, O2, 0, 0), move_op(Op), f.op_immediate(O1, _), f.op_regdirect(O2, _)});
  p.rule("modeled-zero", modeled(X), {zero_idiom(X)});
  p.rule("modeled-move", modeled(X),
         {f.instruction(X, _, _, text("mov"), O1, O2, 0, 0), f.op_regdirect(O1, Reg), reg_full(Reg, _, W), W >= 4,
          f.op_regdirect(O2, _)});
  for (const char* op : {"add", "sub"})
    p.rule(std::string("modeled-") + op, modeled(X),
           {f.instruction(X, _, _, text(op), O1, O2, 0, 0), f.op_immediate(O1, _), f.op_regdirect(O2, _)});
  p.rule("modeled-lea", modeled(X), {lea_mem(X, _, Base, Index, _, _), Base != Index});
  p.rule("modeled-lea-same", modeled(X), {lea_mem(X, _, Base, Base, _, _), Base == none});
  p.rule("modeled-lea-scaled", modeled(X), {lea_mem(X, _, Base, Base, _, _), Base != none});
  p.rule("modeled-shl", modeled(X),
         {f.instruction(X, _, _, text("shl"), O1, O2, 0, 0), f.op_immediate(O1, K), K >= 0, K <= 16,
          f.op_regdirect(O2, _)});
  p.rule("modeled-imul", modeled(X),
         {f.instruction(X, _, _, text("imul"), O1, O2, O, 0), f.op_immediate(O1, K), K >= -kMultBound,
          K <= kMultBound, f.op_regdirect(O2, _), f.op_regdirect(O, _)});
  p.rule("modeled-double", modeled(X),
         {f.instruction(X, _, _, text("add"), O1, O2, 0, 0), f.op_regdirect(O1, Reg), f.op_regdirect(O2, Reg)});

  p.rule("edge-const", edge(X, R, X, none, 0, C),
         {dua(X, R), f.instruction(X, _, _, Op, O1, O2, 0, 0), move_op(Op), f.op_immediate(O1, C),
          f.op_regdirect(O2, Reg), reg_full(Reg, R, W), W >= 4});
  p.rule("edge-zero", edge(X, R, X, none, 0, 0), {dua(X, R), zero_idiom(X)});
  p.rule("edge-move", edge(X, R, Ad, R2, 1, 0),
         {dua(X, R), f.instruction(X, _, _, text("mov"), O1, O2, 0, 0), f.op_regdirect(O1, Reg2),
          reg_full(Reg2, R2, W2), W2 >= 4, f.op_regdirect(O2, Reg), reg_full(Reg, R, W), W >= 4,
          def_used(Ad, R2, X, 1)});
  p.rule("edge-add", edge(X, R, Ad, R, 1, C),
         {dua(X, R), f.instruction(X, _, _, text("add"), O1, O2, 0, 0), f.op_immediate(O1, C),
          f.op_regdirect(O2, Reg), reg_full(Reg, R, W), W >= 4, def_used(Ad, R, X, 2)});
  p.rule("edge-sub", edge(X, R, Ad, R, 1, D),
         {dua(X, R), f.instruction(X, _, _, text("sub"), O1, O2, 0, 0), f.op_immediate(O1, C),
          f.op_regdirect(O2, Reg), reg_full(Reg, R, W), W >= 4, def_used(Ad, R, X, 2), D == -C});
  p.rule("edge-lea-rip", edge(X, R, X, none, 0, Disp), {dua(X, R), lea_mem(X, R, rip, _, _, Disp)});
  p.rule("edge-lea-abs", edge(X, R, X, none, 0, Disp), {dua(X, R), lea_mem(X, R, none, none, _, Disp)});
  p.rule("edge-lea-base", edge(X, R, Ad, R2, 1, Disp),
         {dua(X, R), lea_mem(X, R, Base, none, _, Disp), Base != rip, Base != none, reg_full(Base, R2, _),
          def_used(Ad, R2, X, 1)});
  p.rule("edge-lea-index", edge(X, R, Ad, R2, Mult, Disp),
         {dua(X, R), lea_mem(X, R, none, Index, Mult, Disp), Index != none, reg_full(Index, R2, _),
          def_used(Ad, R2, X, 1)});
  p.rule("edge-lea-same", edge(X, R, Ad, R2, M, Disp),
         {dua(X, R), lea_mem(X, R, Base, Base, Mult, Disp), Base != none, reg_full(Base, R2, _),
          def_used(Ad, R2, X, 1), M == Mult + 1});
  p.rule("edge-shl", edge(X, R, Ad, R, M, 0),
         {dua(X, R), f.instruction(X, _, _, text("shl"), O1, O2, 0, 0), f.op_immediate(O1, K), K >= 0, K <= 16,
          f.op_regdirect(O2, Reg), reg_full(Reg, R, W), W >= 4, def_used(Ad, R, X, 2), M == Expr(1) << K});
  p.rule("edge-imul", edge(X, R, Ad, R2, K, 0),
         {dua(X, R), f.instruction(X, _, _, text("imul"), O1, O2, O, 0), f.op_immediate(O1, K), K >= -kMultBound,
          K <= kMultBound, f.op_regdirect(O2, Reg2), reg_full(Reg2, R2, _), f.op_regdirect(O, Reg),
          reg_full(Reg, R, W), W >= 4, def_used(Ad, R2, X, 2)});
  p.rule("edge-double", edge(X, R, Ad, R, 2, 0),
         {dua(X, R), f.instruction(X, _, _, text("add"), O1, O2, 0, 0), f.op_regdirect(O1, Reg),
          f.op_regdirect(O2, Reg), reg_full(Reg, R, W), W >= 4, def_used(Ad, R, X, _)});
  p.rule("edge-unmodeled", edge(X, R, X, R, 1, 0), {def(X, R), code_in_block(X, _), !modeled(X)});

  // A modeled shape whose source register has no reaching definition (an
  // incoming argument, say) gets a tautology instead.
  p.rule("value-source", value_source(X, R2), {modeled(X), use(X, R2, _)});
  p.rule("source-reached", source_reached(X, R2), {value_source(X, R2), def_used(_, R2, X, _)});
  p.rule("source-unreached", unreached(X), {value_source(X, R2), !source_reached(X, R2)});
  p.rule("edge-unreached", edge(X, R, X, R, 1, 0), {def(X, R), code_in_block(X, _), unreached(X)});

  // Two-register operations Reg = R1 + R2*M + D, in both orders when M is 1.
  p.rule("reg-reg-add", reg_reg_op(X, R, R, R2, 1, 0),
         {dua(X, R), f.instruction(X, _, _, text("add"), O1, O2, 0, 0), f.op_regdirect(O1, Reg2),
          reg_full(Reg2, R2, W2), W2 >= 4, f.op_regdirect(O2, Reg), reg_full(Reg, R, W), W >= 4, R != R2});
  p.rule("reg-reg-add-swap", reg_reg_op(X, R, R2, R, 1, 0),
         {dua(X, R), f.instruction(X, _, _, text("add"), O1, O2, 0, 0), f.op_regdirect(O1, Reg2),
          reg_full(Reg2, R2, W2), W2 >= 4, f.op_regdirect(O2, Reg), reg_full(Reg, R, W), W >= 4, R != R2});
  p.rule("reg-reg-lea", reg_reg_op(X, R, R1, R2, Mult, Disp),
         {dua(X, R), lea_mem(X, R, Base, Index, Mult, Disp), Base != none, Base != rip, Index != none,
          Base != Index, reg_full(Base, R1, _), reg_full(Index, R2, _)});
  p.rule("reg-reg-lea-swap", reg_reg_op(X, R, R2, R1, 1, Disp),
         {dua(X, R), lea_mem(X, R, Base, Index, 1, Disp), Base != none, Base != rip, Index != none,
          Base != Index, reg_full(Base, R1, _), reg_full(Index, R2, _)});

  // Propagation.
  p.rule("val-leaf", reg_val(X, R, X, none, 0, C, 0), {edge(X, R, X, none, 0, C)});
  p.rule("val-unknown-leaf", reg_val(X, R, X, R, 1, 0, 0), {edge(X, R, X, R, 1, 0)});
  p.rule("val-chain", reg_val(X, R1, A3, R3, M1 * M2, D2 * M1 + D1, S + 1),
         {reg_val(A2, R2, A3, R3, M2, D2, S), edge(X, R1, A2, R2, M1, D1), X != A2, step_limit(Lim), S + 1 < Lim,
          M2 <= kMultBound, M2 >= -kMultBound, M1 <= kMultBound, M1 >= -kMultBound, D2 <= kDispBound,
          D2 >= -kDispBound});
  p.rule("val-loop", reg_val(X, R, A2, unknown, D2, D1, S + 1),
         {reg_val(X, R, A2, none, 0, D1, S), edge(X, R, X, R, 1, D2), D2 != 0, step_limit(Lim), S + 1 < Lim});
  p.rule("val-diamond", reg_val(X, R, A3, R3, M1 + M2 * M, D1 + D2 * M + Disp, max_of(S1, S2) + 1),
         {reg_reg_op(X, R, R1, R2, M, Disp), def_used(Ad, R1, X, _), def_used(Ad2, R2, X, _),
          reg_val(Ad, R1, A3, R3, M1, D1, S1), reg_val(Ad2, R2, A3, R3, M2, D2, S2), R3 != none, R3 != unknown,
          step_limit(Lim), max_of(S1, S2) + 1 < Lim, M1 <= kMultBound, M1 >= -kMultBound, M2 <= kMultBound,
          M2 >= -kMultBound, D1 <= kDispBound, D1 >= -kDispBound, D2 <= kDispBound, D2 >= -kDispBound});
  p.rule("val-const-right", reg_val(X, R, A3, R3, M1, D1 + C * M + Disp, max_of(S1, S2) + 1),
         {reg_reg_op(X, R, R1, R2, M, Disp), def_used(Ad, R1, X, _), def_used(Ad2, R2, X, _),
          reg_val(Ad, R1, A3, R3, M1, D1, S1), reg_val(Ad2, R2, _, none, 0, C, S2), step_limit(Lim),
          max_of(S1, S2) + 1 < Lim, D1 <= kDispBound, D1 >= -kDispBound, C <= kDispBound, C >= -kDispBound});
  p.rule("val-const-left", reg_val(X, R, A3, R3, M2 * M, C + D2 * M + Disp, max_of(S1, S2) + 1),
         {reg_reg_op(X, R, R1, R2, M, Disp), def_used(Ad, R1, X, _), def_used(Ad2, R2, X, _),
          reg_val(Ad, R1, _, none, 0, C, S1), reg_val(Ad2, R2, A3, R3, M2, D2, S2), step_limit(Lim),
          max_of(S1, S2) + 1 < Lim, M2 <= kMultBound, M2 >= -kMultBound, D2 <= kDispBound, D2 >= -kDispBound,
          C <= kDispBound, C >= -kDispBound});

  // Register values at a use: const, loop (base + Unknown*M) or reg (R3*M + C).
  p.rule("use-const", use_val(X, I, R, kConst, C, 0),
         {def_used(Ad, R, X, I), reg_val(Ad, R, _, none, 0, C, _)});
  p.rule("use-loop", use_val(X, I, R, kLoop, C, M),
         {def_used(Ad, R, X, I), reg_val(Ad, R, _, unknown, M, C, _)});
  p.rule("use-reg", use_val(X, I, R, kReg, C, M),
         {def_used(Ad, R, X, I), reg_val(Ad, R, _, R3, M, C, _), R3 != none, R3 != unknown});

  // Data access patterns.
  p.rule("memory-access", mem_access(X, I, Base, Index, Mult, Disp, Size),
         {code_in_block(X, _), instruction_operand(X, I, O), f.op_indirect(O, _, Base, Index, Mult, Disp, Size),
          f.instruction(X, _, _, Op, _, _, _, _), Op != text("lea"), Op != text("nop")});
  p.rule("dap-rip", dap_cand(Disp, Size, 0, X), {mem_access(X, _, rip, none, _, Disp, Size)});
  p.rule("dap-absolute", dap_cand(Disp, Size, 0, X), {mem_access(X, _, none, none, _, Disp, Size)});
  p.rule("dap-base-const", dap_cand(Addr, Size, 0, X),
         {mem_access(X, I, Base, none, _, Disp, Size), Base != rip, Base != none, reg_full(Base, R, _),
          use_val(X, I, R, kConst, C, _), Addr == C + Disp});
  p.rule("dap-base-loop", dap_cand(Addr, Size, M, X),
         {mem_access(X, I, Base, none, _, Disp, Size), Base != rip, Base != none, reg_full(Base, R, _),
          use_val(X, I, R, kLoop, C, M), Addr == C + Disp});
  p.rule("dap-index", dap_cand(Addr, Size, M2, X),
         {mem_access(X, I, none, Index, Mult, Disp, Size), Index != none, reg_full(Index, R, _),
          use_val(X, I, R, Kind, C, M), C <= kDispBound, C >= -kDispBound, M <= kMultBound, M >= -kMultBound,
          Addr == C * Mult + Disp, M2 == M * Mult});
  p.rule("dap-base-const-index", dap_cand(Addr, Size, M2, X),
         {mem_access(X, I, Base, Index, Mult, Disp, Size), Base != rip, Base != none, Index != none,
          reg_full(Base, R1, _), reg_full(Index, R2, _), use_val(X, I, R1, kConst, C2, _),
          use_val(X, I, R2, Kind, C, M), C <= kDispBound, C >= -kDispBound, C2 <= kDispBound, C2 >= -kDispBound,
          M <= kMultBound, M >= -kMultBound, Addr == C2 + C * Mult + Disp, M2 == M * Mult});
  p.rule("dap-base-loop-index-const", dap_cand(Addr, Size, M, X),
         {mem_access(X, I, Base, Index, Mult, Disp, Size), Base != rip, Base != none, Index != none,
          reg_full(Base, R1, _), reg_full(Index, R2, _), use_val(X, I, R1, kLoop, C2, M),
          use_val(X, I, R2, kConst, C, _), C <= kDispBound, C >= -kDispBound, Addr == C2 + C * Mult + Disp});
  p.rule("dap-best", dap_best(Addr, X, M2), {dap_cand(Addr, _, _, X), maximum(M2, M, {dap_cand(Addr, _, M, X)})});
  p.rule("dap", dap(Addr, Size, M, X), {dap_cand(Addr, Size, M, X), dap_best(Addr, X, M)});

  // Replicas at Addr + k*M inside the section, strictly before the next
  // distinct DAP address.
  p.rule("dap-address", dap_addr(Addr), {dap(Addr, _, _, _)});
  p.rule("next-dap", next_dap(Addr, Nx), {dap_addr(Addr), minimum(Nx, Y, {dap_addr(Y), Y > Addr})});
  p.rule("dap-section", dap_section(Addr, Hi), {dap_addr(Addr), section_range(Lo, Hi), Addr >= Lo, Addr < Hi});
  p.rule("propagation-origin", prop(Addr, Addr, Size, M, X), {dap(Addr, Size, M, X), dap_section(Addr, Hi), Addr + Size <= Hi});
  p.rule("propagation-bounded", prop(Orig, Y, Size, M, X),
         {prop(Orig, Addr, Size, M, X), M > 0, Y == Addr + M, next_dap(Orig, Nx), Y < Nx, dap_section(Orig, Hi),
          Y + Size <= Hi});
  p.rule("propagation-open", prop(Orig, Y, Size, M, X),
         {prop(Orig, Addr, Size, M, X), M > 0, Y == Addr + M, !next_dap(Orig, _), dap_section(Orig, Hi),
          Y + Size <= Hi});
  p.rule("propagated", propagated(Addr, Size, M, X), {prop(_, Addr, Size, M, X)});
  return p;
}

void run_analyses(const AnalysisOptions& options, int jobs, Database& db) {
  evaluate(build_program(options), db, EvalOptions{jobs});
}

}  // namespace rdis::analyses
