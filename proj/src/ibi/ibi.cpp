#include "rdis/ibi/ibi.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "rdis/relfix/engine.hpp"

namespace rdis::ibi {
namespace {

using namespace relfix;
constexpr auto A = ColumnKind::address;
constexpr auto N = ColumnKind::number;
constexpr auto T = ColumnKind::text;

std::string hex(Address a) {
  std::ostringstream s;
  s << "0x" << std::hex << a;
  return s.str();
}

const char* const kJcc[] = {"jo", "jno", "jb", "jae", "je", "jne", "jbe", "ja",
                            "js", "jns", "jp", "jnp", "jl", "jge", "jle", "jg"};

}  // namespace

Program build_program(const IbiWeights& w) {
  Program p;
  facts::FactRelations f = facts::declare_fact_inputs(p);
  auto jump_table_target = p.input("jump_table_target", {A});

  auto return_op = p.relation("return_operation", {T});
  auto jump_op = p.relation("jump_operation", {T});
  auto uncond_jump_op = p.relation("unconditional_jump_operation", {T});
  auto call_op = p.relation("call_operation", {T});
  auto halt_op = p.relation("halt_operation", {T});
  auto interrupt_op = p.relation("interrupt_operation", {T});
  auto padding_op = p.relation("padding_operation", {T});
  auto loop_prefix = p.relation("loop_prefix", {T});
  for (const char* op : {"ret"}) p.fact(return_op, {intern(op)});
  for (const char* op : {"jmp"}) p.fact(uncond_jump_op, {intern(op)});
  for (const char* op : {"jmp", "loop", "loope", "loopne", "jrcxz"}) p.fact(jump_op, {intern(op)});
  for (const char* op : kJcc) p.fact(jump_op, {intern(op)});
  for (const char* op : {"call"}) p.fact(call_op, {intern(op)});
  for (const char* op : {"hlt", "ud2"}) p.fact(halt_op, {intern(op)});
  for (const char* op : {"int", "int3", "syscall"}) p.fact(interrupt_op, {intern(op)});
  for (const char* op : {"nop", "int3"}) p.fact(padding_op, {intern(op)});
  for (const char* pre : {"rep", "repe", "repne"}) p.fact(loop_prefix, {intern(pre)});

  auto instruction_operand = p.relation("instruction_operand", {A, N, N});
  auto section_range = p.relation("section_range", {A, A});
  auto exec_range = p.relation("exec_range", {A, A});
  auto has_loop_prefix = p.relation("instruction_has_loop_prefix", {A});
  auto may_fallthrough = p.relation("may_fallthrough", {A, A});
  auto may_fallthrough_from = p.relation("may_fallthrough_from", {A});
  auto must_fallthrough = p.relation("must_fallthrough", {A, A});
  auto direct_jump = p.relation("direct_jump", {A, A});
  auto direct_call = p.relation("direct_call", {A, A});
  auto pc_relative_jump = p.relation("pc_relative_jump", {A, A});
  auto pc_relative_call = p.relation("pc_relative_call", {A, A});
  auto invalid_edge = p.relation("invalid_edge", {A, A});
  auto instruction_at = p.relation("instruction_at", {A});
  auto pea = p.relation("possible_effective_address", {A});
  auto initial_target = p.relation("initial_target", {A});
  auto symbolic_imm = p.relation("may_have_symbolic_immediate", {A, A});
  auto approx_pad = p.relation("approx_after_padding", {A});
  auto approx_after_end = p.relation("approx_after_block_end", {A});
  auto block_limit = p.relation("block_limit", {A});
  auto cibc = p.relation("code_in_block_candidate", {A, A});
  auto possible_target = p.relation("possible_target", {A});
  auto after_pad = p.relation("after_padding", {A, A});
  auto after_block_end = p.relation("after_block_end", {A, A});
  auto candidate_block = p.relation("candidate_block", {A});
  auto block_end = p.relation("candidate_block_end", {A, A});
  auto inner_byte = p.relation("instruction_inner_byte", {A, A});
  auto block_overlap = p.relation("block_overlap", {A, A});
  auto overlapping_block = p.relation("overlapping_block", {A});
  auto potential_table = p.relation("potential_jump_table", {A});
  auto block_points = p.relation("block_points", {A, A, N, T});
  auto block_total = p.relation("block_total", {A, N});

  Var X("X"), Y("Y"), Z("Z"), From("From"), To("To"), Size("Size"), Op("Op"), Pre("Pre"), O("O");
  Var S("S"), E("E"), L("L"), Src("Src"), B("B"), B2("B2"), Prev("Prev"), I("I"), P("P"), Why("Why");
  Var V("V"), V2("V2"), L2("L2");

  // Operand positions 1..4.
  p.rule("operand-1", instruction_operand(X, 1, O), {f.instruction(X, _, _, _, O, _, _, _), O != 0});
  p.rule("operand-2", instruction_operand(X, 2, O), {f.instruction(X, _, _, _, _, O, _, _), O != 0});
  p.rule("operand-3", instruction_operand(X, 3, O), {f.instruction(X, _, _, _, _, _, O, _), O != 0});
  p.rule("operand-4", instruction_operand(X, 4, O), {f.instruction(X, _, _, _, _, _, _, O), O != 0});
  p.rule("section-range", section_range(S, E), {f.section(_, S, L, _, _, _), L > 0, E == S + L});
  p.rule("exec-range", exec_range(S, E), {f.section(_, S, L, 1, _, _), L > 0, E == S + L});
  p.rule("loop-prefix", has_loop_prefix(X), {f.instruction(X, _, Pre, _, _, _, _, _), loop_prefix(Pre)});

  p.rule("may-fallthrough", may_fallthrough(From, To),
         {f.instruction(From, Size, _, Op, _, _, _, _), To == From + Size, !return_op(Op),
          !uncond_jump_op(Op), !halt_op(Op)});
  p.rule("may-fallthrough-from", may_fallthrough_from(From), {may_fallthrough(From, _)});
  p.rule("must-fallthrough", must_fallthrough(From, To),
         {may_fallthrough(From, To), f.instruction(From, _, _, Op, _, _, _, _), !call_op(Op),
          !interrupt_op(Op), !jump_op(Op), !has_loop_prefix(From)});
  p.rule("direct-jump", direct_jump(From, To),
         {f.instruction(From, _, _, Op, O, _, _, _), jump_op(Op), f.op_immediate(O, To)});
  p.rule("direct-call", direct_call(From, To),
         {f.instruction(From, _, _, Op, O, _, _, _), call_op(Op), f.op_immediate(O, To)});
  p.rule("pc-relative-jump", pc_relative_jump(From, To),
         {f.instruction(From, _, _, Op, O, _, _, _), jump_op(Op),
          f.op_indirect(O, _, text("RIP"), _, _, To, _), exec_range(S, E), To >= S, To < E});
  p.rule("pc-relative-call", pc_relative_call(From, To),
         {f.instruction(From, _, _, Op, O, _, _, _), call_op(Op),
          f.op_indirect(O, _, text("RIP"), _, _, To, _), exec_range(S, E), To >= S, To < E});

  // Backward propagation of invalid.
  p.rule("edge-must", invalid_edge(From, To), {must_fallthrough(From, To)});
  p.rule("edge-jump", invalid_edge(From, To), {direct_jump(From, To)});
  p.rule("edge-call", invalid_edge(From, To), {direct_call(From, To)});
  p.rule("edge-pc-jump", invalid_edge(From, To), {pc_relative_jump(From, To)});
  p.rule("edge-pc-call", invalid_edge(From, To), {pc_relative_call(From, To)});
  p.rule("instruction-at", instruction_at(X), {f.instruction(X, _, _, _, _, _, _, _)});
  p.rule("invalid-target", f.invalid(From), {invalid_edge(From, To), f.invalid(To)});
  p.rule("invalid-missing", f.invalid(From), {invalid_edge(From, To), !instruction_at(To)});
  p.rule("possible-ea", pea(X), {instruction_at(X), !f.invalid(X)});

  // Forward traversal.
  p.rule("initial-entry", initial_target(X), {f.entry_point(X)});
  p.rule("initial-function", initial_target(X), {f.symbol(X, _, text("FUNC"))});
  p.rule("initial-extra", initial_target(X), {f.extra_target(X)});
  p.rule("initial-table", initial_target(X), {jump_table_target(X)});
  p.rule("initial-section", initial_target(X), {f.section(_, X, _, 1, _, _)});
  p.rule("initial-data", initial_target(X), {f.address_in_data(_, X)});
  p.rule("symbolic-immediate", symbolic_imm(Src, V),
         {instruction_operand(Src, _, O), f.op_immediate(O, V), section_range(S, E), V >= S, V < E});

  p.rule("approx-end", approx_pad(X),
         {pea(E), f.instruction(E, Size, _, _, _, _, _, _), !may_fallthrough_from(E), X == E + Size});
  p.rule("approx-padding", approx_pad(Y),
         {approx_pad(X), f.instruction(X, Size, _, Op, _, _, _, _), padding_op(Op), Y == X + Size});
  p.rule("approx-after-end", approx_after_end(X),
         {approx_pad(X), pea(X), f.instruction(X, _, _, Op, _, _, _, _), !padding_op(Op)});
  p.rule("limit-initial", block_limit(X), {initial_target(X)});
  p.rule("limit-immediate", block_limit(X), {symbolic_imm(_, X)});
  p.rule("limit-pc-jump", block_limit(X), {pc_relative_jump(_, X)});
  p.rule("limit-pc-call", block_limit(X), {pc_relative_call(_, X)});
  p.rule("limit-after-end", block_limit(X), {approx_after_end(X)});

  p.rule("block-start", cibc(X, X), {possible_target(X), pea(X)});
  p.rule("block-extend", cibc(X, B), {cibc(Prev, B), must_fallthrough(Prev, X), !block_limit(X)});
  p.rule("block-split-may", cibc(X, X),
         {cibc(Prev, _), may_fallthrough(Prev, X), !must_fallthrough(Prev, X), pea(X)});
  p.rule("block-split-limit", cibc(X, X), {cibc(Prev, _), may_fallthrough(Prev, X), block_limit(X), pea(X)});
  p.rule("target-initial", possible_target(X), {initial_target(X)});
  p.rule("target-immediate", possible_target(X), {cibc(Src, _), symbolic_imm(Src, X)});
  p.rule("target-pc-jump", possible_target(X), {cibc(Src, _), pc_relative_jump(Src, X)});
  p.rule("target-pc-call", possible_target(X), {cibc(Src, _), pc_relative_call(Src, X)});
  p.rule("target-after-end", possible_target(X), {after_block_end(_, X)});
  p.rule("after-end", after_pad(E, X),
         {cibc(E, _), f.instruction(E, Size, _, _, _, _, _, _), !may_fallthrough_from(E), X == E + Size});
  p.rule("after-padding", after_pad(E, Y),
         {after_pad(E, X), f.instruction(X, Size, _, Op, _, _, _, _), padding_op(Op), Y == X + Size});
  p.rule("after-block-end", after_block_end(E, X),
         {after_pad(E, X), pea(X), f.instruction(X, _, _, Op, _, _, _, _), !padding_op(Op)});

  // Candidate extents and overlap.
  p.rule("candidate-block", candidate_block(B), {cibc(_, B)});
  p.rule("candidate-end", block_end(B, E),
         {candidate_block(B), maximum(E, X + Size, {cibc(X, B), f.instruction(X, Size, _, _, _, _, _, _)})});
  p.rule("inner-first", inner_byte(X, I),
         {cibc(I, _), f.instruction(I, Size, _, _, _, _, _, _), Size > 1, X == I + 1});
  p.rule("inner-next", inner_byte(Y, I),
         {inner_byte(X, I), f.instruction(I, Size, _, _, _, _, _, _), Y == X + 1, Y < I + Size});
  p.rule("overlap-inside", block_overlap(B, B2), {cibc(I, B), inner_byte(X, I), cibc(X, B2)});
  p.rule("overlap-inside-rev", block_overlap(B2, B), {cibc(I, B), inner_byte(X, I), cibc(X, B2)});
  p.rule("overlap-shared", block_overlap(B, B2), {cibc(I, B), cibc(I, B2), B != B2});
  p.rule("overlapping-block", overlapping_block(B), {block_overlap(B, _)});
  p.rule("potential-jump-table", potential_table(L),
         {f.address_in_data(L, V), exec_range(S, E), L >= S, L + 16 <= E, L2 == L + 8,
          f.address_in_data(L2, V2)});

  // Points.
  auto incoming = [&](const char* why, const RelationRef& edge) {
    p.rule(std::string("points-") + why, block_points(B, Src, w.incoming, text(why)),
           {edge(X, B), candidate_block(B), cibc(X, Src), Src != B, !overlapping_block(Src)});
  };
  incoming("incoming-jump", direct_jump);
  incoming("incoming-call", direct_call);
  incoming("incoming-fallthrough", may_fallthrough);
  p.rule("points-address-in-data", block_points(B, 0, w.appears, text("address-in-data")),
         {candidate_block(B), f.address_in_data(_, B)});
  p.rule("points-aligned", block_points(B, 0, w.aligned, text("aligned-address-in-data")),
         {candidate_block(B), f.address_in_data(L, B), L % 8 == 0});
  p.rule("points-immediate", block_points(B, 0, w.appears, text("address-in-code")),
         {candidate_block(B), symbolic_imm(Src, B), cibc(Src, _)});
  auto outgoing = [&](const char* why, const RelationRef& edge) {
    p.rule(std::string("points-") + why, block_points(B, Y, w.outgoing, text(why)),
           {cibc(X, B), edge(X, Y), candidate_block(Y), Y != B, !overlapping_block(Y)});
  };
  outgoing("outgoing-jump", direct_jump);
  outgoing("outgoing-call", direct_call);
  p.rule("points-jump-table", block_points(B, 0, w.jump_table_overlap, text("jump-table-overlap")),
         {potential_table(L), cibc(X, B), f.instruction(X, Size, _, _, _, _, _, _), X < L + 16,
          X + Size > L});
  p.rule("block-total", block_total(B, Z), {candidate_block(B), sum(Z, P, {block_points(B, _, P, _)})});
  (void)Why;
  (void)Z;
  return p;
}

const Block* CodeLayout::block_at(Address start) const {
  auto it = std::lower_bound(blocks.begin(), blocks.end(), start,
                             [](const Block& b, Address a) { return b.start < a; });
  return it != blocks.end() && it->start == start ? &*it : nullptr;
}

const Block* CodeLayout::block_containing(Address a) const {
  auto it = std::upper_bound(blocks.begin(), blocks.end(), a,
                             [](Address x, const Block& b) { return x < b.start; });
  if (it == blocks.begin()) return nullptr;
  --it;
  return a < it->end ? &*it : nullptr;
}

bool CodeLayout::is_instruction(Address a) const {
  const Block* b = block_containing(a);
  return b && std::binary_search(b->instructions.begin(), b->instructions.end(), a);
}

CodeLayout resolve(const Database& db, const facts::FactBase& facts, const IbiWeights& weights) {
  std::map<Address, Block> cands;
  for (const Tuple& t : db.at("code_in_block_candidate").sorted_rows()) {
    Block& b = cands[static_cast<Address>(t[1])];
    b.start = static_cast<Address>(t[1]);
    b.instructions.push_back(static_cast<Address>(t[0]));
  }
  for (const Tuple& t : db.at("candidate_block_end").sorted_rows())
    cands[static_cast<Address>(t[0])].end = static_cast<Address>(t[1]);
  for (const Tuple& t : db.at("block_total").sorted_rows())
    cands[static_cast<Address>(t[0])].points = t[1];
  std::map<Address, std::vector<Address>> overlaps;
  for (const Tuple& t : db.at("block_overlap").sorted_rows())
    overlaps[static_cast<Address>(t[0])].push_back(static_cast<Address>(t[1]));

  CodeLayout out;
  std::vector<const Block*> order;
  for (auto& [start, b] : cands) {
    std::sort(b.instructions.begin(), b.instructions.end());
    if (b.points < weights.threshold)
      out.discarded.push_back({start, "below-threshold", 0});
    else
      order.push_back(&b);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const Block* a, const Block* b) { return a->points > b->points; });
  std::set<Address> kept;
  for (const Block* b : order) {
    Address winner = 0;
    for (Address other : overlaps[b->start])
      if (kept.count(other) && (winner == 0 || other < winner)) winner = other;
    if (winner == 0) {
      kept.insert(b->start);
      continue;
    }
    out.discarded.push_back({b->start, "overlap", winner});
    if (cands[winner].points == b->points)
      out.warnings.push_back("tie between blocks " + hex(winner) + " and " + hex(b->start) + " at " +
                             std::to_string(b->points) + " points; kept " + hex(winner));
  }
  for (Address s : kept) out.blocks.push_back(cands[s]);
  std::sort(out.discarded.begin(), out.discarded.end(),
            [](const Discard& a, const Discard& b) { return a.block < b.block; });

  for (const facts::Section& s : facts.sections) {
    if (!s.executable || s.length == 0) continue;
    Address cursor = s.start;
    auto it = std::lower_bound(out.blocks.begin(), out.blocks.end(), s.start,
                               [](const Block& b, Address a) { return b.start < a; });
    for (; it != out.blocks.end() && it->start < s.end(); ++it) {
      if (it->start > cursor) out.data_regions.emplace_back(cursor, it->start);
      cursor = std::max(cursor, it->end);
    }
    if (cursor < s.end()) out.data_regions.emplace_back(cursor, s.end());
  }
  return out;
}

void add_layout_relations(const CodeLayout& layout, Database& db) {
  Relation& block = db.add("block", {A, A});
  Relation& cib = db.add("code_in_block", {A, A});
  Relation& region = db.add("data_region", {A, A});
  Relation& discarded = db.add("discarded_block", {A, T, A});
  for (const Block& b : layout.blocks) {
    block.insert(Tuple{static_cast<Value>(b.start), static_cast<Value>(b.end)});
    for (Address a : b.instructions) cib.insert(Tuple{static_cast<Value>(a), static_cast<Value>(b.start)});
  }
  for (auto [s, e] : layout.data_regions) region.insert(Tuple{static_cast<Value>(s), static_cast<Value>(e)});
  for (const Discard& d : layout.discarded)
    discarded.insert(Tuple{static_cast<Value>(d.block), intern(d.reason), static_cast<Value>(d.winner)});
}

CodeLayout run_ibi(const facts::FactBase& facts, const std::vector<Address>& jump_table_targets,
                   const IbiWeights& weights, int jobs, Database& db) {
  Relation& targets = db.add("jump_table_target", {A});
  for (Address t : jump_table_targets) targets.insert(Tuple{static_cast<Value>(t)});
  evaluate(build_program(weights), db, EvalOptions{jobs});
  CodeLayout layout = resolve(db, facts, weights);
  add_layout_relations(layout, db);
  return layout;
}

}  // namespace rdis::ibi
