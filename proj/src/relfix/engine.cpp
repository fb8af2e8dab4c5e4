#include "rdis/relfix/engine.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "plan.hpp"
#include "rdis/relfix/error.hpp"
#include "rdis/relfix/stratify.hpp"

namespace rdis::relfix {
namespace {

using detail::Arg;
using detail::ArgMode;
using detail::CExpr;
using detail::Plan;
using detail::Step;

struct Range {
  std::uint32_t delta_lo = 0;
  std::uint32_t hi = 0;
};

void collect_vars(const Expr& e, std::set<std::string>& out) {
  const ExprNode& n = e.node();
  if (n.op == ExprOp::var) out.insert(n.name);
  if (n.lhs) collect_vars(Expr(n.lhs), out);
  if (n.rhs) collect_vars(Expr(n.rhs), out);
}

void literal_vars(const Literal& l, std::set<std::string>& out) {
  switch (l.kind) {
    case Literal::Kind::atom:
    case Literal::Kind::negation:
      for (const Expr& a : l.atom.args) collect_vars(a, out);
      break;
    case Literal::Kind::comparison:
      collect_vars(l.lhs, out);
      collect_vars(l.rhs, out);
      break;
    case Literal::Kind::aggregate:
      out.insert(l.aggregate->result);
      collect_vars(l.aggregate->target, out);
      for (const Literal& s : l.aggregate->body) literal_vars(s, out);
      break;
  }
}

bool subset(const std::set<std::string>& a, const std::set<std::string>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

class Planner {
 public:
  Planner(Database& db, const std::unordered_map<std::string, Range>& ranges)
      : db_(db), ranges_(ranges) {}

  Plan build(const Rule& rule, int delta_pos) {
    Plan plan;
    plan.rule = &rule;
    plan_ = &plan;
    slots_.clear();
    std::set<std::string> bound;
    plan.steps = schedule(rule, rule.body, bound, delta_pos);
    for (const Expr& e : rule.head.args) plan.head.push_back(compile(e));
    plan.slot_names.resize(slots_.size());
    for (const auto& [name, slot] : slots_) plan.slot_names[static_cast<std::size_t>(slot)] = name;
    return plan;
  }

 private:
  int slot_of(const std::string& name) {
    auto it = slots_.find(name);
    if (it != slots_.end()) return it->second;
    int s = static_cast<int>(slots_.size());
    slots_.emplace(name, s);
    return s;
  }

  int compile(const Expr& e) {
    const ExprNode& n = e.node();
    CExpr c;
    c.op = n.op;
    c.value = n.value;
    if (n.op == ExprOp::var) c.slot = slot_of(n.name);
    if (n.lhs) c.lhs = compile(Expr(n.lhs));
    if (n.rhs) c.rhs = compile(Expr(n.rhs));
    plan_->pool.nodes.push_back(c);
    return static_cast<int>(plan_->pool.nodes.size()) - 1;
  }

  Relation& rel(const std::string& name) { return db_.at(name); }

  Step scan_step(const Atom& atom, std::set<std::string>& bound, bool delta, bool negated) {
    Step s;
    s.kind = negated ? Step::Kind::negation : Step::Kind::scan;
    Relation& r = rel(atom.relation);
    s.rel = &r;
    std::set<std::string> local;
    for (std::size_t c = 0; c < atom.args.size(); ++c) {
      const Expr& a = atom.args[c];
      Arg arg;
      if (a.is_wildcard()) {
        arg.mode = ArgMode::skip;
      } else if (a.is_var() && !bound.count(a.node().name)) {
        arg.slot = slot_of(a.node().name);
        arg.mode = local.insert(a.node().name).second ? ArgMode::bind : ArgMode::same;
      } else {
        arg.mode = ArgMode::check;
        arg.expr = compile(a);
        s.mask |= 1u << c;
      }
      s.args.push_back(arg);
    }
    bound.insert(local.begin(), local.end());
    if (s.mask != 0) r.ensure_index(s.mask);
    auto it = ranges_.find(atom.relation);
    if (it != ranges_.end()) {
      s.hi = it->second.hi;
      s.lo = delta ? it->second.delta_lo : 0;
    } else {
      s.hi = static_cast<std::uint32_t>(r.size());
      s.lo = 0;
    }
    return s;
  }

  bool schedulable_atom(const Atom& atom, const std::set<std::string>& bound) {
    for (const Expr& a : atom.args) {
      if (a.is_var() || a.is_wildcard() || a.is_const()) continue;
      std::set<std::string> v;
      collect_vars(a, v);
      if (!subset(v, bound)) return false;
    }
    return true;
  }

  int bound_args(const Atom& atom, const std::set<std::string>& bound) {
    int n = 0;
    for (const Expr& a : atom.args) {
      if (a.is_wildcard()) continue;
      if (a.is_var() && !bound.count(a.node().name)) continue;
      ++n;
    }
    return n;
  }

  std::vector<Step> schedule(const Rule& rule, const std::vector<Literal>& body,
                             std::set<std::string>& bound, int delta_pos) {
    std::vector<Step> steps;
    std::vector<bool> done(body.size(), false);
    std::size_t left = body.size();
    if (delta_pos >= 0) {
      steps.push_back(scan_step(body[static_cast<std::size_t>(delta_pos)].atom, bound, true, false));
      done[static_cast<std::size_t>(delta_pos)] = true;
      --left;
    }
    // Variables that occur outside each aggregate (its group-by keys).
    std::vector<std::set<std::string>> outside(body.size());
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i].kind != Literal::Kind::aggregate) continue;
      std::set<std::string> others;
      for (std::size_t j = 0; j < body.size(); ++j)
        if (j != i) literal_vars(body[j], others);
      for (const Expr& e : rule.head.args) collect_vars(e, others);
      std::set<std::string> mine;
      for (const Literal& s : body[i].aggregate->body) literal_vars(s, mine);
      collect_vars(body[i].aggregate->target, mine);
      for (const std::string& v : mine)
        if (others.count(v)) outside[i].insert(v);
    }

    while (left > 0) {
      bool progress = true;
      while (progress) {
        progress = false;
        for (std::size_t i = 0; i < body.size(); ++i) {
          if (done[i]) continue;
          const Literal& l = body[i];
          std::set<std::string> vars;
          if (l.kind == Literal::Kind::comparison) {
            std::set<std::string> lv, rv;
            collect_vars(l.lhs, lv);
            collect_vars(l.rhs, rv);
            if (subset(lv, bound) && subset(rv, bound)) {
              Step s;
              s.kind = Step::Kind::filter;
              s.cmp = l.cmp;
              s.lhs = compile(l.lhs);
              s.rhs = compile(l.rhs);
              steps.push_back(s);
            } else if (l.cmp == CmpOp::eq && l.lhs.is_var() && !bound.count(l.lhs.node().name) &&
                       subset(rv, bound)) {
              Step s;
              s.kind = Step::Kind::assign;
              s.slot = slot_of(l.lhs.node().name);
              s.rhs = compile(l.rhs);
              steps.push_back(s);
              bound.insert(l.lhs.node().name);
            } else if (l.cmp == CmpOp::eq && l.rhs.is_var() && !bound.count(l.rhs.node().name) &&
                       subset(lv, bound)) {
              Step s;
              s.kind = Step::Kind::assign;
              s.slot = slot_of(l.rhs.node().name);
              s.rhs = compile(l.lhs);
              steps.push_back(s);
              bound.insert(l.rhs.node().name);
            } else {
              continue;
            }
          } else if (l.kind == Literal::Kind::negation) {
            literal_vars(l, vars);
            if (!subset(vars, bound)) continue;
            steps.push_back(scan_step(l.atom, bound, false, true));
          } else if (l.kind == Literal::Kind::aggregate) {
            std::set<std::string> keys = outside[i];
            keys.erase(l.aggregate->result);
            if (!subset(keys, bound)) continue;
            Step s;
            s.kind = Step::Kind::aggregate;
            s.agg = l.aggregate->kind;
            s.slot = slot_of(l.aggregate->result);
            std::set<std::string> inner = keys;
            s.sub = schedule(rule, l.aggregate->body, inner, -1);
            s.target = compile(l.aggregate->target);
            steps.push_back(std::move(s));
            bound.insert(l.aggregate->result);
          } else {
            continue;
          }
          done[i] = true;
          --left;
          progress = true;
        }
      }
      if (left == 0) break;
      int best = -1;
      int best_score = -1;
      std::size_t best_size = 0;
      for (std::size_t i = 0; i < body.size(); ++i) {
        if (done[i] || body[i].kind != Literal::Kind::atom) continue;
        if (!schedulable_atom(body[i].atom, bound)) continue;
        int score = bound_args(body[i].atom, bound);
        std::size_t size = rel(body[i].atom.relation).size();
        if (best < 0 || score > best_score || (score == best_score && size < best_size)) {
          best = static_cast<int>(i);
          best_score = score;
          best_size = size;
        }
      }
      if (best < 0)
        throw Error(ErrorKind::unbound_variable, rule.label + ": no literal can be scheduled");
      steps.push_back(scan_step(body[static_cast<std::size_t>(best)].atom, bound, false, false));
      done[static_cast<std::size_t>(best)] = true;
      --left;
    }
    return steps;
  }

  Database& db_;
  const std::unordered_map<std::string, Range>& ranges_;
  Plan* plan_ = nullptr;
  std::map<std::string, int> slots_;
};

void flush(Database& db, std::map<std::string, std::vector<Value>>& pending, std::size_t& derived) {
  for (auto& [name, values] : pending) {
    Relation& r = db.at(name);
    const std::size_t n = r.arity();
    std::vector<std::size_t> order(n ? values.size() / n : 0);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(values.begin() + a * n, values.begin() + (a + 1) * n,
                                          values.begin() + b * n, values.begin() + (b + 1) * n);
    });
    for (std::size_t i : order)
      if (r.insert(std::span<const Value>(values.data() + i * n, n))) ++derived;
    values.clear();
  }
}

}  // namespace

EvalStats evaluate(const Program& program, Database& db, const EvalOptions& options) {
  std::vector<Stratum> strata = stratify(program);
  for (const RelationDecl& d : program.relations()) db.add(d.name, d.schema);
  for (const auto& [name, tuple] : program.facts()) db.at(name).insert(tuple);

  EvalStats stats;
  stats.strata = strata.size();
  const int jobs = std::max(1, options.jobs);
  for (const Stratum& stratum : strata) {
    if (stratum.rules.empty()) continue;
    std::unordered_map<std::string, Range> ranges;
    std::set<std::string> members;
    for (std::size_t r : stratum.relations) {
      const std::string& name = program.relations()[r].name;
      members.insert(name);
      ranges[name] = Range{0, static_cast<std::uint32_t>(db.at(name).size())};
    }
    auto run = [&](const Rule& rule, int delta_pos, std::map<std::string, std::vector<Value>>& pending) {
      Planner planner(db, ranges);
      Plan plan = planner.build(rule, delta_pos);
      const Relation& head = db.at(rule.head.relation);
      detail::Output out{head.arity(), {}};
      if (jobs > 1)
        detail::run_plan_parallel(plan, head, out, jobs);
      else
        detail::run_plan_serial(plan, head, out);
      auto& dst = pending[rule.head.relation];
      dst.insert(dst.end(), out.values.begin(), out.values.end());
    };

    std::map<std::string, std::vector<Value>> pending;
    for (std::size_t r : stratum.rules) run(program.rules()[r], -1, pending);
    flush(db, pending, stats.derived);
    ++stats.iterations;
    if (!stratum.recursive) continue;

    while (true) {
      bool grew = false;
      for (auto& [name, range] : ranges) {
        std::uint32_t now = static_cast<std::uint32_t>(db.at(name).size());
        range.delta_lo = range.hi;
        range.hi = now;
        if (range.hi > range.delta_lo) grew = true;
      }
      if (!grew) break;
      for (std::size_t r : stratum.rules) {
        const Rule& rule = program.rules()[r];
        for (std::size_t p = 0; p < rule.body.size(); ++p) {
          const Literal& l = rule.body[p];
          if (l.kind != Literal::Kind::atom || !members.count(l.atom.relation)) continue;
          const Range& range = ranges[l.atom.relation];
          if (range.hi == range.delta_lo) continue;
          run(rule, static_cast<int>(p), pending);
        }
      }
      flush(db, pending, stats.derived);
      ++stats.iterations;
    }
  }
  return stats;
}

}  // namespace rdis::relfix
