// Random stratified programs checked against a naive fixpoint evaluator
// that shares nothing with the engine except the stratum order.
#include <array>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "rdis/relfix/engine.hpp"
#include "rdis/relfix/error.hpp"
#include "rdis/relfix/stratify.hpp"
#include "support.hpp"

namespace rdis::support {

using namespace rdis::relfix;

namespace {

constexpr auto N = ColumnKind::number;

struct RAtom {
  int rel;
  std::vector<int> args;  // >= 0 variable id, < 0 constant -(c+1)
  bool negated = false;
};

struct RRule {
  RAtom head;
  std::vector<RAtom> body;
  bool has_lt = false;
  int lt_a = 0, lt_b = 0;  // var ids, require v[a] < v[b]
};

struct RProgram {
  std::vector<int> arity;  // 4 relations; 0,1 are inputs
  std::vector<RRule> rules;
  std::map<int, std::set<Tuple>> facts;
};

const char* kVarNames[] = {"X", "Y", "Z", "W"};

RProgram generate(std::mt19937_64& rng) {
  RProgram p;
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
  p.arity = {1 + pick(2), 1 + pick(2), 1 + pick(2), 1 + pick(2)};
  for (int r = 0; r < 2; ++r) {
    int nfacts = pick(31);
    for (int i = 0; i < nfacts; ++i) {
      Tuple t;
      for (int c = 0; c < p.arity[r]; ++c) t.push_back(pick(5));
      p.facts[r].insert(t);
    }
  }
  int nrules = 1 + pick(8);
  for (int i = 0; i < nrules; ++i) {
    RRule rule;
    int npos = 1 + pick(3);
    std::set<int> bound;
    for (int b = 0; b < npos; ++b) {
      RAtom a;
      a.rel = pick(4);
      for (int c = 0; c < p.arity[a.rel]; ++c) {
        if (pick(5) == 0) {
          a.args.push_back(-(pick(5) + 1));
        } else {
          int v = pick(4);
          a.args.push_back(v);
          bound.insert(v);
        }
      }
      rule.body.push_back(a);
    }
    if (bound.empty()) continue;
    std::vector<int> bv(bound.begin(), bound.end());
    if (pick(3) == 0) {
      RAtom n;
      n.rel = pick(4);
      n.negated = true;
      for (int c = 0; c < p.arity[n.rel]; ++c) n.args.push_back(bv[static_cast<std::size_t>(pick(static_cast<int>(bv.size())))]);
      rule.body.push_back(n);
    }
    if (pick(4) == 0 && bv.size() >= 2) {
      rule.has_lt = true;
      rule.lt_a = bv[0];
      rule.lt_b = bv[1];
    }
    rule.head.rel = 2 + pick(2);
    for (int c = 0; c < p.arity[rule.head.rel]; ++c)
      rule.head.args.push_back(pick(6) == 0 ? -(pick(5) + 1) : bv[static_cast<std::size_t>(pick(static_cast<int>(bv.size())))]);
    p.rules.push_back(rule);
  }
  return p;
}

std::string rel_name(int r) { return "r" + std::to_string(r); }

Program to_program(const RProgram& rp) {
  Program p;
  std::vector<RelationRef> refs;
  for (int r = 0; r < 4; ++r) {
    std::vector<ColumnKind> schema(static_cast<std::size_t>(rp.arity[static_cast<std::size_t>(r)]), N);
    refs.push_back(r < 2 ? p.input(rel_name(r), schema) : p.relation(rel_name(r), schema));
  }
  auto term = [](int a) -> Expr {
    if (a >= 0) return Var(kVarNames[a]);
    return Expr(-(a + 1));
  };
  int idx = 0;
  for (const RRule& rule : rp.rules) {
    std::vector<Literal> body;
    for (const RAtom& a : rule.body) {
      std::vector<Expr> args;
      for (int x : a.args) args.push_back(term(x));
      Atom atom = refs[static_cast<std::size_t>(a.rel)].make(args);
      body.push_back(a.negated ? !atom : Literal(atom));
    }
    if (rule.has_lt) body.push_back(Var(kVarNames[rule.lt_a]) < Var(kVarNames[rule.lt_b]));
    std::vector<Expr> head;
    for (int x : rule.head.args) head.push_back(term(x));
    p.rule("rule" + std::to_string(idx++), refs[static_cast<std::size_t>(rule.head.rel)].make(head), body);
  }
  return p;
}

// Enumerates variable assignments by scanning whole relations.
void naive_join(const RRule& rule, std::size_t i, std::array<Value, 4>& env, std::array<bool, 4>& set,
                std::map<int, std::set<Tuple>>& state, std::set<Tuple>& out) {
  if (i == rule.body.size()) {
    if (rule.has_lt && !(env[static_cast<std::size_t>(rule.lt_a)] < env[static_cast<std::size_t>(rule.lt_b)])) return;
    Tuple t;
    for (int a : rule.head.args) t.push_back(a >= 0 ? env[static_cast<std::size_t>(a)] : -(a + 1));
    out.insert(t);
    return;
  }
  const RAtom& a = rule.body[i];
  for (const Tuple& t : std::set<Tuple>(state[a.rel])) {
    auto saved_env = env;
    auto saved_set = set;
    bool ok = true;
    for (std::size_t c = 0; c < t.size() && ok; ++c) {
      int x = a.args[c];
      if (x < 0) {
        ok = t[c] == -(x + 1);
      } else if (set[static_cast<std::size_t>(x)]) {
        ok = env[static_cast<std::size_t>(x)] == t[c];
      } else {
        env[static_cast<std::size_t>(x)] = t[c];
        set[static_cast<std::size_t>(x)] = true;
      }
    }
    if (ok) naive_join(rule, i + 1, env, set, state, out);
    env = saved_env;
    set = saved_set;
  }
}

std::map<int, std::set<Tuple>> naive_eval(const RProgram& rp, const Program& program) {
  std::map<int, std::set<Tuple>> state = rp.facts;
  for (const Stratum& s : stratify(program)) {
    std::set<int> heads;
    for (std::size_t r : s.relations) heads.insert(std::stoi(program.relations()[r].name.substr(1)));
    bool changed = true;
    while (changed) {
      changed = false;
      for (const RRule& rule : rp.rules) {
        if (!heads.count(rule.head.rel)) continue;
        std::set<Tuple> derived;
        std::array<Value, 4> env{};
        // Positive atoms first, then filter by negations.
        RRule positive = rule;
        positive.body.clear();
        std::vector<RAtom> negs;
        for (const RAtom& a : rule.body) (a.negated ? negs : positive.body).push_back(a);
        // Project every variable so negations can be tested afterwards.
        RRule probe = positive;
        probe.head.args = {0, 1, 2, 3};
        std::set<Tuple> envs;
        std::array<bool, 4> set2{};
        naive_join(probe, 0, env, set2, state, envs);
        for (const Tuple& e : envs) {
          bool ok = true;
          for (const RAtom& n : negs) {
            Tuple t;
            for (int x : n.args) t.push_back(x >= 0 ? e[static_cast<std::size_t>(x)] : -(x + 1));
            if (state[n.rel].count(t)) ok = false;
          }
          if (!ok) continue;
          Tuple h;
          for (int a : rule.head.args) h.push_back(a >= 0 ? e[static_cast<std::size_t>(a)] : -(a + 1));
          derived.insert(h);
        }
        for (const Tuple& t : derived)
          if (state[rule.head.rel].insert(t).second) changed = true;
      }
    }
  }
  return state;
}

}  // namespace

OracleSummary check_random_programs(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  OracleSummary s;
  int attempts = 0;
  while (s.checked < count && attempts < 50 * count) {
    ++attempts;
    RProgram rp = generate(rng);
    if (rp.rules.empty()) continue;
    Program program = to_program(rp);
    try {
      stratify(program);
    } catch (const Error&) {
      continue;
    }
    auto expected = naive_eval(rp, program);
    bool mismatch = false;
    for (int jobs : {1, 4}) {
      Database db;
      for (int r = 0; r < 2; ++r) {
        auto& rel = db.add(rel_name(r), std::vector<ColumnKind>(static_cast<std::size_t>(rp.arity[static_cast<std::size_t>(r)]), N));
        for (const Tuple& t : rp.facts[r]) rel.insert(t);
      }
      evaluate(program, db, {.jobs = jobs});
      for (int r = 2; r < 4 && !mismatch; ++r) {
        auto rows = db.at(rel_name(r)).sorted_rows();
        if (std::set<Tuple>(rows.begin(), rows.end()) != expected[r]) {
          mismatch = true;
          if (s.first_mismatch.empty()) {
            std::ostringstream m;
            m << "program " << s.checked << " relation r" << r << " jobs " << jobs;
            s.first_mismatch = m.str();
          }
        }
      }
    }
    s.mismatches += mismatch;
    ++s.checked;
  }
  return s;
}

}  // namespace rdis::support
