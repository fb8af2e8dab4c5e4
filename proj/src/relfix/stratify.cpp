#include "rdis/relfix/stratify.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>
#include <unordered_set>

#include "rdis/relfix/error.hpp"

namespace rdis::relfix {
namespace {

enum class EdgeKind { positive, negative, aggregate };

struct Edge {
  std::size_t to;
  EdgeKind kind;
};

void collect_vars(const Expr& e, std::set<std::string>& out) {
  const ExprNode& n = e.node();
  if (n.op == ExprOp::var) out.insert(n.name);
  if (n.lhs) collect_vars(Expr(n.lhs), out);
  if (n.rhs) collect_vars(Expr(n.rhs), out);
}

bool all_bound(const Expr& e, const std::set<std::string>& bound) {
  std::set<std::string> vars;
  collect_vars(e, vars);
  return std::includes(bound.begin(), bound.end(), vars.begin(), vars.end());
}

// Grows `bound` with everything the literals can bind, given `bound`.
void bind_literals(const std::vector<Literal>& body, std::set<std::string>& bound) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Literal& l : body) {
      if (l.kind == Literal::Kind::atom) {
        for (const Expr& a : l.atom.args)
          if (a.is_var() && bound.insert(a.node().name).second) changed = true;
      } else if (l.kind == Literal::Kind::comparison && l.cmp == CmpOp::eq) {
        if (l.lhs.is_var() && !bound.count(l.lhs.node().name) && all_bound(l.rhs, bound)) {
          bound.insert(l.lhs.node().name);
          changed = true;
        } else if (l.rhs.is_var() && !bound.count(l.rhs.node().name) && all_bound(l.lhs, bound)) {
          bound.insert(l.rhs.node().name);
          changed = true;
        }
      } else if (l.kind == Literal::Kind::aggregate) {
        if (bound.insert(l.aggregate->result).second) changed = true;
      }
    }
  }
}

void require_bound(const Rule& rule, const std::set<std::string>& bound,
                   const std::set<std::string>& used) {
  for (const std::string& v : used)
    if (!bound.count(v))
      throw Error(ErrorKind::unbound_variable, rule.label + ": variable " + v + " is not grounded");
}

void check_body(const Rule& rule, const std::vector<Literal>& body, std::set<std::string> bound) {
  bind_literals(body, bound);
  for (const Literal& l : body) {
    std::set<std::string> used;
    switch (l.kind) {
      case Literal::Kind::atom:
      case Literal::Kind::negation:
        for (const Expr& a : l.atom.args) collect_vars(a, used);
        break;
      case Literal::Kind::comparison:
        collect_vars(l.lhs, used);
        collect_vars(l.rhs, used);
        break;
      case Literal::Kind::aggregate: {
        std::set<std::string> inner = bound;
        inner.erase(l.aggregate->result);
        check_body(rule, l.aggregate->body, inner);
        std::set<std::string> inner_bound = inner;
        bind_literals(l.aggregate->body, inner_bound);
        std::set<std::string> target;
        collect_vars(l.aggregate->target, target);
        require_bound(rule, inner_bound, target);
        break;
      }
    }
    require_bound(rule, bound, used);
  }
}

void add_edges(std::size_t head, const std::vector<Literal>& body, const Program& p,
               std::vector<std::vector<Edge>>& graph, bool in_aggregate) {
  for (const Literal& l : body) {
    if (l.kind == Literal::Kind::atom) {
      graph[head].push_back({p.index_of(l.atom.relation),
                             in_aggregate ? EdgeKind::aggregate : EdgeKind::positive});
    } else if (l.kind == Literal::Kind::negation) {
      graph[head].push_back({p.index_of(l.atom.relation), EdgeKind::negative});
    } else if (l.kind == Literal::Kind::aggregate) {
      add_edges(head, l.aggregate->body, p, graph, true);
    }
  }
}

}  // namespace

void check_grounded(const Rule& rule) {
  std::set<std::string> bound;
  check_body(rule, rule.body, bound);
  bind_literals(rule.body, bound);
  std::set<std::string> head_vars;
  for (const Expr& a : rule.head.args) collect_vars(a, head_vars);
  require_bound(rule, bound, head_vars);
}

std::vector<Stratum> stratify(const Program& program) {
  const std::size_t n = program.relations().size();
  std::vector<std::vector<Edge>> graph(n);
  for (const Rule& r : program.rules()) add_edges(program.index_of(r.head.relation), r.body, program, graph, false);

  // Tarjan's SCC.
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  int counter = 0, ncomp = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (const Edge& e : graph[v]) {
      if (index[e.to] < 0) {
        visit(e.to);
        low[v] = std::min(low[v], low[e.to]);
      } else if (on_stack[e.to]) {
        low[v] = std::min(low[v], index[e.to]);
      }
    }
    if (low[v] == index[v]) {
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = ncomp;
      } while (w != v);
      ++ncomp;
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] < 0) visit(v);

  std::vector<std::vector<std::size_t>> members(ncomp);
  for (std::size_t v = 0; v < n; ++v) members[comp[v]].push_back(v);
  std::vector<bool> recursive(ncomp, false);
  for (std::size_t v = 0; v < n; ++v) {
    for (const Edge& e : graph[v]) {
      if (comp[e.to] != comp[v]) continue;
      recursive[comp[v]] = true;
      if (e.kind == EdgeKind::positive) continue;
      std::string names;
      for (std::size_t m : members[comp[v]]) names += (names.empty() ? "" : ", ") + program.relations()[m].name;
      throw Error(e.kind == EdgeKind::negative ? ErrorKind::negation_cycle
                                               : ErrorKind::aggregate_stratum_violation,
                  "{" + names + "}");
    }
  }

  for (const Rule& r : program.rules()) check_grounded(r);

  // Kahn over the condensation; ties go to the component declared first.
  std::vector<std::set<int>> deps(ncomp);
  std::vector<std::vector<int>> users(ncomp);
  for (std::size_t v = 0; v < n; ++v)
    for (const Edge& e : graph[v])
      if (comp[e.to] != comp[v] && deps[comp[v]].insert(comp[e.to]).second) users[comp[e.to]].push_back(comp[v]);
  std::vector<std::size_t> pending(ncomp);
  using Item = std::pair<std::size_t, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
  for (int c = 0; c < ncomp; ++c) {
    pending[c] = deps[c].size();
    if (pending[c] == 0) ready.push({members[c].front(), c});
  }
  std::vector<int> order;
  while (!ready.empty()) {
    int c = ready.top().second;
    ready.pop();
    order.push_back(c);
    for (int u : users[c])
      if (--pending[u] == 0) ready.push({members[u].front(), u});
  }

  std::vector<int> position(ncomp);
  for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = static_cast<int>(i);
  std::vector<Stratum> strata(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    strata[i].relations = members[order[i]];
    strata[i].recursive = recursive[order[i]];
  }
  for (std::size_t r = 0; r < program.rules().size(); ++r)
    strata[position[comp[program.index_of(program.rules()[r].head.relation)]]].rules.push_back(r);
  return strata;
}

}  // namespace rdis::relfix
