#include "rdis/relfix/program.hpp"

#include "rdis/relfix/error.hpp"

namespace rdis::relfix {
namespace {

Expr binary(ExprOp op, const Expr& a, const Expr& b) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->lhs = a.ptr();
  n->rhs = b.ptr();
  return Expr(std::move(n));
}

Literal compare(CmpOp op, const Expr& a, const Expr& b) {
  Literal l;
  l.kind = Literal::Kind::comparison;
  l.cmp = op;
  l.lhs = a;
  l.rhs = b;
  return l;
}

Literal aggregate(AggKind kind, const Var& result, const Expr& target, std::vector<Literal> body) {
  auto spec = std::make_shared<AggregateSpec>();
  spec->result = result.name();
  spec->kind = kind;
  spec->target = target;
  spec->body = std::move(body);
  Literal l;
  l.kind = Literal::Kind::aggregate;
  l.aggregate = std::move(spec);
  return l;
}

}  // namespace

std::shared_ptr<const ExprNode> Expr::make_const(Value v) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::constant;
  n->value = v;
  return n;
}

Var::Var(std::string name)
    : Expr([&] {
        auto n = std::make_shared<ExprNode>();
        n->op = ExprOp::var;
        n->name = std::move(name);
        return std::shared_ptr<const ExprNode>(std::move(n));
      }()) {}

const Expr _{[] {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::wildcard;
  return std::shared_ptr<const ExprNode>(std::move(n));
}()};

Expr text(std::string_view s) { return Expr(intern(s)); }
Expr min_of(const Expr& a, const Expr& b) { return binary(ExprOp::min, a, b); }
Expr max_of(const Expr& a, const Expr& b) { return binary(ExprOp::max, a, b); }
Expr operator+(const Expr& a, const Expr& b) { return binary(ExprOp::add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return binary(ExprOp::sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return binary(ExprOp::mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return binary(ExprOp::div, a, b); }
Expr operator%(const Expr& a, const Expr& b) { return binary(ExprOp::mod, a, b); }
Expr operator&(const Expr& a, const Expr& b) { return binary(ExprOp::band, a, b); }
Expr operator|(const Expr& a, const Expr& b) { return binary(ExprOp::bor, a, b); }
Expr operator^(const Expr& a, const Expr& b) { return binary(ExprOp::bxor, a, b); }
Expr operator<<(const Expr& a, const Expr& b) { return binary(ExprOp::shl, a, b); }
Expr operator>>(const Expr& a, const Expr& b) { return binary(ExprOp::shr, a, b); }
Expr operator-(const Expr& a) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::neg;
  n->lhs = a.ptr();
  return Expr(std::move(n));
}

Literal operator!(Atom a) {
  Literal l(std::move(a));
  l.kind = Literal::Kind::negation;
  return l;
}
Literal operator==(const Expr& a, const Expr& b) { return compare(CmpOp::eq, a, b); }
Literal operator!=(const Expr& a, const Expr& b) { return compare(CmpOp::ne, a, b); }
Literal operator<(const Expr& a, const Expr& b) { return compare(CmpOp::lt, a, b); }
Literal operator<=(const Expr& a, const Expr& b) { return compare(CmpOp::le, a, b); }
Literal operator>(const Expr& a, const Expr& b) { return compare(CmpOp::gt, a, b); }
Literal operator>=(const Expr& a, const Expr& b) { return compare(CmpOp::ge, a, b); }

Literal sum(const Var& result, const Expr& target, std::vector<Literal> body) {
  return aggregate(AggKind::sum, result, target, std::move(body));
}
Literal count(const Var& result, std::vector<Literal> body) {
  return aggregate(AggKind::count, result, Expr(1), std::move(body));
}
Literal minimum(const Var& result, const Expr& target, std::vector<Literal> body) {
  return aggregate(AggKind::min, result, target, std::move(body));
}
Literal maximum(const Var& result, const Expr& target, std::vector<Literal> body) {
  return aggregate(AggKind::max, result, target, std::move(body));
}

Atom RelationRef::make(std::vector<Expr> args) const {
  if (args.size() != arity_)
    throw Error(ErrorKind::schema_mismatch, name_ + " expects " + std::to_string(arity_) +
                                                " arguments, got " + std::to_string(args.size()));
  return Atom{name_, std::move(args)};
}

RelationRef Program::declare(std::string name, std::vector<ColumnKind> schema, bool input) {
  if (schema.empty() || schema.size() > 16)
    throw Error(ErrorKind::schema_mismatch, "relation arity must be 1..16: " + name);
  if (by_name_.count(name)) throw Error(ErrorKind::schema_mismatch, "relation declared twice: " + name);
  RelationRef ref(name, schema.size());
  by_name_.emplace(name, relations_.size());
  relations_.push_back(RelationDecl{std::move(name), std::move(schema), input, true});
  return ref;
}

RelationRef Program::relation(std::string name, std::vector<ColumnKind> schema) {
  return declare(std::move(name), std::move(schema), false);
}

RelationRef Program::input(std::string name, std::vector<ColumnKind> schema) {
  return declare(std::move(name), std::move(schema), true);
}

void Program::hide(const RelationRef& rel) { relations_[index_of(rel.name())].output = false; }

void Program::rule(std::string label, Atom head, std::vector<Literal> body) {
  index_of(head.relation);
  for (const Expr& e : head.args)
    if (e.is_wildcard()) throw Error(ErrorKind::unbound_variable, label + ": wildcard in head");
  rules_.push_back(Rule{std::move(label), std::move(head), std::move(body)});
}

void Program::fact(const RelationRef& rel, Tuple values) {
  const RelationDecl& d = relations_[index_of(rel.name())];
  if (values.size() != d.schema.size())
    throw Error(ErrorKind::schema_mismatch, "fact arity mismatch for " + d.name);
  facts_.emplace_back(d.name, std::move(values));
}

const RelationDecl* Program::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  return it == by_name_.end() ? nullptr : &relations_[it->second];
}

std::size_t Program::index_of(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) throw Error(ErrorKind::unknown_relation, std::string(name));
  return it->second;
}

}  // namespace rdis::relfix
