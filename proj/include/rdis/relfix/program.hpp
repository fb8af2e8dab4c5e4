#pragma once

#include <concepts>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rdis/relfix/relation.hpp"
#include "rdis/relfix/value.hpp"

namespace rdis::relfix {

enum class ExprOp : std::uint8_t {
  var, constant, wildcard,
  add, sub, mul, div, mod, band, bor, bxor, shl, shr, min, max, neg,
};

struct ExprNode {
  ExprOp op = ExprOp::constant;
  Value value = 0;
  std::string name;
  std::shared_ptr<const ExprNode> lhs;
  std::shared_ptr<const ExprNode> rhs;
};

class Expr {
 public:
  Expr() : Expr(Value{0}) {}
  template <std::integral T>
  Expr(T v) : node_(make_const(static_cast<Value>(v))) {}  // NOLINT
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}

  const ExprNode& node() const { return *node_; }
  const std::shared_ptr<const ExprNode>& ptr() const { return node_; }
  bool is_var() const { return node_->op == ExprOp::var; }
  bool is_wildcard() const { return node_->op == ExprOp::wildcard; }
  bool is_const() const { return node_->op == ExprOp::constant; }

 private:
  static std::shared_ptr<const ExprNode> make_const(Value v);
  std::shared_ptr<const ExprNode> node_;
};

class Var : public Expr {
 public:
  explicit Var(std::string name);
  const std::string& name() const { return node().name; }
};

// Matches any value in a body atom.
extern const Expr _;

Expr text(std::string_view s);
Expr min_of(const Expr& a, const Expr& b);
Expr max_of(const Expr& a, const Expr& b);
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator%(const Expr& a, const Expr& b);
Expr operator&(const Expr& a, const Expr& b);
Expr operator|(const Expr& a, const Expr& b);
Expr operator^(const Expr& a, const Expr& b);
Expr operator<<(const Expr& a, const Expr& b);
Expr operator>>(const Expr& a, const Expr& b);

struct Atom {
  std::string relation;
  std::vector<Expr> args;
};

enum class CmpOp : std::uint8_t { eq, ne, lt, le, gt, ge };
enum class AggKind : std::uint8_t { sum, count, min, max };

struct AggregateSpec;

struct Literal {
  enum class Kind : std::uint8_t { atom, negation, comparison, aggregate };
  Kind kind = Kind::atom;
  Atom atom;
  CmpOp cmp = CmpOp::eq;
  Expr lhs;
  Expr rhs;
  std::shared_ptr<const AggregateSpec> aggregate;

  Literal(Atom a) : atom(std::move(a)) {}  // NOLINT
  Literal() = default;
};

struct AggregateSpec {
  std::string result;
  AggKind kind = AggKind::count;
  Expr target;
  std::vector<Literal> body;
};

Literal operator!(Atom a);
Literal operator==(const Expr& a, const Expr& b);
Literal operator!=(const Expr& a, const Expr& b);
Literal operator<(const Expr& a, const Expr& b);
Literal operator<=(const Expr& a, const Expr& b);
Literal operator>(const Expr& a, const Expr& b);
Literal operator>=(const Expr& a, const Expr& b);

// Aggregate literal binding `result`. Variables of the body that also occur
// outside the aggregate are group-by keys and must be bound outside it.
Literal sum(const Var& result, const Expr& target, std::vector<Literal> body);
Literal count(const Var& result, std::vector<Literal> body);
Literal minimum(const Var& result, const Expr& target, std::vector<Literal> body);
Literal maximum(const Var& result, const Expr& target, std::vector<Literal> body);

struct Rule {
  std::string label;
  Atom head;
  std::vector<Literal> body;
};

struct RelationDecl {
  std::string name;
  std::vector<ColumnKind> schema;
  bool input = false;
  bool output = true;
};

class Program;

class RelationRef {
 public:
  RelationRef() = default;
  RelationRef(std::string name, std::size_t arity) : name_(std::move(name)), arity_(arity) {}

  template <typename... Args>
  Atom operator()(Args&&... args) const {
    return make({Expr(std::forward<Args>(args))...});
  }
  Atom make(std::vector<Expr> args) const;
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  std::size_t arity_ = 0;
};

class Program {
 public:
  RelationRef relation(std::string name, std::vector<ColumnKind> schema);
  RelationRef input(std::string name, std::vector<ColumnKind> schema);
  // Hidden relations are evaluated but not part of dumps.
  void hide(const RelationRef& rel);

  void rule(std::string label, Atom head, std::vector<Literal> body);
  void fact(const RelationRef& rel, Tuple values);

  const std::vector<RelationDecl>& relations() const { return relations_; }
  const std::vector<Rule>& rules() const { return rules_; }
  const std::vector<std::pair<std::string, Tuple>>& facts() const { return facts_; }
  const RelationDecl* find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

 private:
  RelationRef declare(std::string name, std::vector<ColumnKind> schema, bool input);

  std::vector<RelationDecl> relations_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::vector<Rule> rules_;
  std::vector<std::pair<std::string, Tuple>> facts_;
};

}  // namespace rdis::relfix
