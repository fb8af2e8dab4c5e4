#include <omp.h>

#include <algorithm>
#include <exception>
#include <limits>

#include "plan.hpp"
#include "rdis/relfix/error.hpp"

namespace rdis::relfix::detail {
namespace {

class Runner {
 public:
  Runner(const Plan& plan, const Relation& head, Output& out)
      : plan_(plan), head_(head), out_(out), slots_(plan.slot_names.size(), 0) {}

  void run_all() {
    HeadSink sink{this};
    exec(plan_.steps, 0, sink);
  }

  // Binds the first step (a scan) to `row_id` and runs the rest.
  void run_from_row(std::uint32_t row_id) {
    const Step& s = plan_.steps.front();
    HeadSink sink{this};
    if (match(s, s.rel->row(row_id), key_of(s))) exec(plan_.steps, 1, sink);
  }

  std::vector<std::uint32_t> first_candidates() {
    const Step& s = plan_.steps.front();
    std::vector<std::uint32_t> out;
    if (s.mask) {
      std::vector<Value> key = key_of(s);
      if (const auto* rows = s.rel->lookup(s.mask, key))
        for (std::uint32_t id : *rows)
          if (id >= s.lo && id < s.hi) out.push_back(id);
    } else {
      for (std::uint32_t id = s.lo; id < s.hi; ++id) out.push_back(id);
    }
    return out;
  }

 private:
  struct HeadSink {
    Runner* self;
    void operator()() { self->emit(); }
  };

  struct AggSink {
    Runner* self;
    const Step* step;
    bool any = false;
    Value acc = 0;
    void operator()() {
      Value v = self->eval(step->target);
      switch (step->agg) {
        case AggKind::count: acc = self->checked_add(acc, 1); break;
        case AggKind::sum: acc = self->checked_add(acc, v); break;
        case AggKind::min: acc = any ? std::min(acc, v) : v; break;
        case AggKind::max: acc = any ? std::max(acc, v) : v; break;
      }
      any = true;
    }
  };

  [[noreturn]] void fail(const std::string& what) {
    std::string tuple;
    for (std::size_t i = 0; i < slots_.size(); ++i)
      tuple += (i ? ", " : "") + plan_.slot_names[i] + "=" + std::to_string(slots_[i]);
    throw Error(ErrorKind::arithmetic_overflow, plan_.rule->label + ": " + what + " at (" + tuple + ")");
  }

  Value checked_add(Value a, Value b) {
    Value r;
    if (__builtin_add_overflow(a, b, &r)) fail("overflow in addition");
    return r;
  }

  Value eval(int index) {
    const CExpr& e = plan_.pool.nodes[static_cast<std::size_t>(index)];
    switch (e.op) {
      case ExprOp::constant: return e.value;
      case ExprOp::var: return slots_[static_cast<std::size_t>(e.slot)];
      case ExprOp::wildcard: return 0;
      case ExprOp::neg: {
        Value a = eval(e.lhs);
        if (a == std::numeric_limits<Value>::min()) fail("overflow in negation");
        return -a;
      }
      default: break;
    }
    Value a = eval(e.lhs);
    Value b = eval(e.rhs);
    Value r = 0;
    switch (e.op) {
      case ExprOp::add:
        if (__builtin_add_overflow(a, b, &r)) fail("overflow in addition");
        return r;
      case ExprOp::sub:
        if (__builtin_sub_overflow(a, b, &r)) fail("overflow in subtraction");
        return r;
      case ExprOp::mul:
        if (__builtin_mul_overflow(a, b, &r)) fail("overflow in multiplication");
        return r;
      case ExprOp::div:
      case ExprOp::mod:
        if (b == 0) fail("division by zero");
        if (a == std::numeric_limits<Value>::min() && b == -1) fail("overflow in division");
        return e.op == ExprOp::div ? a / b : a % b;
      case ExprOp::band: return a & b;
      case ExprOp::bor: return a | b;
      case ExprOp::bxor: return a ^ b;
      case ExprOp::shl:
        if (b < 0 || b > 63) fail("shift out of range");
        return static_cast<Value>(static_cast<std::uint64_t>(a) << b);
      case ExprOp::shr:
        if (b < 0 || b > 63) fail("shift out of range");
        return static_cast<Value>(static_cast<std::uint64_t>(a) >> b);
      case ExprOp::min: return std::min(a, b);
      case ExprOp::max: return std::max(a, b);
      default: return 0;
    }
  }

  bool compare(CmpOp op, Value a, Value b) const {
    switch (op) {
      case CmpOp::eq: return a == b;
      case CmpOp::ne: return a != b;
      case CmpOp::lt: return a < b;
      case CmpOp::le: return a <= b;
      case CmpOp::gt: return a > b;
      case CmpOp::ge: return a >= b;
    }
    return false;
  }

  std::vector<Value> key_of(const Step& s) {
    std::vector<Value> key;
    for (const Arg& a : s.args)
      if (a.mode == ArgMode::check) key.push_back(eval(a.expr));
    return key;
  }

  bool match(const Step& s, std::span<const Value> row, const std::vector<Value>& key) {
    std::size_t k = 0;
    for (std::size_t c = 0; c < s.args.size(); ++c) {
      const Arg& a = s.args[c];
      if (a.mode == ArgMode::check) {
        if (row[c] != key[k++]) return false;
      } else if (a.mode == ArgMode::bind) {
        slots_[static_cast<std::size_t>(a.slot)] = row[c];
      } else if (a.mode == ArgMode::same) {
        if (row[c] != slots_[static_cast<std::size_t>(a.slot)]) return false;
      }
    }
    return true;
  }

  template <typename Sink>
  void exec(const std::vector<Step>& steps, std::size_t i, Sink& sink) {
    if (i == steps.size()) {
      sink();
      return;
    }
    const Step& s = steps[i];
    switch (s.kind) {
      case Step::Kind::scan: {
        std::vector<Value> key = key_of(s);
        if (s.mask) {
          const auto* rows = s.rel->lookup(s.mask, key);
          if (!rows) return;
          for (std::uint32_t id : *rows) {
            if (id < s.lo || id >= s.hi) continue;
            if (match(s, s.rel->row(id), key)) exec(steps, i + 1, sink);
          }
        } else {
          for (std::uint32_t id = s.lo; id < s.hi; ++id)
            if (match(s, s.rel->row(id), key)) exec(steps, i + 1, sink);
        }
        return;
      }
      case Step::Kind::negation: {
        std::vector<Value> key = key_of(s);
        if (key.size() == s.args.size()) {
          if (!s.rel->contains(key)) exec(steps, i + 1, sink);
          return;
        }
        if (const auto* rows = s.rel->lookup(s.mask, key)) {
          for (std::uint32_t id : *rows) {
            auto row = s.rel->row(id);
            std::size_t k = 0;
            bool same = true;
            for (std::size_t c = 0; c < s.args.size() && same; ++c)
              if (s.args[c].mode == ArgMode::check) same = row[c] == key[k++];
            if (same) return;
          }
        } else if (s.mask == 0 && !s.rel->empty()) {
          return;
        }
        exec(steps, i + 1, sink);
        return;
      }
      case Step::Kind::filter:
        if (compare(s.cmp, eval(s.lhs), eval(s.rhs))) exec(steps, i + 1, sink);
        return;
      case Step::Kind::assign:
        slots_[static_cast<std::size_t>(s.slot)] = eval(s.rhs);
        exec(steps, i + 1, sink);
        return;
      case Step::Kind::aggregate: {
        AggSink agg{this, &s};
        exec(s.sub, 0, agg);
        if (!agg.any && (s.agg == AggKind::min || s.agg == AggKind::max)) return;
        slots_[static_cast<std::size_t>(s.slot)] = agg.acc;
        exec(steps, i + 1, sink);
        return;
      }
    }
  }

  void emit() {
    Value tuple[32];
    for (std::size_t c = 0; c < plan_.head.size(); ++c) tuple[c] = eval(plan_.head[c]);
    std::span<const Value> t(tuple, plan_.head.size());
    if (head_.contains(t)) return;
    out_.values.insert(out_.values.end(), t.begin(), t.end());
  }

  const Plan& plan_;
  const Relation& head_;
  Output& out_;
  std::vector<Value> slots_;
};

}  // namespace

void run_plan_serial(const Plan& plan, const Relation& head_rel, Output& out) {
  Runner(plan, head_rel, out).run_all();
}

void run_plan_parallel(const Plan& plan, const Relation& head_rel, Output& out, int jobs) {
  if (jobs <= 1 || plan.steps.empty() || plan.steps.front().kind != Step::Kind::scan) {
    run_plan_serial(plan, head_rel, out);
    return;
  }
  Output probe{out.arity, {}};
  std::vector<std::uint32_t> rows = Runner(plan, head_rel, probe).first_candidates();
  if (rows.size() < 64) {
    run_plan_serial(plan, head_rel, out);
    return;
  }
  const std::int64_t n = static_cast<std::int64_t>(rows.size());
  std::vector<Output> buffers(static_cast<std::size_t>(jobs), Output{out.arity, {}});
  std::exception_ptr error;
  std::int64_t error_row = n;
#pragma omp parallel num_threads(jobs)
  {
    const int t = omp_get_thread_num();
    Runner runner(plan, head_rel, buffers[static_cast<std::size_t>(t)]);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        runner.run_from_row(rows[static_cast<std::size_t>(i)]);
      } catch (...) {
#pragma omp critical(relfix_error)
        if (i < error_row) {
          error_row = i;
          error = std::current_exception();
        }
      }
    }
  }
  if (error) std::rethrow_exception(error);
  for (const Output& b : buffers) out.values.insert(out.values.end(), b.values.begin(), b.values.end());
}

}  // namespace rdis::relfix::detail
