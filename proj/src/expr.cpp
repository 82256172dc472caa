#include "rmon/expr.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <variant>

#include "rmon/errors.hpp"

namespace rmon {

ExprPtr make_number(double x, SourcePos pos) {
  return std::make_shared<const Expr>(Expr{ExprKind::Number, x, {}, {}, pos});
}

ExprPtr make_ref(ExprKind kind, std::string name, SourcePos pos) {
  return std::make_shared<const Expr>(Expr{kind, 0.0, std::move(name), {}, pos});
}

ExprPtr make_op(ExprKind kind, std::vector<ExprPtr> args, SourcePos pos) {
  return std::make_shared<const Expr>(Expr{kind, 0.0, {}, std::move(args), pos});
}

bool same_expr(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.number != b.number || a.name != b.name ||
      a.args.size() != b.args.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!same_expr(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

bool same_statement(const Statement& a, const Statement& b) {
  return a.target == b.target && a.name == b.name && same_expr(*a.expr, *b.expr);
}

bool operator==(const RelationExpr& a, const RelationExpr& b) {
  if (a.relation != b.relation || a.output != b.output || a.inputs != b.inputs ||
      a.statements.size() != b.statements.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.statements.size(); ++i) {
    if (!same_statement(a.statements[i], b.statements[i])) return false;
  }
  return true;
}

namespace {

std::string format_number(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf, end);
}

const char* binary_symbol(ExprKind k) {
  switch (k) {
    case ExprKind::Add: return " + ";
    case ExprKind::Sub: return " - ";
    case ExprKind::Mul: return " * ";
    case ExprKind::Div: return " / ";
    default: return nullptr;
  }
}

const char* call_name(ExprKind k) {
  switch (k) {
    case ExprKind::Min2:
    case ExprKind::MinReduce: return "min";
    case ExprKind::Max2:
    case ExprKind::MaxReduce: return "max";
    case ExprKind::SumReduce: return "sum";
    case ExprKind::Len: return "len";
    default: return nullptr;
  }
}

}  // namespace

std::string to_source(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Number:
      return format_number(e.number);
    case ExprKind::InputValue:
      return e.name + ".v";
    case ExprKind::InputTime:
      return e.name + ".t";
    case ExprKind::Name:
      return e.name;
    case ExprKind::Neg:
      return "(-" + to_source(*e.args[0]) + ")";
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div:
      return "(" + to_source(*e.args[0]) + binary_symbol(e.kind) + to_source(*e.args[1]) + ")";
    case ExprKind::Min2:
    case ExprKind::Max2:
      return std::string(call_name(e.kind)) + "(" + to_source(*e.args[0]) + ", " +
             to_source(*e.args[1]) + ")";
    case ExprKind::MinReduce:
    case ExprKind::MaxReduce:
    case ExprKind::SumReduce:
    case ExprKind::Len:
      return std::string(call_name(e.kind)) + "(" + to_source(*e.args[0]) + ")";
    case ExprKind::Slice:
      return to_source(*e.args[0]) + "[" + to_source(*e.args[1]) + ":" + to_source(*e.args[2]) +
             "]";
    case ExprKind::Index:
      return to_source(*e.args[0]) + "[" + to_source(*e.args[1]) + "]";
  }
  return {};
}

namespace {

using Value = std::variant<Interval, IntervalVector>;

std::string at(const SourcePos& p) {
  if (p.line == 0) return {};
  return " at " + std::to_string(p.line) + ":" + std::to_string(p.column);
}

template <typename Op>
Value elementwise(const Value& a, const Value& b, Op op) {
  const auto* sa = std::get_if<Interval>(&a);
  const auto* sb = std::get_if<Interval>(&b);
  if (sa && sb) return op(*sa, *sb);
  if (sa) {
    const auto& vb = std::get<IntervalVector>(b);
    std::vector<Interval> out;
    out.reserve(vb.size());
    for (const auto& d : vb) out.push_back(op(*sa, d));
    return IntervalVector(std::move(out));
  }
  const auto& va = std::get<IntervalVector>(a);
  if (sb) {
    std::vector<Interval> out;
    out.reserve(va.size());
    for (const auto& d : va) out.push_back(op(d, *sb));
    return IntervalVector(std::move(out));
  }
  const auto& vb = std::get<IntervalVector>(b);
  if (va.size() != vb.size()) {
    throw DimensionError("vector length mismatch: " + std::to_string(va.size()) + " vs " +
                         std::to_string(vb.size()));
  }
  std::vector<Interval> out;
  out.reserve(va.size());
  for (std::size_t i = 0; i < va.size(); ++i) out.push_back(op(va[i], vb[i]));
  return IntervalVector(std::move(out));
}

class Evaluator {
 public:
  Evaluator(const RelationExpr& rel, const std::map<VariableId, Itom>& inputs)
      : rel_(rel), inputs_(inputs) {}

  IntervalVector run() {
    std::optional<IntervalVector> result;
    for (const auto& st : rel_.statements) {
      switch (st.target) {
        case Statement::Target::Let:
          lets_.insert_or_assign(st.name, eval(*st.expr));
          break;
        case Statement::Target::OutputValue: {
          Value v = eval(*st.expr);
          if (auto* s = std::get_if<Interval>(&v)) {
            result.emplace(IntervalVector{*s});
          } else {
            result.emplace(std::get<IntervalVector>(std::move(v)));
          }
          break;
        }
        case Statement::Target::OutputTime:
          break;
      }
    }
    if (!result) {
      throw EvalError("relation " + rel_.relation.str() + " never assigns " + rel_.output.str() +
                      ".v");
    }
    return *std::move(result);
  }

 private:
  const Itom& input(const Expr& e) const {
    auto it = inputs_.find(VariableId(e.name));
    if (it == inputs_.end()) {
      throw EvalError("missing input " + e.name + " for relation " + rel_.relation.str() +
                      at(e.pos));
    }
    return it->second;
  }

  static const IntervalVector& as_vector(const Value& v, const Expr& e, const char* what) {
    const auto* vec = std::get_if<IntervalVector>(&v);
    if (!vec) throw EvalError(std::string(what) + " requires a vector operand" + at(e.pos));
    return *vec;
  }

  static std::size_t as_index(const Value& v, const Expr& e) {
    const auto* s = std::get_if<Interval>(&v);
    if (!s || !s->is_point()) {
      throw EvalError("index must be a scalar without uncertainty" + at(e.pos));
    }
    const double x = s->lo();
    if (x < 0.0 || std::floor(x) != x) {
      throw EvalError("index " + format_number(x) + " is not a non-negative integer" + at(e.pos));
    }
    return static_cast<std::size_t>(x);
  }

  Value eval(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Number:
        return Interval::point(e.number);
      case ExprKind::InputValue:
        return input(e).value();
      case ExprKind::InputTime:
        return input(e).time();
      case ExprKind::Name: {
        auto it = lets_.find(e.name);
        if (it == lets_.end()) throw EvalError("unbound name " + e.name + at(e.pos));
        return it->second;
      }
      case ExprKind::Neg: {
        Value v = eval(*e.args[0]);
        if (auto* s = std::get_if<Interval>(&v)) return -*s;
        return scale(std::get<IntervalVector>(v), -1.0);
      }
      case ExprKind::Add:
        return elementwise(eval(*e.args[0]), eval(*e.args[1]),
                           [](const Interval& a, const Interval& b) { return a + b; });
      case ExprKind::Sub:
        return elementwise(eval(*e.args[0]), eval(*e.args[1]),
                           [](const Interval& a, const Interval& b) { return a - b; });
      case ExprKind::Mul:
        return elementwise(eval(*e.args[0]), eval(*e.args[1]),
                           [](const Interval& a, const Interval& b) { return a * b; });
      case ExprKind::Div:
        try {
          return elementwise(eval(*e.args[0]), eval(*e.args[1]),
                             [](const Interval& a, const Interval& b) { return a / b; });
        } catch (const EvalError& err) {
          throw EvalError(err.what() + at(e.pos));
        }
      case ExprKind::Min2:
        return elementwise(eval(*e.args[0]), eval(*e.args[1]),
                           [](const Interval& a, const Interval& b) { return min(a, b); });
      case ExprKind::Max2:
        return elementwise(eval(*e.args[0]), eval(*e.args[1]),
                           [](const Interval& a, const Interval& b) { return max(a, b); });
      case ExprKind::MinReduce: {
        Value v = eval(*e.args[0]);
        if (auto* s = std::get_if<Interval>(&v)) return *s;
        return min_reduce(std::get<IntervalVector>(v));
      }
      case ExprKind::MaxReduce: {
        Value v = eval(*e.args[0]);
        if (auto* s = std::get_if<Interval>(&v)) return *s;
        return max_reduce(std::get<IntervalVector>(v));
      }
      case ExprKind::SumReduce: {
        Value v = eval(*e.args[0]);
        if (auto* s = std::get_if<Interval>(&v)) return *s;
        return sum_reduce(std::get<IntervalVector>(v));
      }
      case ExprKind::Len: {
        Value v = eval(*e.args[0]);
        if (std::holds_alternative<Interval>(v)) return Interval::point(1.0);
        return Interval::point(static_cast<double>(std::get<IntervalVector>(v).size()));
      }
      case ExprKind::Slice: {
        Value base = eval(*e.args[0]);
        const auto& vec = as_vector(base, e, "slice");
        const std::size_t from = as_index(eval(*e.args[1]), *e.args[1]);
        const std::size_t to = as_index(eval(*e.args[2]), *e.args[2]);
        if (to > vec.size()) {
          throw EvalError("slice end " + std::to_string(to) + " exceeds length " +
                          std::to_string(vec.size()) + at(e.pos));
        }
        if (from >= to) {
          throw EvalError("empty slice [" + std::to_string(from) + ":" + std::to_string(to) + "]" +
                          at(e.pos));
        }
        return IntervalVector(std::vector<Interval>(vec.begin() + static_cast<std::ptrdiff_t>(from),
                                                    vec.begin() + static_cast<std::ptrdiff_t>(to)));
      }
      case ExprKind::Index: {
        Value base = eval(*e.args[0]);
        const auto& vec = as_vector(base, e, "index");
        const std::size_t i = as_index(eval(*e.args[1]), *e.args[1]);
        if (i >= vec.size()) {
          throw EvalError("index " + std::to_string(i) + " out of bounds for length " +
                          std::to_string(vec.size()) + at(e.pos));
        }
        return vec[i];
      }
    }
    throw EvalError("unknown expression kind");
  }

  const RelationExpr& rel_;
  const std::map<VariableId, Itom>& inputs_;
  std::map<std::string, Value> lets_;
};

}  // namespace

IntervalVector eval_relation(const RelationExpr& expr, const std::map<VariableId, Itom>& inputs) {
  for (const auto& in : expr.inputs) {
    if (!inputs.contains(in)) {
      throw EvalError("missing input " + in.str() + " for relation " + expr.relation.str());
    }
  }
  return Evaluator(expr, inputs).run();
}

}  // namespace rmon
