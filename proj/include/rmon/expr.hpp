#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rmon/ids.hpp"
#include "rmon/interval.hpp"
#include "rmon/itom.hpp"

namespace rmon {

struct SourcePos {
  std::size_t line = 0;
  std::size_t column = 0;
};

enum class ExprKind {
  Number,     // literal
  InputValue, // name.v
  InputTime,  // name.t
  Name,       // let-bound intermediate
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Min2,       // min(a, b), elementwise
  Max2,       // max(a, b), elementwise
  MinReduce,  // min(a)
  MaxReduce,  // max(a)
  SumReduce,  // sum(a)
  Len,        // len(a)
  Slice,      // a[b:c], half-open
  Index,      // a[b]
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression node. `number` is set for Number, `name` for the
/// reference kinds; operands live in `args` in source order.
struct Expr {
  ExprKind kind;
  double number = 0.0;
  std::string name;
  std::vector<ExprPtr> args;
  SourcePos pos;
};

ExprPtr make_number(double x, SourcePos pos = {});
ExprPtr make_ref(ExprKind kind, std::string name, SourcePos pos = {});
ExprPtr make_op(ExprKind kind, std::vector<ExprPtr> args, SourcePos pos = {});

/// Structural equality; source positions are ignored.
bool same_expr(const Expr& a, const Expr& b);

/// Renders an expression so that parsing it back yields a same_expr tree.
std::string to_source(const Expr& e);

struct Statement {
  enum class Target { Let, OutputValue, OutputTime };
  Target target;
  std::string name;  // let name or output variable name
  ExprPtr expr;
  SourcePos pos;
};

bool same_statement(const Statement& a, const Statement& b);

/// A relation body bound to its relation signature. Statements run in order;
/// exactly one assigns `<output>.v`. `<output>.t` assignments are retained for
/// printing but never evaluated.
struct RelationExpr {
  RelationId relation;
  VariableId output;
  std::vector<VariableId> inputs;
  std::vector<Statement> statements;

  friend bool operator==(const RelationExpr& a, const RelationExpr& b);
};

/// Evaluates the body over interval inputs keyed by input variable.
///
/// Scalars broadcast against vectors; two vectors must have the same length.
/// Slice and index bounds must be integral point intervals inside the operand
/// length, and slices must be non-empty. Throws EvalError (or DimensionError
/// on a length mismatch).
IntervalVector eval_relation(const RelationExpr& expr, const std::map<VariableId, Itom>& inputs);

}  // namespace rmon
