#pragma once

// Text format for knowledge bases (`.kb` files).
//
//   % comment to end of line
//   :- directive(ignored).
//   function(dmin, r1, [d_2d]).
//   itomsOf(d_2d, ["/p2os/sonar/ranges", "/scan/ranges"]).
//   implementation(r1, "
//   dmin.v = min(d_2d.v)
//   ").
//
// Implementation bodies are double-quoted and hold one statement per line
// (or `;`-separated). `#` starts a body comment. Statements are either
// `name = expr` (a let binding) or `<output>.v = expr`; `<output>.t = expr`
// is accepted and ignored with a warning. Expressions support numbers,
// `in.v`, `in.t`, let names, unary `-`, `+ - * /`, `min(a)`, `max(a)`,
// `sum(a)`, `len(a)`, elementwise `min(a, b)` / `max(a, b)`, slices `a[i:j]`
// (half-open) and indexing `a[i]`. Strings have no escape sequences.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rmon/errors.hpp"
#include "rmon/expr.hpp"
#include "rmon/knowledge_base.hpp"

namespace rmon {

struct FunctionFact {
  VariableId output;
  RelationId relation;
  std::vector<VariableId> inputs;
  SourcePos pos;
};

struct ItomsOfFact {
  VariableId variable;
  std::vector<SignalId> signals;
  SourcePos pos;
};

struct ImplementationFact {
  RelationId relation;
  std::vector<Statement> statements;
  SourcePos pos;
};

using Fact = std::variant<FunctionFact, ItomsOfFact, ImplementationFact>;

struct KbDocument {
  std::vector<Fact> facts;
};

/// Structural equality of documents; positions are ignored.
bool same_document(const KbDocument& a, const KbDocument& b);

struct Diagnostic {
  SourcePos pos;
  std::string message;
};

/// The KB failed structural validation. Carries every violation found; the
/// position is that of the first offending fact.
class KbValidationError : public ParseError {
 public:
  KbValidationError(std::vector<Violation> violations, SourcePos pos);
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

struct ParsedKb {
  KnowledgeBase kb;
  std::map<RelationId, RelationExpr> implementations;
  std::vector<Diagnostic> warnings;
  KbDocument document;
};

/// Syntax only. Throws ParseError.
KbDocument parse_document(std::string_view text);

/// Resolves names, builds and validates the KB. Throws ParseError (bad body
/// references, unknown relation in an implementation) or KbValidationError.
ParsedKb build_kb(KbDocument doc);

inline ParsedKb parse_kb(std::string_view text) { return build_kb(parse_document(text)); }

/// Reads a file; error messages are prefixed with the path.
ParsedKb load_kb(const std::filesystem::path& path);

/// Canonical text; parse_document(print_document(d)) is same_document with d.
std::string print_document(const KbDocument& doc);

}  // namespace rmon
