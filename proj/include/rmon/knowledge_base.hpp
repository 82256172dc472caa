#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rmon/ids.hpp"

namespace rmon {

/// A relation computes exactly one output variable from an ordered list of inputs.
struct Relation {
  RelationId id;
  VariableId output;
  std::vector<VariableId> inputs;

  friend bool operator==(const Relation&, const Relation&) = default;
};

struct Violation {
  enum class Kind {
    UnknownVariable,
    BidirectionalEdge,
    DuplicateRelation,
    DuplicateInput,
    EmptyInputs,
  };
  Kind kind;
  std::string message;
};

const char* to_string(Violation::Kind kind);

/// Bipartite variable/relation graph with signal-to-variable bindings.
///
/// Variables, relations and the signals of each variable keep their
/// declaration order; searches iterate in that order. Cycles are allowed.
///
/// The builder methods (declare_variable, add_relation, bind) mutate in place
/// and perform no cross-checking; call validate() once the graph is assembled.
/// with_binding/without_binding return updated copies and do check.
class KnowledgeBase {
 public:
  /// Idempotent.
  void declare_variable(const VariableId& v);
  void add_relation(Relation r);
  /// Idempotent per (v, sig). Throws KnowledgeBaseError if v is undeclared or
  /// sig is already bound to another variable.
  void bind(const VariableId& v, const SignalId& sig);
  /// Throws KnowledgeBaseError if v is undeclared. Unbinding an absent pair is a no-op.
  void unbind(const VariableId& v, const SignalId& sig);

  KnowledgeBase with_binding(const VariableId& v, const SignalId& sig) const;
  KnowledgeBase without_binding(const VariableId& v, const SignalId& sig) const;

  std::vector<Violation> validate() const;

  const std::vector<VariableId>& variables() const noexcept { return variables_; }
  const std::vector<Relation>& relations() const noexcept { return relations_; }
  bool has_variable(const VariableId& v) const;
  const Relation* find_relation(const RelationId& id) const;
  /// Relations whose output is v, in declaration order.
  std::vector<const Relation*> producers(const VariableId& v) const;
  /// Bound signals of v in declaration order; empty for unknown variables.
  const std::vector<SignalId>& signals_of(const VariableId& v) const;
  std::optional<VariableId> variable_of(const SignalId& sig) const;
  bool is_bound(const VariableId& v, const SignalId& sig) const;
  bool provided(const VariableId& v) const { return !signals_of(v).empty(); }
  std::size_t signal_count() const;

  friend bool operator==(const KnowledgeBase&, const KnowledgeBase&) = default;

 private:
  std::vector<VariableId> variables_;
  std::vector<Relation> relations_;
  std::map<VariableId, std::vector<SignalId>> bindings_;
};

/// One node of a substitution tree: either a leaf reading a concrete signal
/// bound to `variable`, or an application of `relation` whose children follow
/// the relation's input order.
struct SubstitutionNode {
  VariableId variable;
  std::optional<SignalId> signal;
  std::optional<RelationId> relation;
  std::vector<SubstitutionNode> inputs;

  bool is_leaf() const noexcept { return signal.has_value(); }

  friend bool operator==(const SubstitutionNode&, const SubstitutionNode&) = default;
};

struct Substitution {
  VariableId sink;
  SubstitutionNode root;

  /// Distinct leaf signals in depth-first, left-to-right order.
  std::vector<SignalId> leaf_signals() const;
  /// Relation ids in depth-first pre-order (with repeats for shared subtrees).
  std::vector<RelationId> relations() const;
  /// Number of relation levels on the longest root-to-leaf path.
  std::size_t depth() const;
  bool is_direct() const noexcept { return root.is_leaf(); }

  friend bool operator==(const Substitution&, const Substitution&) = default;
};

/// Canonical single-line rendering (also used as a set key in tests):
///   "/sig"  or  [function(out,r,[in..]),child,..]
std::string to_term(const KnowledgeBase& kb, const SubstitutionNode& node);
/// `substitution(var,<term>)` as printed by the CLI.
std::string to_string(const KnowledgeBase& kb, const Substitution& s);

bool is_valid_substitution(const KnowledgeBase& kb, const Substitution& s);

constexpr std::size_t kDefaultMaxDepth = 10;

/// Enumerates every valid substitution of `needed` using at most `max_depth`
/// relation levels. Direct bindings come first, then relation trees; within a
/// variable, signals and relations are tried in declaration order. A variable
/// never recurs on its own expansion path, and each variable resolves the same
/// way everywhere it occurs inside one substitution.
///
/// Throws KnowledgeBaseError if `needed` is undeclared or max_depth is 0.
std::vector<Substitution> search_substitutions(const KnowledgeBase& kb, const VariableId& needed,
                                               std::size_t max_depth = kDefaultMaxDepth);

}  // namespace rmon
