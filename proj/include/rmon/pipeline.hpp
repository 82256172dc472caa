#pragma once

#include <map>
#include <memory>
#include <span>
#include <vector>

#include "rmon/expr.hpp"
#include "rmon/itom.hpp"
#include "rmon/knowledge_base.hpp"

namespace rmon {

/// Executable form of a substitution: maps one itom per leaf signal to an
/// output itom of the sink variable.
///
/// The output value is the nested interval evaluation of the relation bodies;
/// the output time is the intersection of all leaf time intervals. A direct
/// substitution returns its input itom unchanged.
class Pipeline {
 public:
  /// Throws Error if a relation of `s` has no implementation.
  Pipeline(Substitution s, const std::map<RelationId, RelationExpr>& implementations);

  const Substitution& substitution() const noexcept { return substitution_; }
  /// Distinct leaf signals; run() takes its inputs in this order.
  const std::vector<SignalId>& leaf_signals() const noexcept { return leaves_; }

  /// Throws EvalError/DimensionError on evaluation failure, and EvalError if
  /// the leaf time intervals have no common point.
  Itom run(std::span<const Itom* const> leaves) const;

 private:
  Itom run_node(const SubstitutionNode& node, std::span<const Itom* const> leaves) const;

  Substitution substitution_;
  std::vector<SignalId> leaves_;
  std::map<RelationId, std::shared_ptr<const RelationExpr>> implementations_;
};

Pipeline compose_substitution(const Substitution& s,
                              const std::map<RelationId, RelationExpr>& implementations);

}  // namespace rmon
