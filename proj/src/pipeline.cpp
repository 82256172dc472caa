#include "rmon/pipeline.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "rmon/errors.hpp"

namespace rmon {

Pipeline::Pipeline(Substitution s, const std::map<RelationId, RelationExpr>& implementations)
    : substitution_(std::move(s)), leaves_(substitution_.leaf_signals()) {
  for (const auto& id : substitution_.relations()) {
    if (implementations_.contains(id)) continue;
    auto it = implementations.find(id);
    if (it == implementations.end()) throw Error("missing implementation for relation " + id.str());
    implementations_.emplace(id, std::make_shared<const RelationExpr>(it->second));
  }
}

Itom Pipeline::run(std::span<const Itom* const> leaves) const {
  if (leaves.size() != leaves_.size()) {
    throw DimensionError("pipeline expects " + std::to_string(leaves_.size()) +
                         " leaf itoms, got " + std::to_string(leaves.size()));
  }
  return run_node(substitution_.root, leaves);
}

Itom Pipeline::run_node(const SubstitutionNode& node, std::span<const Itom* const> leaves) const {
  if (node.is_leaf()) {
    const auto idx = static_cast<std::size_t>(
        std::find(leaves_.begin(), leaves_.end(), *node.signal) - leaves_.begin());
    return *leaves[idx];
  }

  std::map<VariableId, Itom> inputs;
  std::optional<Interval> time;
  double t_r = -std::numeric_limits<double>::infinity();
  for (const auto& child : node.inputs) {
    Itom in = run_node(child, leaves);
    time = time ? intersect(*time, in.time()) : std::optional<Interval>(in.time());
    if (!time) throw EvalError("input itoms of " + node.relation->str() + " are not comparable in time");
    t_r = std::max(t_r, in.t_r());
    inputs.insert_or_assign(child.variable, std::move(in));
  }
  IntervalVector value = eval_relation(*implementations_.at(*node.relation), inputs);
  return Itom(SignalId(node.variable.str()), std::move(value), *time, time->hi(), t_r);
}

Pipeline compose_substitution(const Substitution& s,
                              const std::map<RelationId, RelationExpr>& implementations) {
  return Pipeline(s, implementations);
}

}  // namespace rmon
