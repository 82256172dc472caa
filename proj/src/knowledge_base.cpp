#include "rmon/knowledge_base.hpp"

#include <algorithm>
#include <set>
#include <variant>

#include "rmon/errors.hpp"

namespace rmon {

const char* to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::UnknownVariable:
      return "unknown variable";
    case Violation::Kind::BidirectionalEdge:
      return "bidirectional edge";
    case Violation::Kind::DuplicateRelation:
      return "duplicate relation";
    case Violation::Kind::DuplicateInput:
      return "duplicate input edge";
    case Violation::Kind::EmptyInputs:
      return "relation without inputs";
  }
  return "unknown";
}

void KnowledgeBase::declare_variable(const VariableId& v) {
  if (!has_variable(v)) variables_.push_back(v);
}

void KnowledgeBase::add_relation(Relation r) { relations_.push_back(std::move(r)); }

void KnowledgeBase::bind(const VariableId& v, const SignalId& sig) {
  if (!has_variable(v)) throw KnowledgeBaseError("cannot bind signal to unknown variable " + v.str());
  if (auto owner = variable_of(sig); owner && *owner != v) {
    throw KnowledgeBaseError("signal \"" + sig.str() + "\" is already bound to variable " +
                             owner->str());
  }
  auto& sigs = bindings_[v];
  if (std::find(sigs.begin(), sigs.end(), sig) == sigs.end()) sigs.push_back(sig);
}

void KnowledgeBase::unbind(const VariableId& v, const SignalId& sig) {
  if (!has_variable(v)) {
    throw KnowledgeBaseError("cannot unbind signal from unknown variable " + v.str());
  }
  auto it = bindings_.find(v);
  if (it == bindings_.end()) return;
  std::erase(it->second, sig);
  if (it->second.empty()) bindings_.erase(it);
}

KnowledgeBase KnowledgeBase::with_binding(const VariableId& v, const SignalId& sig) const {
  KnowledgeBase copy = *this;
  copy.bind(v, sig);
  return copy;
}

KnowledgeBase KnowledgeBase::without_binding(const VariableId& v, const SignalId& sig) const {
  KnowledgeBase copy = *this;
  copy.unbind(v, sig);
  return copy;
}

std::vector<Violation> KnowledgeBase::validate() const {
  std::vector<Violation> out;
  std::set<RelationId> seen;
  for (const auto& r : relations_) {
    const std::string where = "relation " + r.id.str();
    if (!seen.insert(r.id).second) {
      out.push_back({Violation::Kind::DuplicateRelation, where + " is declared more than once"});
    }
    if (!has_variable(r.output)) {
      out.push_back({Violation::Kind::UnknownVariable,
                     where + " outputs undeclared variable " + r.output.str()});
    }
    if (r.inputs.empty()) {
      out.push_back({Violation::Kind::EmptyInputs, where + " has no inputs"});
    }
    std::set<VariableId> ins;
    for (const auto& in : r.inputs) {
      if (!has_variable(in)) {
        out.push_back({Violation::Kind::UnknownVariable,
                       where + " reads undeclared variable " + in.str()});
      }
      if (in == r.output) {
        out.push_back({Violation::Kind::BidirectionalEdge,
                       where + ": variable " + in.str() + " is both input and output"});
      }
      if (!ins.insert(in).second) {
        out.push_back({Violation::Kind::DuplicateInput,
                       where + " lists input " + in.str() + " more than once"});
      }
    }
  }
  for (const auto& [v, sigs] : bindings_) {
    if (!has_variable(v)) {
      out.push_back({Violation::Kind::UnknownVariable, "signals bound to undeclared variable " + v.str()});
    }
  }
  return out;
}

bool KnowledgeBase::has_variable(const VariableId& v) const {
  return std::find(variables_.begin(), variables_.end(), v) != variables_.end();
}

const Relation* KnowledgeBase::find_relation(const RelationId& id) const {
  auto it = std::find_if(relations_.begin(), relations_.end(),
                         [&](const Relation& r) { return r.id == id; });
  return it == relations_.end() ? nullptr : &*it;
}

std::vector<const Relation*> KnowledgeBase::producers(const VariableId& v) const {
  std::vector<const Relation*> out;
  for (const auto& r : relations_) {
    if (r.output == v) out.push_back(&r);
  }
  return out;
}

const std::vector<SignalId>& KnowledgeBase::signals_of(const VariableId& v) const {
  static const std::vector<SignalId> kNone;
  auto it = bindings_.find(v);
  return it == bindings_.end() ? kNone : it->second;
}

std::optional<VariableId> KnowledgeBase::variable_of(const SignalId& sig) const {
  for (const auto& [v, sigs] : bindings_) {
    if (std::find(sigs.begin(), sigs.end(), sig) != sigs.end()) return v;
  }
  return std::nullopt;
}

bool KnowledgeBase::is_bound(const VariableId& v, const SignalId& sig) const {
  const auto& sigs = signals_of(v);
  return std::find(sigs.begin(), sigs.end(), sig) != sigs.end();
}

std::size_t KnowledgeBase::signal_count() const {
  std::size_t n = 0;
  for (const auto& [v, sigs] : bindings_) n += sigs.size();
  return n;
}

namespace {

void collect_leaves(const SubstitutionNode& n, std::vector<SignalId>& out) {
  if (n.is_leaf()) {
    if (std::find(out.begin(), out.end(), *n.signal) == out.end()) out.push_back(*n.signal);
    return;
  }
  for (const auto& c : n.inputs) collect_leaves(c, out);
}

void collect_relations(const SubstitutionNode& n, std::vector<RelationId>& out) {
  if (n.relation) out.push_back(*n.relation);
  for (const auto& c : n.inputs) collect_relations(c, out);
}

std::size_t node_depth(const SubstitutionNode& n) {
  if (n.is_leaf()) return 0;
  std::size_t deepest = 0;
  for (const auto& c : n.inputs) deepest = std::max(deepest, node_depth(c));
  return deepest + 1;
}

}  // namespace

std::vector<SignalId> Substitution::leaf_signals() const {
  std::vector<SignalId> out;
  collect_leaves(root, out);
  return out;
}

std::vector<RelationId> Substitution::relations() const {
  std::vector<RelationId> out;
  collect_relations(root, out);
  return out;
}

std::size_t Substitution::depth() const { return node_depth(root); }

std::string to_term(const KnowledgeBase& kb, const SubstitutionNode& node) {
  if (node.is_leaf()) return "\"" + node.signal->str() + "\"";
  std::string out = "[function(" + node.variable.str() + "," +
                    (node.relation ? node.relation->str() : std::string("?")) + ",[";
  const Relation* r = node.relation ? kb.find_relation(*node.relation) : nullptr;
  if (r) {
    for (std::size_t i = 0; i < r->inputs.size(); ++i) {
      if (i) out += ",";
      out += r->inputs[i].str();
    }
  } else {
    for (std::size_t i = 0; i < node.inputs.size(); ++i) {
      if (i) out += ",";
      out += node.inputs[i].variable.str();
    }
  }
  out += "])";
  for (const auto& c : node.inputs) out += "," + to_term(kb, c);
  return out + "]";
}

std::string to_string(const KnowledgeBase& kb, const Substitution& s) {
  return "substitution(" + s.sink.str() + "," + to_term(kb, s.root) + ")";
}

namespace {

// Structural check of one tree node. `resolved` records the rendered subtree
// of every variable seen so far; later occurrences must render identically.
bool valid_node(const KnowledgeBase& kb, const SubstitutionNode& n, std::vector<VariableId>& path,
                std::map<VariableId, std::string>& resolved) {
  if (!kb.has_variable(n.variable)) return false;
  if (std::find(path.begin(), path.end(), n.variable) != path.end()) return false;

  if (n.is_leaf()) {
    if (n.relation || !n.inputs.empty()) return false;
    if (!kb.is_bound(n.variable, *n.signal)) return false;
  } else {
    if (!n.relation) return false;
    const Relation* r = kb.find_relation(*n.relation);
    if (!r || r->output != n.variable) return false;
    if (r->inputs.size() != n.inputs.size()) return false;
    path.push_back(n.variable);
    for (std::size_t i = 0; i < r->inputs.size(); ++i) {
      if (n.inputs[i].variable != r->inputs[i]) return false;
      if (!valid_node(kb, n.inputs[i], path, resolved)) return false;
    }
    path.pop_back();
  }

  const std::string term = to_term(kb, n);
  auto [it, inserted] = resolved.emplace(n.variable, term);
  return inserted || it->second == term;
}

// How each variable has been resolved so far within one substitution.
using Choice = std::map<VariableId, std::variant<SignalId, RelationId>>;

struct Partial {
  SubstitutionNode node;
  Choice choice;
};

class Searcher {
 public:
  explicit Searcher(const KnowledgeBase& kb) : kb_(kb) {}

  std::vector<Partial> expand(const VariableId& v, const Choice& choice, std::size_t depth_left) {
    if (std::find(path_.begin(), path_.end(), v) != path_.end()) return {};

    if (auto it = choice.find(v); it != choice.end()) {
      if (const auto* sig = std::get_if<SignalId>(&it->second)) {
        return {Partial{SubstitutionNode{v, *sig, std::nullopt, {}}, choice}};
      }
      const Relation* r = kb_.find_relation(std::get<RelationId>(it->second));
      if (depth_left == 0 || r == nullptr) return {};
      return expand_relation(*r, choice, depth_left);
    }

    std::vector<Partial> out;
    for (const auto& sig : kb_.signals_of(v)) {
      Choice c = choice;
      c.emplace(v, sig);
      out.push_back(Partial{SubstitutionNode{v, sig, std::nullopt, {}}, std::move(c)});
    }
    if (depth_left == 0) return out;
    for (const Relation* r : kb_.producers(v)) {
      Choice c = choice;
      c.emplace(v, r->id);
      auto trees = expand_relation(*r, c, depth_left);
      std::move(trees.begin(), trees.end(), std::back_inserter(out));
    }
    return out;
  }

 private:
  std::vector<Partial> expand_relation(const Relation& r, const Choice& choice,
                                       std::size_t depth_left) {
    path_.push_back(r.output);
    std::vector<Partial> partials{
        Partial{SubstitutionNode{r.output, std::nullopt, r.id, {}}, choice}};
    for (const auto& in : r.inputs) {
      std::vector<Partial> next;
      for (const auto& p : partials) {
        for (auto& child : expand(in, p.choice, depth_left - 1)) {
          Partial extended = p;
          extended.node.inputs.push_back(std::move(child.node));
          extended.choice = std::move(child.choice);
          next.push_back(std::move(extended));
        }
      }
      partials = std::move(next);
      if (partials.empty()) break;
    }
    path_.pop_back();
    return partials;
  }

  const KnowledgeBase& kb_;
  std::vector<VariableId> path_;
};

}  // namespace

bool is_valid_substitution(const KnowledgeBase& kb, const Substitution& s) {
  if (!kb.has_variable(s.sink) || s.root.variable != s.sink) return false;
  std::vector<VariableId> path;
  std::map<VariableId, std::string> resolved;
  return valid_node(kb, s.root, path, resolved);
}

std::vector<Substitution> search_substitutions(const KnowledgeBase& kb, const VariableId& needed,
                                               std::size_t max_depth) {
  if (!kb.has_variable(needed)) throw KnowledgeBaseError("unknown variable " + needed.str());
  if (max_depth == 0) throw KnowledgeBaseError("max_depth must be at least 1");
  Searcher searcher(kb);
  std::vector<Substitution> out;
  for (auto& p : searcher.expand(needed, {}, max_depth)) {
    out.push_back(Substitution{needed, std::move(p.node)});
  }
  return out;
}

}  // namespace rmon
