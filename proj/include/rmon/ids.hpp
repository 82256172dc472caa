#pragma once

#include <compare>
#include <functional>
#include <ostream>
#include <string>
#include <utility>

namespace rmon {

/// String identifier tagged by the kind of entity it names, so a variable
/// name cannot be passed where a signal name is expected.
template <typename Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string name) : name_(std::move(name)) {}
  explicit Id(const char* name) : name_(name) {}

  const std::string& str() const noexcept { return name_; }
  bool empty() const noexcept { return name_.empty(); }

  friend auto operator<=>(const Id&, const Id&) = default;
  friend bool operator==(const Id&, const Id&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Id& id) { return os << id.name_; }

 private:
  std::string name_;
};

struct VariableTag {};
struct SignalTag {};
struct RelationTag {};

using VariableId = Id<VariableTag>;
using SignalId = Id<SignalTag>;
using RelationId = Id<RelationTag>;

}  // namespace rmon

template <typename Tag>
struct std::hash<rmon::Id<Tag>> {
  std::size_t operator()(const rmon::Id<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
