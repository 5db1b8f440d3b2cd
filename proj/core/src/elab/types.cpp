#include "ttm/elab/types.hpp"

#include <algorithm>

namespace ttm::elab {

bool Domain::contains(std::int64_t v) const { return position(v) >= 0; }

int Domain::position(std::int64_t v) const {
  auto it = std::find(values.begin(), values.end(), v);
  return it == values.end() ? -1 : static_cast<int>(it - values.begin());
}

Domain Domain::boolean() { return Domain{ScalarKind::Bool, {0, 1}}; }

Domain Domain::range(std::int64_t lo, std::int64_t hi) {
  Domain d{ScalarKind::Int, {}};
  for (std::int64_t v = lo; v <= hi; ++v) d.values.push_back(v);
  return d;
}

int Type::slots() const {
  switch (kind) {
    case Kind::Scalar: return 1;
    case Kind::Array: return static_cast<int>(index.size());
    case Kind::Queue: return static_cast<int>(capacity) + 1;
  }
  return 1;
}

std::int64_t SymbolTable::intern(const std::string& name) {
  auto [it, inserted] = codes_.emplace(name, static_cast<std::int64_t>(names_.size()));
  if (inserted) names_.push_back(name);
  return it->second;
}

std::optional<std::int64_t> SymbolTable::find(const std::string& name) const {
  auto it = codes_.find(name);
  if (it == codes_.end()) return std::nullopt;
  return it->second;
}

}  // namespace ttm::elab
