#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ttm::elab {

enum class ScalarKind : std::uint8_t { Bool, Int, Symbol };

/// A finite set of scalar values in declaration order.
struct Domain {
  ScalarKind kind = ScalarKind::Int;
  std::vector<std::int64_t> values;

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
  bool contains(std::int64_t v) const;
  /// Position of v in `values`, or -1.
  int position(std::int64_t v) const;

  static Domain boolean();
  static Domain range(std::int64_t lo, std::int64_t hi);

  bool operator==(const Domain&) const = default;
};

struct Type {
  enum class Kind : std::uint8_t { Scalar, Array, Queue };
  Kind kind = Kind::Scalar;
  Domain element;             // scalar domain, array element, or queue element
  Domain index;               // Array only
  std::int64_t capacity = 0;  // Queue only

  /// Number of value slots the type occupies in a state vector.
  int slots() const;

  bool operator==(const Type&) const = default;
};

/// Enumeration symbols share one global code space.
class SymbolTable {
 public:
  std::int64_t intern(const std::string& name);
  std::optional<std::int64_t> find(const std::string& name) const;
  const std::string& name(std::int64_t code) const { return names_.at(static_cast<std::size_t>(code)); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::int64_t> codes_;
};

}  // namespace ttm::elab
