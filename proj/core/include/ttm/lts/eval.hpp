#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ttm/elab/flat_model.hpp"

namespace ttm::lts {

using Value = std::int32_t;

/// Maps a value of a finite domain to its position.
struct Lookup {
  std::int64_t min = 0;
  std::vector<std::int32_t> pos;  // value - min -> position, or -1
  std::vector<std::int64_t> values;

  static Lookup of(const elab::Domain& d);
  int position(std::int64_t v) const {
    std::int64_t k = v - min;
    return k < 0 || k >= static_cast<std::int64_t>(pos.size()) ? -1 : pos[static_cast<std::size_t>(k)];
  }
};

enum class NodeKind : std::uint8_t { Const, Read, Elem, Env, Not, Neg, Bin, Fold, In, QCount, QFirst, Call, Last };

struct Node {
  NodeKind kind = NodeKind::Const;
  syntax::Op op = syntax::Op::None;
  std::int32_t a = -1, b = -1, c = -1;
  std::int64_t v = 0;
  SourceLoc loc;
};

/// Read access to the values an expression may observe.
struct Frame {
  const Value* pre = nullptr;
  const Value* post = nullptr;  // primed reads; nullptr outside actions
  std::int64_t* env = nullptr;
};

/// How a name resolves at compile time.
struct Binding {
  enum class Kind : std::uint8_t { None, Const, Env, Scalar, Array, Queue, Last } kind = Kind::None;
  std::int64_t value = 0;  // Const
  int offset = 0;          // Env slot or configuration offset
  int lookup = -1;         // Array: index domain
  int capacity = 0;        // Queue
  int element = -1;        // element domain lookup (-1 when unchecked)
};

/// Expression code shared by guards, actions and state atoms. Nodes are
/// appended by Compiler and evaluated by Code::eval.
class Code {
 public:
  std::int64_t eval(int root, const Frame& f) const;
  bool truth(int root, const Frame& f) const { return eval(root, f) != 0; }

  int add(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }
  int add_lookup(const elab::Domain& d);
  const Lookup& lookup(int id) const { return lookups_[static_cast<std::size_t>(id)]; }
  int add_args(std::vector<std::pair<int, int>> args);  // (env slot, node)
  int env_size() const { return env_size_; }
  int new_env() { return env_size_++; }
  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }

 private:
  std::vector<Node> nodes_;
  std::vector<Lookup> lookups_;
  std::vector<std::vector<std::pair<int, int>>> args_;
  int env_size_ = 0;
};

/// Compiles source expressions against a flat model.
///
/// `resolve` is consulted for names not bound by folds or predicate
/// parameters; `call` handles unknown call forms (event atoms, mono).
class Compiler {
 public:
  using Resolver = std::function<Binding(const std::string&, bool primed, SourceLoc)>;
  using CallHook = std::function<std::optional<int>(const syntax::Expr&, Compiler&)>;

  Compiler(const elab::FlatModel& model, Code& code, Resolver resolve, CallHook call = {});

  /// Compiles a scalar expression; returns the root node.
  int scalar(const syntax::Expr& e);
  /// Binds `name` to an environment slot for the duration of the scope.
  void push(const std::string& name, int env_slot);
  void pop();

  /// Resolves a set expression to a constant domain.
  elab::Domain domain(const syntax::Expr& e) const;

  Code& code() { return code_; }
  const elab::FlatModel& model() const { return model_; }

 private:
  int compile(const syntax::Expr& e, int depth);
  int read(const syntax::Expr& name_expr);

  const elab::FlatModel& model_;
  Code& code_;
  Resolver resolve_;
  CallHook call_;
  std::vector<std::pair<std::string, int>> scope_;
};

[[noreturn]] void eval_error(const std::string& msg, SourceLoc loc = {});

}  // namespace ttm::lts
