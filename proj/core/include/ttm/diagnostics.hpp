#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ttm {

/// 1-based line/column; line 0 means "no position".
///
/// Locations are metadata: two locations always compare equal so that AST
/// values compare structurally.
struct SourceLoc {
  int line = 0;
  int column = 0;

  bool known() const { return line > 0; }
  friend bool operator==(const SourceLoc&, const SourceLoc&) { return true; }
};

enum class ErrorKind {
  SyntaxError,
  DuplicateName,
  UnknownReference,
  BoundError,
  TypeError,
  UnknownAtom,
  ArityError,
  UnknownSet,
  MissingBinding,
  ModeMismatch,
  UnknownDependency,
  ModeConflict,
  NameCollision,
  EmptyIteration,
  CyclicModuleDependency,
  CyclicEventDependency,
  SyncTargetNotFound,
  AmbiguousSync,
  CircularDataFlow,
  DoubleAssignment,
  MergedBoundEmpty,
  NotEnabled,
  EvaluationError,
  Deadlock,
  StateLimitExceeded,
  FormulaTooLarge,
  BadChoice,
  BadIndex,
  ModelMismatch,
  ReplayDivergence,
  UnknownProperty,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// True for errors that come from exhausting a configured limit rather than
/// from a defect in the model or the request.
bool is_resource_error(ErrorKind kind);

struct Diagnostic {
  ErrorKind kind = ErrorKind::SyntaxError;
  std::string message;
  SourceLoc loc;

  /// "line:col: Kind: message" (position omitted when unknown).
  std::string render() const;
};

/// Exception carrying one or more diagnostics. Every fallible operation in
/// the library reports through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, SourceLoc loc = {});
  explicit Error(std::vector<Diagnostic> diagnostics);

  ErrorKind kind() const { return diagnostics_.front().kind; }
  SourceLoc loc() const { return diagnostics_.front().loc; }
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

}  // namespace ttm
