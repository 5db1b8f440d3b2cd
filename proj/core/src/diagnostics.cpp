#include "ttm/diagnostics.hpp"

#include <fmt/format.h>

namespace ttm {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::DuplicateName: return "DuplicateName";
    case ErrorKind::UnknownReference: return "UnknownReference";
    case ErrorKind::BoundError: return "BoundError";
    case ErrorKind::TypeError: return "TypeError";
    case ErrorKind::UnknownAtom: return "UnknownAtom";
    case ErrorKind::ArityError: return "ArityError";
    case ErrorKind::UnknownSet: return "UnknownSet";
    case ErrorKind::MissingBinding: return "MissingBinding";
    case ErrorKind::ModeMismatch: return "ModeMismatch";
    case ErrorKind::UnknownDependency: return "UnknownDependency";
    case ErrorKind::ModeConflict: return "ModeConflict";
    case ErrorKind::NameCollision: return "NameCollision";
    case ErrorKind::EmptyIteration: return "EmptyIteration";
    case ErrorKind::CyclicModuleDependency: return "CyclicModuleDependency";
    case ErrorKind::CyclicEventDependency: return "CyclicEventDependency";
    case ErrorKind::SyncTargetNotFound: return "SyncTargetNotFound";
    case ErrorKind::AmbiguousSync: return "AmbiguousSync";
    case ErrorKind::CircularDataFlow: return "CircularDataFlow";
    case ErrorKind::DoubleAssignment: return "DoubleAssignment";
    case ErrorKind::MergedBoundEmpty: return "MergedBoundEmpty";
    case ErrorKind::NotEnabled: return "NotEnabled";
    case ErrorKind::EvaluationError: return "EvaluationError";
    case ErrorKind::Deadlock: return "Deadlock";
    case ErrorKind::StateLimitExceeded: return "StateLimitExceeded";
    case ErrorKind::FormulaTooLarge: return "FormulaTooLarge";
    case ErrorKind::BadChoice: return "BadChoice";
    case ErrorKind::BadIndex: return "BadIndex";
    case ErrorKind::ModelMismatch: return "ModelMismatch";
    case ErrorKind::ReplayDivergence: return "ReplayDivergence";
    case ErrorKind::UnknownProperty: return "UnknownProperty";
    case ErrorKind::IoError: return "IoError";
  }
  return "Error";
}

bool is_resource_error(ErrorKind kind) {
  return kind == ErrorKind::StateLimitExceeded || kind == ErrorKind::FormulaTooLarge;
}

std::string Diagnostic::render() const {
  if (loc.known())
    return fmt::format("{}:{}: {}: {}", loc.line, loc.column, to_string(kind), message);
  return fmt::format("{}: {}", to_string(kind), message);
}

static std::string join_rendered(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (!out.empty()) out += '\n';
    out += d.render();
  }
  return out;
}

Error::Error(ErrorKind kind, std::string message, SourceLoc loc)
    : Error(std::vector<Diagnostic>{Diagnostic{kind, std::move(message), loc}}) {}

Error::Error(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join_rendered(diagnostics)), diagnostics_(std::move(diagnostics)) {
  if (diagnostics_.empty())
    diagnostics_.push_back(Diagnostic{ErrorKind::SyntaxError, "unknown error", {}});
}

}  // namespace ttm
