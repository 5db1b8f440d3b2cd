#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "ttm/elab/flat_model.hpp"
#include "ttm/lts/lts.hpp"
#include "ttm/syntax/ast.hpp"

namespace ttmc {

/// Exit codes of every subcommand.
enum Exit : int { kOk = 0, kViolated = 1, kError = 2, kLimit = 3 };

struct LoadedModel {
  std::string path;
  ttm::syntax::SourceModel source;
  std::shared_ptr<const ttm::elab::FlatModel> flat;
  std::shared_ptr<const ttm::lts::System> sys;
};

std::string read_file(const std::string& path);
/// Parses and flattens a model given as source text; `path` is only used in messages.
LoadedModel load_source(std::string text, std::string path, bool strict_action_edges = false);
LoadedModel load_model(const std::string& path, bool strict_action_edges = false);

/// Renders diagnostics as "file:line:col: Kind: message".
std::string render_error(const ttm::Error& e, const std::string& path);

/// Entry point shared by the binary and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ttmc
