#pragma once

#include <iosfwd>

#include "ttm/sim/session.hpp"

namespace ttmc {

/// Runs simulator commands read line by line from `in`.
///
/// Commands: list, fire <n|transition> [choice], undo [k], redo, walk <n>,
/// state, history, export [file], import <file>, help, quit. In a script
/// (non-interactive) the first failing command stops the run with exit 2.
int run_repl(ttm::sim::Session& s, std::istream& in, std::ostream& out, std::ostream& err, bool interactive);

}  // namespace ttmc
