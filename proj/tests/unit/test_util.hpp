#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "ttm/elab/elaborator.hpp"
#include "ttm/lts/lts.hpp"
#include "ttm/syntax/parser.hpp"

namespace ttm::test {

inline std::string model_path(const std::string& name) { return std::string(TTM_MODELS_DIR) + "/" + name; }

inline std::string read_model(const std::string& name) {
  std::ifstream in(model_path(name));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Loaded {
  syntax::SourceModel src;
  elab::FlatModel flat;
  std::shared_ptr<lts::System> sys;
};

inline Loaded load(const std::string& text, elab::ElabOptions opts = {}) {
  Loaded l;
  l.src = syntax::parse_or_throw(text);
  l.flat = elab::flatten(l.src, opts);
  l.sys = std::make_shared<lts::System>(l.flat);
  return l;
}

inline Loaded load_file(const std::string& name) { return load(read_model(name)); }

/// Kind of the first diagnostic thrown by `f`, with its position.
template <class F>
Diagnostic first_error(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.diagnostics().front();
  }
  return Diagnostic{ErrorKind::IoError, "no error", {}};
}

/// One module owning `v : 0..3` and `b : bool`; `body` holds the module's
/// locals, timers and events.
inline std::string single_module(const std::string& body) {
  return "variables\n  v : 0..3 = 0;\n  b : bool = false;\nend\n\n"
         "module M\n  interface\n    v : out 0..3 = 0;\n    b : out bool = false;\n" +
         body + "end\n\ninstances\n  m = M(out v, out b)\nend\n\nsystem = m\n";
}

}  // namespace ttm::test
