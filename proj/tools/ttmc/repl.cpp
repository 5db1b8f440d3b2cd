#include "repl.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "app.hpp"

namespace ttmc {

using ttm::Error;
using ttm::ErrorKind;

namespace {

constexpr const char* kHelp =
    "  list                      enabled transitions\n"
    "  fire <n|name> [choice]    fire transition n of the list, or by name\n"
    "  undo [k]                  undo the last k steps (default 1)\n"
    "  redo                      replay the next undone step\n"
    "  walk <n>                  fire n random transitions\n"
    "  state                     current configuration\n"
    "  history                   transitions taken so far\n"
    "  export [file]             write the trace (stdout without a file)\n"
    "  import <file>             replace the session by a recorded trace\n"
    "  quit\n";

std::size_t parse_count(const std::string& word) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(word, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != word.size() || word.empty() || word[0] == '-')
    throw Error(ErrorKind::BadIndex, fmt::format("'{}' is not a non-negative number", word));
  return static_cast<std::size_t>(v);
}

void list(const ttm::sim::Session& s, std::ostream& out) {
  auto en = s.enabled();
  if (en.empty()) {
    out << "  (deadlock: nothing is enabled)\n";
    return;
  }
  for (std::size_t i = 0; i < en.size(); ++i) {
    std::string extra;
    if (en[i].choices > 1) extra += fmt::format("  [{} choices]", en[i].choices);
    if (!en[i].advances.empty()) {
      std::string a;
      for (const auto& x : en[i].advances) a += (a.empty() ? "" : ", ") + x;
      extra += "  advances: " + a;
    }
    fmt::print(out, "  {:>3}  {}{}\n", i, en[i].label, extra);
  }
}

}  // namespace

int run_repl(ttm::sim::Session& s, std::istream& in, std::ostream& out, std::ostream& err, bool interactive) {
  const auto& sys = s.system();
  if (interactive) out << "ttmc simulate; type 'help' for commands\n";
  std::string line;
  std::size_t lineno = 0;
  while (true) {
    if (interactive) out << "ttm> " << std::flush;
    if (!std::getline(in, line)) break;
    ++lineno;
    std::istringstream words(line);
    std::string cmd;
    if (!(words >> cmd) || cmd.rfind("--", 0) == 0 || cmd[0] == '#') continue;
    std::vector<std::string> args;
    for (std::string w; words >> w;) args.push_back(w);
    try {
      if (cmd == "quit" || cmd == "exit") break;
      if (cmd == "help") out << kHelp;
      else if (cmd == "list") list(s, out);
      else if (cmd == "fire") {
        if (args.empty() || args.size() > 2) throw Error(ErrorKind::BadIndex, "usage: fire <n|name> [choice]");
        std::optional<std::size_t> choice;
        if (args.size() == 2) choice = parse_count(args[1]);
        const bool numeric = args[0].find_first_not_of("0123456789") == std::string::npos;
        if (numeric) {
          auto en = s.enabled();
          std::size_t n = parse_count(args[0]);
          if (n >= en.size())
            throw Error(ErrorKind::BadIndex, fmt::format("no transition {}; {} are enabled", n, en.size()));
          s.fire(en[n].name, choice);
        } else {
          s.fire(args[0], choice);
        }
        fmt::print(out, "  fired {}\n", sys.render(s.history().back().name));
      } else if (cmd == "undo") {
        s.undo(args.empty() ? 1 : parse_count(args[0]));
        fmt::print(out, "  at step {}\n", s.history().size());
      } else if (cmd == "redo") {
        if (!s.redo()) out << "  nothing to redo\n";
        else fmt::print(out, "  replayed {}\n", sys.render(s.history().back().name));
      } else if (cmd == "walk") {
        if (args.size() != 1) throw Error(ErrorKind::BadIndex, "usage: walk <n>");
        std::size_t n = s.random_walk(parse_count(args[0]));
        fmt::print(out, "  fired {} transitions\n", n);
      } else if (cmd == "state") {
        out << sys.describe(s.current());
      } else if (cmd == "history") {
        for (std::size_t i = 0; i < s.history().size(); ++i)
          fmt::print(out, "  {:>3}. {}{}\n", i + 1, sys.render(s.history()[i].name),
                     s.loop_start() && *s.loop_start() == i ? "  <- loop start" : "");
      } else if (cmd == "export") {
        std::string trace = s.export_trace();
        if (args.empty()) out << trace;
        else {
          std::ofstream o(args[0]);
          if (!o) throw Error(ErrorKind::IoError, fmt::format("cannot write '{}'", args[0]));
          o << trace;
          fmt::print(out, "  wrote {} steps to {}\n", s.history().size() + s.forward().size(), args[0]);
        }
      } else if (cmd == "import") {
        if (args.size() != 1) throw Error(ErrorKind::IoError, "usage: import <file>");
        s = ttm::sim::Session::import_trace(s.system_ptr(), read_file(args[0]));
        fmt::print(out, "  at step {} ({} steps held for redo)\n", s.history().size(), s.forward().size());
      } else {
        throw Error(ErrorKind::BadIndex, fmt::format("unknown command '{}'; try 'help'", cmd));
      }
    } catch (const Error& e) {
      if (!interactive) {
        err << fmt::format("line {}: ", lineno) << render_error(e, "");
        return kError;
      }
      err << render_error(e, "");
    }
  }
  return kOk;
}

}  // namespace ttmc
