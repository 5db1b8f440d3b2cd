#include "app.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "config.hpp"
#include "repl.hpp"
#include "server.hpp"
#include "ttm/check/checker.hpp"
#include "ttm/elab/elaborator.hpp"
#include "ttm/lts/explore.hpp"
#include "ttm/sim/session.hpp"
#include "ttm/syntax/parser.hpp"
#include "ttm/syntax/printer.hpp"

namespace ttmc {

using nlohmann::json;
using ttm::Error;
using ttm::ErrorKind;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, fmt::format("cannot read '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LoadedModel load_source(std::string text, std::string path, bool strict_action_edges) {
  LoadedModel m;
  m.path = std::move(path);
  m.source = ttm::syntax::parse_or_throw(text);
  ttm::elab::ElabOptions opts;
  opts.strict_action_edges = strict_action_edges;
  m.flat = std::make_shared<const ttm::elab::FlatModel>(ttm::elab::flatten(m.source, opts));
  m.sys = std::make_shared<const ttm::lts::System>(*m.flat);
  return m;
}

LoadedModel load_model(const std::string& path, bool strict_action_edges) {
  return load_source(read_file(path), path, strict_action_edges);
}

std::string render_error(const Error& e, const std::string& path) {
  std::string out;
  for (const auto& d : e.diagnostics()) {
    if (path.empty()) out += d.render();
    else out += d.loc.known() ? fmt::format("{}:{}", path, d.render()) : fmt::format("{}: {}", path, d.render());
    out += '\n';
  }
  return out;
}

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::size_t> limit_states, limit_memory;
  std::optional<unsigned> workers;
  std::optional<std::string> format;
};

RunConfig resolve(const Globals& g) {
  RunConfig cfg;
  if (!g.config_path.empty()) load_config_file(g.config_path, cfg);
  else if (std::filesystem::exists("ttmc.toml")) load_config_file("ttmc.toml", cfg);
  apply_environment(cfg);
  if (g.limit_states) cfg.limit_states = *g.limit_states;
  if (g.limit_memory) cfg.limit_memory_mb = *g.limit_memory;
  if (g.workers) cfg.workers = *g.workers;
  if (g.format) cfg.format = *g.format;
  validate(cfg);
  return cfg;
}

ttm::lts::ExploreOptions explore_options(const RunConfig& cfg) {
  ttm::lts::ExploreOptions o;
  o.max_states = cfg.limit_states;
  o.max_bytes = cfg.limit_memory_mb * 1024 * 1024;
  o.workers = cfg.workers;
  return o;
}

// ---------------------------------------------------------------- parse

int cmd_parse(const std::string& file, bool print, const RunConfig& cfg, std::ostream& out) {
  auto src = ttm::syntax::parse_or_throw(read_file(file));
  std::size_t events = 0;
  for (const auto& m : src.modules) events += m.events.size();
  if (cfg.format == "json") {
    out << json{{"file", file},
                {"modules", src.modules.size()},
                {"events", events},
                {"instances", src.instances.size()},
                {"properties", src.properties.size()}}
               .dump(2)
        << '\n';
  } else if (print) {
    out << ttm::syntax::print(src);
  } else {
    fmt::print(out, "{}: ok ({} modules, {} events, {} instances, {} properties)\n", file, src.modules.size(), events,
               src.instances.size(), src.properties.size());
  }
  return kOk;
}

// ---------------------------------------------------------------- flatten

int cmd_flatten(const std::string& file, bool dump, bool strict, const RunConfig& cfg, std::ostream& out) {
  auto m = load_model(file, strict);
  const auto& f = *m.flat;
  if (dump || cfg.format == "json") {
    out << ttm::elab::dump_json(f) << '\n';
    return kOk;
  }
  fmt::print(out, "{} variables, {} timers, {} events, model hash {}\n", f.vars.size(), f.timers.size(), f.events.size(),
             ttm::sim::hex(ttm::elab::model_hash(f)));
  for (const auto& e : f.events) {
    std::string idx;
    for (const auto& [n, d] : e.f_ind) idx += fmt::format("{}{} : fair", idx.empty() ? "" : ", ", n);
    for (const auto& [n, d] : e.d_ind) idx += fmt::format("{}{}", idx.empty() ? "" : ", ", n);
    fmt::print(out, "  {}{} [{}, {}] {}\n", e.id, idx.empty() ? "" : "(" + idx + ")", e.l,
               e.u ? std::to_string(*e.u) : "*", ttm::syntax::to_string(e.fair));
  }
  return kOk;
}

// ---------------------------------------------------------------- explore

int cmd_explore(const std::string& file, bool stats, const std::string& json_out, const RunConfig& cfg,
                std::ostream& out) {
  auto m = load_model(file);
  auto opts = explore_options(cfg);
  opts.keep_edges = !json_out.empty();
  auto g = ttm::lts::explore(*m.sys, opts);
  if (!json_out.empty()) {
    std::string text = ttm::lts::graph_json(*m.sys, g);
    if (json_out == "-") out << text << '\n';
    else {
      std::ofstream o(json_out);
      if (!o) throw Error(ErrorKind::IoError, fmt::format("cannot write '{}'", json_out));
      o << text << '\n';
    }
  }
  if (cfg.format == "json" && json_out != "-") {
    out << json{{"states", g.stats.states},
                {"transitions", g.stats.transitions},
                {"depth", g.stats.depth},
                {"peak_frontier", g.stats.peak_frontier},
                {"deadlocks", g.stats.deadlocks}}
               .dump(2)
        << '\n';
  } else if (stats || json_out.empty()) {
    fmt::print(out, "{} ({:.2f} s)\n", ttm::lts::format_stats(g.stats), g.stats.seconds);
  }
  return kOk;
}

// ---------------------------------------------------------------- check

json cex_json(const ttm::lts::System& sys, const ttm::check::Counterexample& cex) {
  json steps = json::array();
  for (std::size_t i = 0; i < cex.configs.size(); ++i) {
    json s{{"state", json::parse(sys.to_json(cex.configs[i]))}};
    if (i > 0) s["transition"] = sys.render(cex.labels[i - 1]);
    steps.push_back(std::move(s));
  }
  json j{{"steps", steps}};
  j["loop_start"] = cex.loop_start ? json(*cex.loop_start) : json(nullptr);
  return j;
}

int cmd_check(const std::string& file, const std::vector<std::string>& props, bool all, const std::string& props_file,
              const std::string& trace_out, bool no_fairness, const RunConfig& cfg, std::ostream& out) {
  auto m = load_model(file);
  std::vector<ttm::syntax::PropertySource> sources = m.source.properties;
  if (!props_file.empty()) {
    auto extra = ttm::syntax::parse_property_file(read_file(props_file));
    sources.insert(sources.end(), extra.begin(), extra.end());
  }
  // Selection: a bare name picks every instance, a label like
  // `liveness(A)` picks one.
  std::vector<ttm::check::PropertyInstance> selected;
  std::vector<bool> used(props.size(), false);
  for (const auto& p : sources) {
    auto insts = ttm::check::instantiate(p, *m.flat);
    for (auto& inst : insts) {
      bool want = all || props.empty();
      for (std::size_t i = 0; i < props.size(); ++i)
        if (props[i] == p.name || props[i] == inst.label) want = used[i] = true;
      if (want) selected.push_back(std::move(inst));
    }
  }
  for (std::size_t i = 0; i < props.size(); ++i)
    if (!used[i]) throw Error(ErrorKind::UnknownProperty, fmt::format("no property named '{}'", props[i]));
  if (selected.empty()) throw Error(ErrorKind::UnknownProperty, "the model declares no properties");

  ttm::check::CheckOptions opts;
  opts.explore = explore_options(cfg);
  opts.fairness = !no_fairness;
  ttm::check::ModelChecker mc(*m.sys, opts);
  json results = json::array();
  bool violated = false, trace_written = false;
  for (const auto& inst : selected) {
    auto v = mc.check(inst.formula);
    if (v.counterexample) {
      auto problems = ttm::check::validate(*m.sys, *v.counterexample, inst.formula, mc.fairness());
      if (!problems.empty())
        throw Error(ErrorKind::ReplayDivergence,
                    fmt::format("internal error: counterexample for '{}' failed validation: {}", inst.label, problems[0]));
    }
    violated |= !v.holds;
    if (cfg.format == "json") {
      json r{{"property", inst.label},
             {"holds", v.holds},
             {"method", v.method},
             {"states", v.stats.states},
             {"transitions", v.stats.transitions},
             {"product_states", v.stats.product_states},
             {"automaton_states", v.stats.automaton_states}};
      if (v.counterexample) r["counterexample"] = cex_json(*m.sys, *v.counterexample);
      results.push_back(std::move(r));
    } else {
      fmt::print(out, "{}: {} ({} states, {:.3f} s)\n", inst.label, v.holds ? "holds" : "VIOLATED", v.stats.states,
                 v.stats.seconds);
      if (v.counterexample) {
        fmt::print(out, "  counterexample ({} steps{}):\n", v.counterexample->labels.size(),
                   v.counterexample->loop_start ? ", lasso" : "");
        out << ttm::check::render(*m.sys, *v.counterexample);
      }
    }
    if (v.counterexample && !trace_out.empty() && !trace_written) {
      std::ofstream o(trace_out);
      if (!o) throw Error(ErrorKind::IoError, fmt::format("cannot write '{}'", trace_out));
      o << ttm::sim::counterexample_trace(*m.sys, *v.counterexample);
      trace_written = true;
    }
  }
  if (cfg.format == "json") out << json{{"model", file}, {"results", results}}.dump(2) << '\n';
  return violated ? kViolated : kOk;
}

// ---------------------------------------------------------------- simulate / serve

int cmd_simulate(const std::string& file, std::uint64_t seed, const std::string& script, std::ostream& out,
                 std::ostream& err) {
  auto m = load_model(file);
  ttm::sim::Session s(m.sys, seed);
  if (!script.empty()) {
    std::ifstream in(script);
    if (!in) throw Error(ErrorKind::IoError, fmt::format("cannot read '{}'", script));
    return run_repl(s, in, out, err, false);
  }
  return run_repl(s, std::cin, out, err, isatty(STDIN_FILENO) != 0);
}

int cmd_serve(const std::string& file, const std::string& host, int port, bool verbose, std::ostream& out) {
  ServerOptions opts;
  opts.default_model = file;
  opts.verbose = verbose;
  SimServer server(opts);
  int bound = server.bind(host, port);
  if (bound < 0) throw Error(ErrorKind::IoError, fmt::format("cannot listen on {}:{}", host, port));
  fmt::print(out, "ttmc serve listening on http://{}:{}\n", host, bound);
  out.flush();
  server.run();
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ttmc: parse, flatten, explore, model check and simulate timed transition models"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "ttmc 0.3.0");
  Globals g;
  app.add_option("--config", g.config_path, "Configuration file (default: ./ttmc.toml when present)");
  app.add_option("--limit-states", g.limit_states, "Maximum number of configurations")->check(CLI::PositiveNumber);
  app.add_option("--limit-memory", g.limit_memory, "Memory limit for the state store, in MiB")->check(CLI::PositiveNumber);
  app.add_option("--workers", g.workers, "Worker threads for exploration")->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "json"}));

  std::string file;
  auto* parse = app.add_subcommand("parse", "Parse a model and report declaration-level errors");
  bool print = false;
  parse->add_option("model", file, "Model file (.ttm)")->required();
  parse->add_flag("--print", print, "Pretty-print the parsed model");

  auto* flatten = app.add_subcommand("flatten", "Elaborate a model into its flat event set");
  bool dump = false, strict = false;
  flatten->add_option("model", file, "Model file (.ttm)")->required();
  flatten->add_flag("--dump", dump, "Print the flat model as JSON");
  flatten->add_flag("--strict-action-edges", strict, "Add action-graph edges for unprimed references");

  auto* explore = app.add_subcommand("explore", "Enumerate the reachable configurations");
  bool stats = false;
  std::string graph_out;
  explore->add_option("model", file, "Model file (.ttm)")->required();
  explore->add_flag("--stats", stats, "Print exploration statistics");
  explore->add_option("--json", graph_out, "Write the transition graph as JSON ('-' for stdout)");

  auto* check = app.add_subcommand("check", "Model check declared properties");
  std::vector<std::string> props;
  bool all = false, no_fairness = false;
  std::string props_file, trace_out;
  check->add_option("model", file, "Model file (.ttm)")->required();
  check->add_option("--prop", props, "Property name or instance label (repeatable)");
  check->add_flag("--all", all, "Check every property (the default without --prop)");
  check->add_option("--props", props_file, "Additional property file");
  auto* limit = check->add_option("--limit", g.limit_states, "Maximum number of configurations");
  limit->check(CLI::PositiveNumber);
  check->add_option("--trace-json", trace_out, "Write the first counterexample as a simulator trace");
  check->add_flag("--no-fairness", no_fairness, "Ignore just and compassionate declarations");

  auto* simulate = app.add_subcommand("simulate", "Interactive simulation (list, fire, undo, state, export)");
  std::uint64_t seed = 0;
  std::string script;
  simulate->add_option("model", file, "Model file (.ttm)")->required();
  simulate->add_option("--seed", seed, "Seed for demonic choices and random walks");
  simulate->add_option("--script", script, "Read commands from a file instead of stdin");

  auto* serve = app.add_subcommand("serve", "Serve simulation sessions over HTTP+JSON");
  std::string host = "127.0.0.1";
  int port = 8080;
  bool verbose = false;
  serve->add_option("model", file, "Default model for new sessions");
  serve->add_option("--host", host, "Address to bind");
  serve->add_option("--port", port, "Port (0 picks a free port)")->check(CLI::Range(0, 65535));
  serve->add_flag("-v,--verbose", verbose, "Log requests");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kError;
  }

  try {
    RunConfig cfg = resolve(g);
    if (*parse) return cmd_parse(file, print, cfg, out);
    if (*flatten) return cmd_flatten(file, dump, strict, cfg, out);
    if (*explore) return cmd_explore(file, stats, graph_out, cfg, out);
    if (*check) return cmd_check(file, props, all, props_file, trace_out, no_fairness, cfg, out);
    if (*simulate) return cmd_simulate(file, seed, script, out, err);
    if (*serve) return cmd_serve(file, host, port, verbose, out);
  } catch (const Error& e) {
    err << render_error(e, file);
    return ttm::is_resource_error(e.kind()) ? kLimit : kError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}

}  // namespace ttmc
