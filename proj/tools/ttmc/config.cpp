#include "config.hpp"

#include <cstdlib>

#include <fmt/format.h>
#include <toml.hpp>

#include "ttm/diagnostics.hpp"

namespace ttmc {

using ttm::Error;
using ttm::ErrorKind;

namespace {

std::size_t positive(const toml::node& n, std::string_view key) {
  auto v = n.value<std::int64_t>();
  if (!v || *v <= 0) throw Error(ErrorKind::IoError, fmt::format("ttmc.toml: '{}' must be a positive integer", key));
  return static_cast<std::size_t>(*v);
}

}  // namespace

void load_config_file(const std::string& path, RunConfig& cfg) {
  toml::table t;
  try {
    t = toml::parse_file(path);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorKind::IoError, fmt::format("{}:{}:{}: {}", path, e.source().begin.line, e.source().begin.column,
                                                e.description()));
  }
  for (auto&& [k, v] : t) {
    const std::string_view key = k.str();
    if (key == "limit-states") cfg.limit_states = positive(v, key);
    else if (key == "limit-memory") cfg.limit_memory_mb = positive(v, key);
    else if (key == "workers") cfg.workers = static_cast<unsigned>(positive(v, key));
    else if (key == "format") {
      auto s = v.value<std::string>();
      if (!s) throw Error(ErrorKind::IoError, "ttmc.toml: 'format' must be a string");
      cfg.format = *s;
    } else {
      throw Error(ErrorKind::IoError, fmt::format("{}: unknown key '{}'", path, key));
    }
  }
}

void apply_environment(RunConfig& cfg) {
  const char* s = std::getenv("TTMC_LIMIT_STATES");
  if (!s || !*s) return;
  char* end = nullptr;
  long long v = std::strtoll(s, &end, 10);
  if (*end != '\0' || v <= 0) throw Error(ErrorKind::IoError, fmt::format("TTMC_LIMIT_STATES='{}' is not a positive integer", s));
  cfg.limit_states = static_cast<std::size_t>(v);
}

void validate(const RunConfig& cfg) {
  if (cfg.limit_states == 0 || cfg.limit_memory_mb == 0)
    throw Error(ErrorKind::IoError, "limits must be positive");
  if (cfg.workers == 0) throw Error(ErrorKind::IoError, "worker count must be at least 1");
  if (cfg.format != "text" && cfg.format != "json")
    throw Error(ErrorKind::IoError, fmt::format("unknown output format '{}' (expected text or json)", cfg.format));
}

}  // namespace ttmc
