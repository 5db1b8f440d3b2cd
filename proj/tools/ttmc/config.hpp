#pragma once

#include <cstddef>
#include <optional>
#include <string>

namespace ttmc {

/// Settings shared by every subcommand. Precedence, lowest first:
/// defaults, ttmc.toml, TTMC_LIMIT_STATES, command-line flags.
struct RunConfig {
  std::size_t limit_states = 2'000'000;
  std::size_t limit_memory_mb = 2048;
  unsigned workers = 1;
  std::string format = "text";  // text | json
};

/// Reads `path` into `cfg`. Keys mirror the long flags: limit-states,
/// limit-memory, workers, format. Throws ttm::Error(IoError) on a
/// malformed file or an unknown key.
void load_config_file(const std::string& path, RunConfig& cfg);

/// Applies TTMC_LIMIT_STATES when set.
void apply_environment(RunConfig& cfg);

/// Throws ttm::Error(IoError) unless limits are positive, workers >= 1 and
/// the format is known.
void validate(const RunConfig& cfg);

}  // namespace ttmc
