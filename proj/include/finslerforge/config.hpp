#pragma once

#include <stdexcept>
#include <string>

#include "finslerforge/report.hpp"

namespace finslerforge {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error("config field '" + field + "': " + what) {}
};

struct CliOptions {
  std::string command;  // optional positional; must agree with the config
  std::string config_path;
  std::string out_dir;       // empty: from config, else "."
  double tol_override = -1;  // < 0: no override
  double grid_scale = 1.0;
  long long seed_override = -1;
};

/// Loads, validates and dispatches a run. Returns the report after writing
/// artifacts. Throws ConfigError for validation problems and propagates
/// numeric errors.
Report run_config(const CliOptions& opt);

/// Exit-code policy: 0 pass, 1 check failure, 2 config error, 3 numeric error.
int run_cli(const CliOptions& opt);

/// Parallelism cap from FINSLERFORGE_THREADS (>= 1).
int max_threads();

}  // namespace finslerforge
