// Reproducible experiment orchestration: JSON configs with strict key
// checking, named presets, seeded runs, CSV/JSON artifacts, a manifest with
// content checksums, and a regression mode against the pinned
// expected-results file.
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

namespace rmp::runner {

inline constexpr const char* kEngineVersion = "0.1.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> threads_override;
  std::optional<std::string> out_override;
  bool check = false;
  std::string expected_results_path = "data/expected_results.json";
};

// Executes the configured experiment; writes summary.json, CSV artifacts and
// manifest.json under the output directory.  Returns the process exit code:
// 0 ok, 1 check failure, 2 config error.
int run(const RunOptions& opts, std::ostream& log);

// Parses and validates a config without executing anything.  Returns 0 and
// prints "ok", or returns 2 and prints the diagnostic.
int validate(const std::string& config_path, std::ostream& diagnostics);

std::string list_presets_text();

}  // namespace rmp::runner
