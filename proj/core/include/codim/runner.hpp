#pragma once

// Experiment runner: executes the experiment list of a config in order and
// writes manifest.json, diagnostics.csv and the per-stage CSV outputs.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "codim/config.hpp"
#include "codim/verify.hpp"

namespace codim {

struct RunOptions {
  std::optional<std::uint64_t> seed;      ///< Overrides the config seed.
  std::optional<std::string> output_dir;  ///< Overrides the config output_dir.
  unsigned threads = 0;                   ///< 0: hardware concurrency.
  /// Replaces the experiment list by a single verify stage.
  std::optional<Suite> verify_suite;
  std::ostream* table = nullptr;  ///< Verify rows as they finish.
  std::ostream* log = nullptr;    ///< Stage progress.
};

/// Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitStageFailed = 3;

struct RunResult {
  int exit_code = kExitOk;
  std::string output_dir;
  std::optional<VerifyReport> verify;  ///< Last verify stage, if any.
};

RunResult run(ExperimentConfig config, const RunOptions& options);

/// Lower-case hex SHA-256 of a byte string and of a file.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

}  // namespace codim
