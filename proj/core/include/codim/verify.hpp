#pragma once

// Acceptance suite: twelve criteria evaluated on the flat plane (closed-form
// oracles) and on a Lipschitz graph (stability across resolutions and
// scales). Comparisons "at h and h/2" use 2h and the configured h.

#include <functional>
#include <string>
#include <vector>

#include "codim/config.hpp"

namespace codim {

enum class CheckStatus { Pass, Fail, Underpowered, Skipped };
const char* to_string(CheckStatus s);

/// One measured quantity of a criterion.
struct Check {
  std::string geometry;  ///< flat | graph
  std::string quantity;
  double measured = 0.0;
  std::string threshold;
  CheckStatus status = CheckStatus::Fail;
  std::string note;     ///< Error message or context.
  bool timing = false;  ///< Wall-clock quantity: kept out of the CSV outputs.
};

struct Criterion {
  int id = 0;
  std::string title;
  std::vector<Check> checks;
  double seconds = 0.0;
  /// Fail if any check fails; Underpowered if any check is and none fails;
  /// Skipped when the suite has no check for it.
  CheckStatus status() const;
};

struct VerifyReport {
  Suite suite = Suite::All;
  std::vector<Criterion> criteria;
  bool passed() const;  ///< No criterion failed.
};

/// Pinned thresholds.
namespace thresholds {
inline constexpr double kOmegaLo = 0.475, kOmegaHi = 0.525;
inline constexpr double kSolverSeconds = 300.0;
inline constexpr double kWalkerSeconds = 180.0;
inline constexpr double kWalkerSigmas = 3.0;
inline constexpr double kDeficit = 0.02;
inline constexpr double kConstantError = 1e-8;
inline constexpr double kDistanceError = 0.05;
inline constexpr double kErrorRatio = 1.7;
inline constexpr double kEllipticityDrift = 0.05;
inline constexpr double kAhlforsDimension = 0.05;
inline constexpr double kAhlforsConstant = 2.5;
inline constexpr double kPoincareFactor = 3.0;
inline constexpr double kDoublingFlat = 4.0;
inline constexpr double kDoublingDrift = 0.25;
inline constexpr double kComparisonDrift = 0.25;
inline constexpr double kSquareFunction = 10.0;
inline constexpr double kCarlesonGrowth = 1.2;
inline constexpr double kAInfinity = 10.0;
inline constexpr double kAInfinityOracle = 0.02;
inline constexpr double kTvSigmas = 3.0;
inline constexpr double kTvSlack = 0.03;
}  // namespace thresholds

/// Runs the suite for `config` (geometry n, d, grid, operator, walker and
/// verify sections). `on_criterion` is called as each criterion finishes.
VerifyReport run_verify(const ExperimentConfig& config, Suite suite,
                        const std::function<void(const Criterion&)>& on_criterion = {});

/// `[PASS] C1  title: quantity = value (threshold); ...`
std::string format_criterion(const Criterion& c);

/// `criterion,geometry,quantity,measured,threshold,status` rows (timings left out).
void write_verify_csv(const VerifyReport& report, const std::string& path);

}  // namespace codim
