#pragma once

// Monte Carlo hitting distribution on the boundary. For a = D^{d+1-n},
// L u = D^{d+1-n} (Delta u + (d+1-n) grad log D . grad u), so the diffusion
// dX = (d+1-n) grad log D dtau + sqrt(2) dW is a time change of the process
// generated by L and hits the boundary with the same law.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "codim/fields.hpp"
#include "codim/geometry.hpp"

namespace codim {

enum class DriftGradient {
  Analytic,            ///< Differentiated kernel integral (closed form on flat planes).
  CenteredDifference,  ///< Centered differences of log D at stencil delta / 10.
};

struct WalkerParams {
  double dt0 = 0.002;
  double eps_abs = 1e-3;
  double r_esc = 100.0;
  std::int64_t max_steps = 100000;
  double alpha = 1.0;
  WeightVariant variant = WeightVariant::Smoothed;
  DriftGradient gradient = DriftGradient::Analytic;
  /// dtau = dt0 min(delta^2, step_cap). The default keeps the step a fixed
  /// fraction of delta at every distance.
  double step_cap = std::numeric_limits<double>::infinity();
};

enum class PathOutcome : std::uint8_t { Absorbed, Escaped, Capped };

struct PathRecord {
  PathOutcome outcome = PathOutcome::Capped;
  Vec point;  ///< Nearest boundary point at absorption, else the final position.
  Vec param;  ///< Its parameter (absorbed paths only).
  std::int64_t steps = 0;
};

struct PathEnsemble {
  Vec base;
  std::uint64_t seed = 0;
  WalkerParams params;
  std::vector<PathRecord> paths;  ///< Indexed by path id.
  size_t absorbed = 0;
  size_t escaped = 0;
  size_t capped = 0;

  size_t size() const { return paths.size(); }
  double absorbed_fraction() const;
  double deficit() const;  ///< (escaped + capped) / N.
  /// Capped fraction above 1%.
  bool cap_warning() const;
};

/// Drift (d+1-n) grad log D at x with known projection.
Vec walker_drift(const BoundarySet& boundary, const Vec& x, const Projection& proj, const WalkerParams& params);

/// Euler-Maruyama paths from x. Path i draws from its own generator seeded by
/// (seed, i), so the result does not depend on the thread count.
PathEnsemble sample_paths(const BoundarySet& boundary, const Vec& x, size_t count, std::uint64_t seed,
                          const WalkerParams& params = {});

/// Writes `path_id,y1..yn,steps` for absorbed paths.
void write_paths_csv(const PathEnsemble& ensemble, const std::string& path);

}  // namespace codim
