#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace codim::quad {

/// Gauss-Legendre rule with `points` nodes mapped to [lo, hi].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Rule gauss_legendre(int points, double lo, double hi);

/// Result of an adaptive integral of a vector-valued integrand.
struct AdaptiveResult {
  std::vector<double> value;
  double error_estimate = 0.0;  ///< Max abs error estimate over components.
  bool converged = true;
};

/// Vector-valued integrand: writes `out.size()` components at x.
using VectorIntegrand = std::function<void(double x, std::span<double> out)>;

/// Adaptive Gauss-Kronrod (7/15) over [lo, hi] with bisection. Component 0
/// drives the stopping rule: |err| <= max(abs_tol, rel_tol * |I_0|).
AdaptiveResult adaptive_gk15(const VectorIntegrand& f, size_t components, double lo, double hi,
                             double rel_tol, double abs_tol, int max_depth);

/// Same over consecutive panels [b_0,b_1], [b_1,b_2], ... with a shared
/// relative tolerance on the total.
AdaptiveResult adaptive_panels(const VectorIntegrand& f, size_t components,
                               std::span<const double> breaks, double rel_tol, int max_depth);

/// Panel breaks graded geometrically away from `center` at base width `scale`
/// (ratio 2), clipped to [lo, hi]. The innermost panel is [center-scale, center+scale].
std::vector<double> graded_breaks(double center, double scale, double lo, double hi);

}  // namespace codim::quad
