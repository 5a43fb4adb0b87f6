#include "codim/poisson.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "codim/quadrature.hpp"

namespace codim {
namespace {

// Poisson mass of [y, infinity) seen from (x, s).
double upper_tail(double x, double s, double y) { return 0.5 - std::atan((y - x) / s) / std::numbers::pi; }

// integral of P(x - y, s) S((y - a) / eta) dy = integral_{-1}^{1} S'(z) tail(a + eta z) dz.
double ramp_integral(double x, double s, double a, double eta) {
  static const quad::Rule rule = quad::gauss_legendre(16, 0.0, 0.25);
  double sum = 0.0;
  for (int panel = 0; panel < 8; ++panel) {
    const double lo = -1.0 + 0.25 * panel;
    for (size_t q = 0; q < rule.nodes.size(); ++q) {
      const double z = lo + rule.nodes[q];
      sum += rule.weights[q] * smooth_step_derivative(z) * upper_tail(x, s, a + eta * z);
    }
  }
  return sum;
}

}  // namespace

double poisson_kernel(const Vec& x, double s) {
  const int d = x.size();
  const double cd = std::tgamma(0.5 * (d + 1)) / std::pow(std::numbers::pi, 0.5 * (d + 1));
  return cd * s / std::pow(norm2(x) + s * s, 0.5 * (d + 1));
}

double poisson_interval(double x, double s, double a, double b) {
  return (std::atan((b - x) / s) - std::atan((a - x) / s)) / std::numbers::pi;
}

double poisson_integral(const BoundarySet& boundary, const BoundaryData& g, const Vec& x, double s) {
  if (g.is_constant()) return g.constant_value();
  const int d = boundary.boundary_dim();
  if (s <= 0.0) return g(x);
  if (d == 1 && g.kind() == DataKind::MollifiedIndicator) {
    const ParamRegion& e = g.region();
    const double eta = g.width();
    double a = 0.0, b = 0.0;
    if (e.shape == ParamRegion::Shape::Box) {
      a = e.lo[0];
      b = e.hi[0];
    } else if (e.radius >= eta) {
      a = e.center[0] - e.radius;
      b = e.center[0] + e.radius;
    } else {
      a = b = std::numeric_limits<double>::quiet_NaN();
    }
    if (!std::isnan(a)) return ramp_integral(x[0], s, a, eta) - ramp_integral(x[0], s, b, eta);
  }
  const double vol = std::pow(boundary.quadrature_spacing(), d);
  double sum = 0.0;
  for (const auto& node : boundary.quadrature()) {
    const double gv = g(node.param);
    if (gv != 0.0) sum += poisson_kernel(x - node.param, s) * gv * vol;
  }
  return sum;
}

OuterData poisson_extension(const BoundarySet& boundary, const BoundaryData& g) {
  auto b = std::make_shared<const BoundarySet>(boundary);
  return [b, g](const Vec& X) {
    const Projection p = project(*b, X);
    return poisson_integral(*b, g, X.slice(0, b->boundary_dim()), p.distance);
  };
}

}  // namespace codim
