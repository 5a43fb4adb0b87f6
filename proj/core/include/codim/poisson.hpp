#pragma once

// Half-space Poisson kernel of R^{d+1}_+. For the flat boundary the radial
// reduction turns L into the Laplacian in (x, |t|), so harmonic measure from
// (x, t) is the Poisson measure at height |t|. On graphs the same formula in
// graph coordinates (X_x, dist(X, Gamma)) supplies outer-boundary data.

#include "codim/fields.hpp"
#include "codim/solver.hpp"

namespace codim {

/// c_d s / (|x|^2 + s^2)^{(d+1)/2}, c_d = Gamma((d+1)/2) / pi^{(d+1)/2}.
double poisson_kernel(const Vec& x, double s);

/// Poisson measure of the interval [a, b] seen from (x, s), d = 1.
double poisson_interval(double x, double s, double a, double b);

/// Poisson integral of g at (x, s). Mollified box indicators use a closed
/// form per axis (exact product for d = 1, lattice sum otherwise); other data
/// are summed over the boundary parameter lattice.
double poisson_integral(const BoundarySet& boundary, const BoundaryData& g, const Vec& x, double s);

/// X -> poisson_integral(g, X_x, dist(X, Gamma)).
OuterData poisson_extension(const BoundarySet& boundary, const BoundaryData& g);

}  // namespace codim
