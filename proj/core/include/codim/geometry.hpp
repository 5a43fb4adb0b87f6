#pragma once

// Boundary sets of codimension > 1 and the geometric functionals built on
// them: distance, the inverse-power smoothed distance, Ahlfors-regularity
// estimates, Harnack-chain tubes and the mollified graph map.

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "codim/types.hpp"

namespace codim {

enum class BoundaryKind { FlatPlane, LipschitzGraph };

/// Row-major (rows x cols) dense matrix of small size.
struct SmallMatrix {
  int rows = 0;
  int cols = 0;
  std::array<double, kMaxDim * kMaxDim> a{};
  double& operator()(int r, int c) { return a[static_cast<size_t>(r * cols + c)]; }
  double operator()(int r, int c) const { return a[static_cast<size_t>(r * cols + c)]; }
};

/// A map F : R^d -> R^{n-d} whose graph is the boundary.
class GraphFunction {
 public:
  virtual ~GraphFunction() = default;
  virtual int param_dim() const = 0;
  virtual int value_dim() const = 0;
  virtual Vec value(const Vec& x) const = 0;
  /// (n-d) x d Jacobian. The default uses centered differences.
  virtual SmallMatrix jacobian(const Vec& x) const;
  /// Declared (or exact) Lipschitz constant.
  virtual double lipschitz() const = 0;
  /// Half-width of the parameter cube where F is defined (infinite for
  /// analytic primitives).
  virtual double domain_radius() const { return std::numeric_limits<double>::infinity(); }
  virtual std::string describe() const = 0;
};

/// F(x) = A x + b.
class AffineGraph final : public GraphFunction {
 public:
  AffineGraph(SmallMatrix slope, Vec offset);
  int param_dim() const override { return slope_.cols; }
  int value_dim() const override { return slope_.rows; }
  Vec value(const Vec& x) const override;
  SmallMatrix jacobian(const Vec&) const override { return slope_; }
  double lipschitz() const override { return lipschitz_; }
  std::string describe() const override;

 private:
  SmallMatrix slope_;
  Vec offset_;
  double lipschitz_;
};

/// F(x) = (lambda / frequency) sin(frequency x_1) e_1.
class SinusoidalGraph final : public GraphFunction {
 public:
  SinusoidalGraph(int d, int codim, double lambda, double frequency);
  int param_dim() const override { return d_; }
  int value_dim() const override { return codim_; }
  Vec value(const Vec& x) const override;
  SmallMatrix jacobian(const Vec& x) const override;
  double lipschitz() const override { return lambda_; }
  std::string describe() const override;

 private:
  int d_, codim_;
  double lambda_, frequency_;
};

/// Zero-mean triangle wave of slope +-lambda in x_1, along e_1.
class SawtoothGraph final : public GraphFunction {
 public:
  SawtoothGraph(int d, int codim, double lambda, double period);
  int param_dim() const override { return d_; }
  int value_dim() const override { return codim_; }
  Vec value(const Vec& x) const override;
  SmallMatrix jacobian(const Vec& x) const override;
  double lipschitz() const override { return lambda_; }
  std::string describe() const override;

 private:
  int d_, codim_;
  double lambda_, period_;
};

/// F sampled on a regular tensor lattice, multilinear in between.
class SampledGraph final : public GraphFunction {
 public:
  /// `axes[k]` holds the sorted, equispaced lattice coordinates along x_k;
  /// `values` holds (n-d) components per lattice point, last axis fastest.
  SampledGraph(std::vector<std::vector<double>> axes, std::vector<double> values, int codim,
               double declared_lipschitz);
  /// Reads `x1,...,xd,F1,...,F(n-d)` CSV. A negative `declared_lipschitz`
  /// means "measure it from the samples".
  static std::shared_ptr<SampledGraph> from_csv(const std::string& path, int n, int d,
                                                double declared_lipschitz);
  int param_dim() const override { return static_cast<int>(axes_.size()); }
  int value_dim() const override { return codim_; }
  Vec value(const Vec& x) const override;
  double lipschitz() const override { return lipschitz_; }
  double domain_radius() const override { return domain_radius_; }
  std::string describe() const override;

 private:
  std::vector<std::vector<double>> axes_;
  std::vector<double> values_;
  int codim_;
  double lipschitz_;
  double domain_radius_;
};

/// One node of the surface quadrature for sigma = H^d restricted to the boundary.
struct QuadratureNode {
  Vec param;   ///< Parameter coordinates in R^d.
  Vec point;   ///< Image on the boundary in R^n.
  double weight;
};

struct BoundaryOptions {
  double window_radius = 16.0;          ///< R_Gamma: half-width of the quadrature window.
  double quadrature_spacing = 1.0 / 256.0;  ///< h_Gamma: parameter lattice spacing.
};

/// A d-dimensional Ahlfors-regular boundary in R^n (flat plane or Lipschitz
/// graph over the first d coordinates). Immutable after construction.
class BoundarySet {
 public:
  static BoundarySet flat(int n, int d, BoundaryOptions options = {});
  static BoundarySet graph(int n, std::shared_ptr<const GraphFunction> f, BoundaryOptions options = {});

  int ambient_dim() const { return n_; }
  int boundary_dim() const { return d_; }
  int codim() const { return n_ - d_; }
  BoundaryKind kind() const { return kind_; }
  bool is_flat() const { return kind_ == BoundaryKind::FlatPlane; }
  double lipschitz() const { return f_ ? f_->lipschitz() : 0.0; }
  const GraphFunction* graph_function() const { return f_.get(); }
  double window_radius() const { return window_radius_; }
  double quadrature_spacing() const { return spacing_; }
  /// Lattice points per parameter axis.
  int lattice_size() const { return lattice_size_; }
  std::span<const QuadratureNode> quadrature() const { return nodes_; }
  std::string describe() const;

  /// F(x) (zero for the flat plane).
  Vec graph_value(const Vec& param) const;
  SmallMatrix graph_jacobian(const Vec& param) const;
  /// gamma(x) = (x, F(x)).
  Vec lift(const Vec& param) const;
  /// Area factor sqrt(det(I + DF^T DF)).
  double area_factor(const Vec& param) const;
  /// Throws OutOfWindowError if `param` is outside the domain of a sampled graph.
  void check_domain(const Vec& param) const;

 private:
  BoundarySet() = default;
  void build_quadrature();

  int n_ = 0;
  int d_ = 0;
  BoundaryKind kind_ = BoundaryKind::FlatPlane;
  std::shared_ptr<const GraphFunction> f_;
  double window_radius_ = 0.0;
  double spacing_ = 0.0;
  int lattice_size_ = 0;
  std::vector<QuadratureNode> nodes_;
};

/// Nearest boundary point of X.
struct Projection {
  double distance = 0.0;
  Vec param;  ///< Parameter of the nearest point.
  Vec point;  ///< The nearest point in R^n.
};

/// Nearest point on the boundary. Flat: exact. Graph: lattice multistart over
/// the admissible parameter ball followed by damped Gauss-Newton; ties are
/// broken toward the smallest lattice index.
Projection project(const BoundarySet& boundary, const Vec& x);
/// Warm-started projection: Gauss-Newton from `hint`, falling back to the
/// multistart search when the local solve is not clearly the global one.
Projection project_from_hint(const BoundarySet& boundary, const Vec& x, const Vec& hint);
double distance(const BoundarySet& boundary, const Vec& x);

/// c_{d,alpha} = integral over R^d of (1+|z|^2)^{-(d+alpha)/2} dz
///            = pi^{d/2} Gamma(alpha/2) / Gamma((d+alpha)/2).
double flat_smoothed_constant(int d, double alpha);

enum class SmoothedRoute { Auto, Quadrature };

struct SmoothedDistanceOptions {
  double rel_tol = 1e-4;
  int max_depth = 30;
  /// Auto uses the closed form on flat planes and quadrature on graphs.
  SmoothedRoute route = SmoothedRoute::Auto;
};

/// D_alpha(X) = { integral_Gamma |X-y|^{-d-alpha} dsigma(y) }^{-1/alpha}.
double smoothed_distance(const BoundarySet& boundary, const Vec& x, double alpha,
                         const SmoothedDistanceOptions& options = {});

/// D_alpha together with grad log D_alpha (used for the diffusion drift).
struct SmoothedDistanceGradient {
  double value = 0.0;
  Vec grad_log;
};
/// `fast` replaces adaptive refinement by a fixed 8-point Gauss-Legendre rule
/// on each graded panel.
SmoothedDistanceGradient smoothed_distance_gradient(const BoundarySet& boundary, const Vec& x, double alpha,
                                                    bool fast = false);
/// Same, with the projection of x already known.
SmoothedDistanceGradient smoothed_distance_gradient(const BoundarySet& boundary, const Vec& x, double alpha,
                                                    const Projection& proj, bool fast = false);

/// sigma(B(x, r)) for x = gamma(center_param), summed from the quadrature with
/// fractional coverage of partially covered lattice cells.
double ball_surface_measure(const BoundarySet& boundary, const Vec& center_param, double r);

struct AhlforsSample {
  Vec center;  ///< Parameter of the center.
  double radius;
  double measure;
};

struct AhlforsEstimate {
  double dimension = 0.0;  ///< Least-squares slope of log sigma(B) against log r.
  double constant = 0.0;   ///< Smallest C0 with C0^-1 r^d <= sigma(B) <= C0 r^d on the sample.
  std::vector<AhlforsSample> samples;
  std::vector<AhlforsSample> empty_balls;  ///< Violations (sigma(B) = 0).
  bool ok() const { return empty_balls.empty(); }
};

/// Scales must lie in [10 h_Gamma, R_Gamma / 2].
AhlforsEstimate ahlfors_check(const BoundarySet& boundary, std::span<const Vec> centers,
                              std::span<const double> scales);

/// A segment [y1, y2] avoiding the boundary.
struct Tube {
  Vec y1;
  Vec y2;
  double clearance = 0.0;  ///< dist([y1, y2], Gamma).
  double threshold = 0.0;  ///< c Lambda^{-d/(n-d-1)} r.
  bool success = false;
};

struct HarnackChainOptions {
  double c = 1e-2;
  int random_candidates = 400;
  std::uint64_t seed = 1;
};

/// dist([y1, y2], Gamma).
double segment_clearance(const BoundarySet& boundary, const Vec& y1, const Vec& y2);

/// Searches y_i in B(x_i, r/2) maximizing the clearance of [y1, y2]
/// (randomized multistart plus pattern ascent). Requires dist(x_i) >= r and
/// |x1 - x2| <= lambda r.
Tube harnack_chain(const BoundarySet& boundary, const Vec& x1, const Vec& x2, double r, double lambda,
                   const HarnackChainOptions& options = {});

/// F mollified at scale s by a fixed compactly supported bump (F itself for s = 0).
Vec mollified_graph(const BoundarySet& boundary, const Vec& param, double s);

/// rho(x, t) = (x, F_{kappa |t|}(x) + t); identity on the flat plane.
Vec rho_map(const BoundarySet& boundary, const Vec& point, double kappa = 1.0);
/// Inverse of rho by fixed-point iteration on t.
Vec rho_inverse(const BoundarySet& boundary, const Vec& point, double kappa = 1.0);

}  // namespace codim
