#pragma once

// Structured grids over a box around the boundary, scalar fields on them,
// boundary data, weights and the weighted Sobolev / Poincare functionals.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "codim/geometry.hpp"

namespace codim {

enum class NodeClass : std::uint8_t { Interior = 0, GammaTube = 1, OuterShell = 2 };

const char* to_string(NodeClass c);

struct GridSpec {
  double half_width = 2.0;  ///< R: the box is [-R, R]^n.
  double spacing = 1.0 / 32.0;
  double eps_abs = 0.0;  ///< Tube radius; 0 selects 2h.
};

/// Vertex-centered grid: nodes at -R + i h, i = 0..N-1 with N = 2R/h + 1 per
/// axis, last axis fastest. Nodes with dist(X, Gamma) <= eps_abs form the
/// tube; remaining nodes on the box faces form the outer shell.
class GridDomain {
 public:
  GridDomain(const BoundarySet& boundary, const GridSpec& spec);

  int dim() const { return n_; }
  int points_per_axis() const { return m_; }
  size_t size() const { return cls_.size(); }
  double half_width() const { return r_; }
  double spacing() const { return h_; }
  double eps_abs() const { return eps_; }
  const BoundarySet& boundary() const { return *boundary_; }

  NodeClass node_class(size_t idx) const { return cls_[idx]; }
  /// dist(X, Gamma) at the node.
  double delta(size_t idx) const { return delta_[idx]; }
  /// Parameter of the nearest boundary point.
  Vec nearest_param(size_t idx) const;
  Vec position(size_t idx) const;
  /// Per-axis index (i1, ..., in).
  std::array<int, kMaxDim> multi_index(size_t idx) const;
  size_t linear_index(const std::array<int, kMaxDim>& mi) const;
  /// Linear offset of one step along `axis`.
  size_t stride(int axis) const { return strides_[static_cast<size_t>(axis)]; }
  /// Index of the node closest to X (clamped to the box).
  size_t nearest_node(const Vec& x) const;
  /// Calls f(idx) for every node inside the open ball B(center, r), in
  /// increasing index order.
  void for_each_in_ball(const Vec& center, double r, const std::function<void(size_t)>& f) const;
  size_t count(NodeClass c) const;

 private:
  std::shared_ptr<const BoundarySet> boundary_;
  int n_ = 0;
  int d_ = 0;
  int m_ = 0;
  double r_ = 0.0;
  double h_ = 0.0;
  double eps_ = 0.0;
  std::array<size_t, kMaxDim> strides_{};
  std::vector<NodeClass> cls_;
  std::vector<double> delta_;
  std::vector<double> param_;  // d entries per node
};

/// One value per grid node.
struct ScalarField {
  std::shared_ptr<const GridDomain> grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(std::shared_ptr<const GridDomain> g, double fill = 0.0)
      : grid(std::move(g)), values(grid->size(), fill) {}
  double operator[](size_t i) const { return values[i]; }
  double& operator[](size_t i) { return values[i]; }
  size_t size() const { return values.size(); }
};

/// Fills a field from a function of position.
ScalarField sample_field(std::shared_ptr<const GridDomain> grid, const std::function<double(const Vec&)>& f);

enum class DataKind { Continuous, MollifiedIndicator };

/// Region E in parameter space for indicator data.
struct ParamRegion {
  enum class Shape { Box, Ball } shape = Shape::Box;
  Vec lo, hi;     ///< Box corners.
  Vec center;     ///< Ball center.
  double radius = 0.0;
};

/// Smooth step: 0 for z <= -1, 1 for z >= 1, C^2 quintic in between.
double smooth_step(double z);
/// Derivative of smooth_step.
double smooth_step_derivative(double z);

/// Boundary data g on Gamma, as a function of the graph parameter.
class BoundaryData {
 public:
  static BoundaryData constant(double c);
  static BoundaryData function(std::function<double(const Vec&)> g, std::string name);
  /// 1 on the box shrunk by eta, 0 outside the box grown by eta. Per axis the
  /// profile is S((y-a)/eta) - S((y-b)/eta), so indicators of adjacent boxes
  /// of a tensor partition sum to the indicator of their union.
  static BoundaryData indicator_box(Vec lo, Vec hi, double eta);
  static BoundaryData indicator_ball(Vec center, double radius, double eta);
  /// a*f + b*g.
  static BoundaryData combine(double a, const BoundaryData& f, double b, const BoundaryData& g);

  double operator()(const Vec& param) const { return eval_(param); }
  DataKind kind() const { return kind_; }
  bool is_constant() const { return constant_; }
  double constant_value() const { return constant_value_; }
  /// Mollification width (0 for continuous data).
  double width() const { return eta_; }
  const ParamRegion& region() const { return region_; }
  const std::string& name() const { return name_; }
  /// Values at the boundary quadrature nodes.
  std::vector<double> node_values(const BoundarySet& boundary) const;

 private:
  std::function<double(const Vec&)> eval_;
  DataKind kind_ = DataKind::Continuous;
  bool constant_ = false;
  double constant_value_ = 0.0;
  double eta_ = 0.0;
  ParamRegion region_;
  std::string name_;
};

enum class WeightVariant { Geometric, Smoothed };

/// Geometric: w = delta^{d+1-n}. Smoothed: a = D_alpha^{d+1-n}. Tube nodes on
/// Gamma itself carry +infinity.
ScalarField build_weight(std::shared_ptr<const GridDomain> grid, WeightVariant variant, double alpha = 1.0);

struct EllipticityEstimate {
  double constant = 0.0;  ///< Smallest C1 with C1^-1 <= delta^{n-d-1} a <= C1.
  double min_ratio = 0.0;
  double max_ratio = 0.0;
};
/// Over interior and outer-shell nodes.
EllipticityEstimate ellipticity_check(const ScalarField& a);

/// Average of u over the grid nodes in B(gamma(param), r).
double trace(const ScalarField& u, const Vec& param, double r);
/// trace at r, r/2, r/4, ... (`levels` values) for extrapolation.
std::vector<double> trace_sequence(const ScalarField& u, const Vec& param, double r, int levels = 3);

/// Whitney-style extension: the sigma-weighted average of g over the
/// parameter ball of radius 2 delta(X) around the nearest boundary parameter,
/// blended to 0 between delta = R_Gamma/8 and R_Gamma/4.
ScalarField extend(std::shared_ptr<const GridDomain> grid, const BoundaryData& g);

/// Gradient of u at a node by centered differences, one-sided next to the
/// tube or the box edge.
Vec grad_at(const ScalarField& u, size_t idx);

struct RatioResult {
  double value = 0.0;
  bool violation = false;  ///< Zero denominator with nonzero numerator.
};

/// True if the boundary values of u, extrapolated linearly in delta from the
/// tube, stay within `tol` on B(gamma(param), r).
bool trace_vanishes(const ScalarField& u, const Vec& param, double r, double tol);

/// [avg_B |u|] / [r^{-d} int_B |grad u| w] for B = B(gamma(param), r).
RatioResult poincare_boundary_ratio(const ScalarField& u, const ScalarField& w, const Vec& param, double r);

/// {V^-1 int_B |u - u_B|^p w}^{1/p} / {r (V^-1 int_B |grad u|^2 w)^{1/2}},
/// V = int_B w, u_B the w-weighted mean, over interior nodes of B(x, r).
RatioResult poincare_weighted_ratio(const ScalarField& u, const ScalarField& w, const Vec& x, double r, double p);

struct SeminormResult {
  double value = 0.0;     ///< Double sum of |g(y)-g(z)|^2 / |y-z|^{d+1}.
  double excluded = 0.0;  ///< Estimate of the dropped near-diagonal part.
};
SeminormResult h_seminorm(const BoundarySet& boundary, const BoundaryData& g);

/// Sum over interior nodes of |grad u|^2 w h^n.
double w_energy(const ScalarField& u, const ScalarField& w);

/// `i1,...,in,class,value` rows plus a JSON sidecar `<path>.json` with the
/// grid metadata.
void write_field_csv(const ScalarField& u, const std::string& path);

}  // namespace codim
