#include "codim/fields.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numbers>

#include "codim/parallel.hpp"

namespace codim {

const char* to_string(NodeClass c) {
  switch (c) {
    case NodeClass::Interior: return "INTERIOR";
    case NodeClass::GammaTube: return "GAMMA_TUBE";
    case NodeClass::OuterShell: return "OUTER_SHELL";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Grid

GridDomain::GridDomain(const BoundarySet& boundary, const GridSpec& spec)
    : boundary_(std::make_shared<BoundarySet>(boundary)),
      n_(boundary.ambient_dim()),
      d_(boundary.boundary_dim()),
      r_(spec.half_width),
      h_(spec.spacing),
      eps_(spec.eps_abs > 0.0 ? spec.eps_abs : 2.0 * spec.spacing) {
  if (!(r_ > 0.0) || !(h_ > 0.0)) throw InvalidArgument("grid half-width and spacing must be positive");
  const double cells = 2.0 * r_ / h_;
  if (std::abs(cells - std::round(cells)) > 1e-9 * cells)
    throw InvalidArgument(fmt::format("grid spacing {} does not divide the box width {}", h_, 2.0 * r_));
  if (eps_ < 2.0 * h_ * (1.0 - 1e-12)) throw InvalidArgument("tube radius eps_abs must be at least 2h");
  m_ = static_cast<int>(std::lround(cells)) + 1;
  size_t total = 1;
  for (int k = n_ - 1; k >= 0; --k) {
    strides_[static_cast<size_t>(k)] = total;
    total *= static_cast<size_t>(m_);
  }
  if (total > (size_t{1} << 31)) throw InvalidArgument("grid too large");
  cls_.assign(total, NodeClass::Interior);
  delta_.assign(total, 0.0);
  param_.assign(total * static_cast<size_t>(d_), 0.0);

  parallel_for(total, 4096, [&](size_t b, size_t e) {
    for (size_t idx = b; idx < e; ++idx) {
      const Vec x = position(idx);
      const Projection p = project(*boundary_, x);
      delta_[idx] = p.distance;
      for (int k = 0; k < d_; ++k) param_[idx * static_cast<size_t>(d_) + static_cast<size_t>(k)] = p.param[k];
      const auto mi = multi_index(idx);
      bool face = false;
      for (int k = 0; k < n_; ++k) face = face || mi[static_cast<size_t>(k)] == 0 || mi[static_cast<size_t>(k)] == m_ - 1;
      if (p.distance <= eps_) cls_[idx] = NodeClass::GammaTube;
      else if (face) cls_[idx] = NodeClass::OuterShell;
    }
  });
}

Vec GridDomain::nearest_param(size_t idx) const {
  return Vec(std::span<const double>(param_.data() + idx * static_cast<size_t>(d_), static_cast<size_t>(d_)));
}

Vec GridDomain::position(size_t idx) const {
  Vec x(n_);
  for (int k = n_ - 1; k >= 0; --k) {
    x[k] = -r_ + h_ * static_cast<double>(idx % static_cast<size_t>(m_));
    idx /= static_cast<size_t>(m_);
  }
  return x;
}

std::array<int, kMaxDim> GridDomain::multi_index(size_t idx) const {
  std::array<int, kMaxDim> mi{};
  for (int k = n_ - 1; k >= 0; --k) {
    mi[static_cast<size_t>(k)] = static_cast<int>(idx % static_cast<size_t>(m_));
    idx /= static_cast<size_t>(m_);
  }
  return mi;
}

size_t GridDomain::linear_index(const std::array<int, kMaxDim>& mi) const {
  size_t idx = 0;
  for (int k = 0; k < n_; ++k) idx = idx * static_cast<size_t>(m_) + static_cast<size_t>(mi[static_cast<size_t>(k)]);
  return idx;
}

size_t GridDomain::nearest_node(const Vec& x) const {
  std::array<int, kMaxDim> mi{};
  for (int k = 0; k < n_; ++k)
    mi[static_cast<size_t>(k)] = std::clamp(static_cast<int>(std::lround((x[k] + r_) / h_)), 0, m_ - 1);
  return linear_index(mi);
}

void GridDomain::for_each_in_ball(const Vec& center, double r, const std::function<void(size_t)>& f) const {
  std::array<int, kMaxDim> lo{}, hi{}, mi{};
  for (int k = 0; k < n_; ++k) {
    lo[static_cast<size_t>(k)] = std::max(0, static_cast<int>(std::ceil((center[k] - r + r_) / h_ - 1e-12)));
    hi[static_cast<size_t>(k)] = std::min(m_ - 1, static_cast<int>(std::floor((center[k] + r + r_) / h_ + 1e-12)));
    if (lo[static_cast<size_t>(k)] > hi[static_cast<size_t>(k)]) return;
  }
  mi = lo;
  const double r2 = r * r;
  while (true) {
    double dist2 = 0.0;
    for (int k = 0; k < n_; ++k) {
      const double dx = -r_ + h_ * mi[static_cast<size_t>(k)] - center[k];
      dist2 += dx * dx;
    }
    if (dist2 < r2) f(linear_index(mi));
    int k = n_ - 1;
    while (k >= 0 && ++mi[static_cast<size_t>(k)] > hi[static_cast<size_t>(k)]) {
      mi[static_cast<size_t>(k)] = lo[static_cast<size_t>(k)];
      --k;
    }
    if (k < 0) break;
  }
}

size_t GridDomain::count(NodeClass c) const { return static_cast<size_t>(std::count(cls_.begin(), cls_.end(), c)); }

ScalarField sample_field(std::shared_ptr<const GridDomain> grid, const std::function<double(const Vec&)>& f) {
  ScalarField u(grid);
  parallel_for(u.size(), 4096, [&](size_t b, size_t e) {
    for (size_t i = b; i < e; ++i) u.values[i] = f(grid->position(i));
  });
  return u;
}

// ---------------------------------------------------------------------------
// Boundary data

double smooth_step(double z) {
  if (z <= -1.0) return 0.0;
  if (z >= 1.0) return 1.0;
  const double s = 0.5 * (z + 1.0);
  return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double smooth_step_derivative(double z) {
  if (z <= -1.0 || z >= 1.0) return 0.0;
  const double s = 0.5 * (z + 1.0);
  return 0.5 * 30.0 * s * s * (1.0 - s) * (1.0 - s);
}

BoundaryData BoundaryData::constant(double c) {
  BoundaryData g;
  g.eval_ = [c](const Vec&) { return c; };
  g.constant_ = true;
  g.constant_value_ = c;
  g.name_ = fmt::format("constant({})", c);
  return g;
}

BoundaryData BoundaryData::function(std::function<double(const Vec&)> f, std::string name) {
  BoundaryData g;
  g.eval_ = std::move(f);
  g.name_ = std::move(name);
  return g;
}

BoundaryData BoundaryData::indicator_box(Vec lo, Vec hi, double eta) {
  if (!(eta > 0.0)) throw InvalidArgument("mollification width must be positive");
  if (lo.size() != hi.size()) throw InvalidArgument("box corners differ in dimension");
  BoundaryData g;
  g.kind_ = DataKind::MollifiedIndicator;
  g.eta_ = eta;
  g.region_.shape = ParamRegion::Shape::Box;
  g.region_.lo = lo;
  g.region_.hi = hi;
  g.eval_ = [lo, hi, eta](const Vec& y) {
    double v = 1.0;
    for (int k = 0; k < lo.size(); ++k) v *= smooth_step((y[k] - lo[k]) / eta) - smooth_step((y[k] - hi[k]) / eta);
    return v;
  };
  std::string desc = "indicator[";
  for (int k = 0; k < lo.size(); ++k) desc += fmt::format("{}{}:{}", k ? "x" : "", lo[k], hi[k]);
  g.name_ = desc + fmt::format("; eta={}]", eta);
  return g;
}

BoundaryData BoundaryData::indicator_ball(Vec center, double radius, double eta) {
  if (!(eta > 0.0)) throw InvalidArgument("mollification width must be positive");
  BoundaryData g;
  g.kind_ = DataKind::MollifiedIndicator;
  g.eta_ = eta;
  g.region_.shape = ParamRegion::Shape::Ball;
  g.region_.center = center;
  g.region_.radius = radius;
  g.eval_ = [center, radius, eta](const Vec& y) { return smooth_step((radius - norm(y - center)) / eta); };
  g.name_ = fmt::format("indicator_ball[r={}; eta={}]", radius, eta);
  return g;
}

BoundaryData BoundaryData::combine(double a, const BoundaryData& f, double b, const BoundaryData& h) {
  BoundaryData g;
  g.eval_ = [a, b, fe = f.eval_, he = h.eval_](const Vec& y) { return a * fe(y) + b * he(y); };
  g.constant_ = f.constant_ && h.constant_;
  g.constant_value_ = a * f.constant_value_ + b * h.constant_value_;
  g.name_ = fmt::format("{}*{}+{}*{}", a, f.name_, b, h.name_);
  return g;
}

std::vector<double> BoundaryData::node_values(const BoundarySet& boundary) const {
  const auto nodes = boundary.quadrature();
  std::vector<double> out(nodes.size());
  for (size_t j = 0; j < nodes.size(); ++j) out[j] = eval_(nodes[j].param);
  return out;
}

// ---------------------------------------------------------------------------
// Weights

ScalarField build_weight(std::shared_ptr<const GridDomain> grid, WeightVariant variant, double alpha) {
  if (variant == WeightVariant::Smoothed && !(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  const BoundarySet& gamma = grid->boundary();
  const double expo = gamma.boundary_dim() + 1.0 - gamma.ambient_dim();
  const double flat_scale =
      variant == WeightVariant::Smoothed ? std::pow(flat_smoothed_constant(gamma.boundary_dim(), alpha), -1.0 / alpha)
                                         : 1.0;
  ScalarField w(grid);
  parallel_for(w.size(), 1024, [&](size_t b, size_t e) {
    for (size_t i = b; i < e; ++i) {
      const double delta = grid->delta(i);
      if (delta == 0.0) {
        if (grid->node_class(i) != NodeClass::GammaTube)
          throw ClassificationError("node at distance 0 is not classified as tube");
        w.values[i] = std::numeric_limits<double>::infinity();
        continue;
      }
      double dist = delta;
      if (variant == WeightVariant::Smoothed) {
        dist = gamma.is_flat() ? flat_scale * delta
                               : smoothed_distance_gradient(gamma, grid->position(i), alpha, true).value;
      }
      w.values[i] = std::pow(dist, expo);
    }
  });
  return w;
}

EllipticityEstimate ellipticity_check(const ScalarField& a) {
  const GridDomain& g = *a.grid;
  const double expo = g.dim() - g.boundary().boundary_dim() - 1.0;
  EllipticityEstimate est;
  est.min_ratio = std::numeric_limits<double>::infinity();
  est.max_ratio = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (g.node_class(i) == NodeClass::GammaTube || g.delta(i) == 0.0) continue;
    if (!(a[i] > 0.0) || !std::isfinite(a[i])) throw InvalidArgument("coefficient must be positive and finite");
    const double q = std::pow(g.delta(i), expo) * a[i];
    est.min_ratio = std::min(est.min_ratio, q);
    est.max_ratio = std::max(est.max_ratio, q);
  }
  est.constant = std::max(est.max_ratio, 1.0 / est.min_ratio);
  return est;
}

// ---------------------------------------------------------------------------
// Trace and extension

double trace(const ScalarField& u, const Vec& param, double r) {
  const GridDomain& g = *u.grid;
  if (r < 2.0 * g.spacing() * (1.0 - 1e-12)) throw ResolutionError("trace radius must be at least 2h");
  const Vec x = g.boundary().lift(param);
  double sum = 0.0;
  size_t count = 0;
  g.for_each_in_ball(x, r, [&](size_t i) {
    sum += u[i];
    ++count;
  });
  if (count == 0) throw ResolutionError("trace ball contains no grid nodes");
  return sum / static_cast<double>(count);
}

std::vector<double> trace_sequence(const ScalarField& u, const Vec& param, double r, int levels) {
  std::vector<double> out;
  for (int k = 0; k < levels; ++k, r *= 0.5) out.push_back(trace(u, param, r));
  return out;
}

namespace {

// Cumulative sums over the 1-D boundary lattice, linear inside each cell.
struct Prefix1D {
  double lo = 0.0, h = 0.0;
  std::vector<double> mass, gmass;

  Prefix1D(const BoundarySet& gamma, const std::vector<double>& gv) {
    const auto nodes = gamma.quadrature();
    lo = -gamma.window_radius();
    h = gamma.quadrature_spacing();
    mass.assign(nodes.size() + 1, 0.0);
    gmass.assign(nodes.size() + 1, 0.0);
    for (size_t j = 0; j < nodes.size(); ++j) {
      mass[j + 1] = mass[j] + nodes[j].weight;
      gmass[j + 1] = gmass[j] + nodes[j].weight * gv[j];
    }
  }
  std::pair<double, double> at(double y) const {
    const double s = std::clamp((y - lo) / h, 0.0, static_cast<double>(mass.size() - 1));
    const size_t k = std::min(static_cast<size_t>(s), mass.size() - 2);
    const double f = s - static_cast<double>(k);
    return {mass[k] + f * (mass[k + 1] - mass[k]), gmass[k] + f * (gmass[k + 1] - gmass[k])};
  }
};

}  // namespace

ScalarField extend(std::shared_ptr<const GridDomain> grid, const BoundaryData& g) {
  const BoundarySet& gamma = grid->boundary();
  const int d = gamma.boundary_dim();
  const double rg = gamma.window_radius();
  ScalarField out(grid);
  if (g.is_constant()) {
    for (size_t i = 0; i < out.size(); ++i)
      out.values[i] = g.constant_value() * (1.0 - smooth_step((grid->delta(i) - 3.0 * rg / 16.0) / (rg / 16.0)));
    return out;
  }
  const std::vector<double> gv = g.node_values(gamma);
  const auto nodes = gamma.quadrature();
  std::unique_ptr<Prefix1D> prefix;
  if (d == 1) prefix = std::make_unique<Prefix1D>(gamma, gv);

  auto average = [&](const Vec& p, double radius) -> double {
    if (d == 1) {
      const auto [m0, g0] = prefix->at(p[0] - radius);
      const auto [m1, g1] = prefix->at(p[0] + radius);
      if (m1 - m0 <= 0.0) return std::numeric_limits<double>::quiet_NaN();
      return (g1 - g0) / (m1 - m0);
    }
    double m = 0.0, s = 0.0;
    for (size_t j = 0; j < nodes.size(); ++j) {
      if (norm(nodes[j].param - p) < radius) {
        m += nodes[j].weight;
        s += nodes[j].weight * gv[j];
      }
    }
    return m > 0.0 ? s / m : std::numeric_limits<double>::quiet_NaN();
  };

  parallel_for(out.size(), 1024, [&](size_t b, size_t e) {
    for (size_t i = b; i < e; ++i) {
      const double delta = grid->delta(i);
      const Vec p = grid->nearest_param(i);
      const double blend = 1.0 - smooth_step((delta - 3.0 * rg / 16.0) / (rg / 16.0));
      if (blend == 0.0) continue;
      double v = delta == 0.0 ? g(p) : average(p, 2.0 * delta);
      if (std::isnan(v)) v = average(p, 4.0 * delta);
      if (std::isnan(v)) throw ResolutionError("extension ball contains no boundary quadrature nodes");
      out.values[i] = blend * v;
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Functionals

Vec grad_at(const ScalarField& u, size_t idx) {
  const GridDomain& g = *u.grid;
  const auto mi = g.multi_index(idx);
  const double h = g.spacing();
  Vec grad(g.dim());
  for (int k = 0; k < g.dim(); ++k) {
    const size_t s = g.stride(k);
    const int ik = mi[static_cast<size_t>(k)];
    const bool has_lo = ik > 0 && g.node_class(idx - s) != NodeClass::GammaTube;
    const bool has_hi = ik + 1 < g.points_per_axis() && g.node_class(idx + s) != NodeClass::GammaTube;
    if (has_lo && has_hi) grad[k] = (u[idx + s] - u[idx - s]) / (2.0 * h);
    else if (has_hi) grad[k] = (u[idx + s] - u[idx]) / h;
    else if (has_lo) grad[k] = (u[idx] - u[idx - s]) / h;
  }
  return grad;
}

bool trace_vanishes(const ScalarField& u, const Vec& param, double r, double tol) {
  const GridDomain& g = *u.grid;
  const Vec x = g.boundary().lift(param);
  // Checked at boundary quadrature nodes in the ball: the tube values near
  // each node are fitted by c0 + c1 delta and c0 is the boundary value.
  const double h = g.spacing();
  const auto nodes = g.boundary().quadrature();
  const size_t step = std::max<size_t>(1, static_cast<size_t>(h / g.boundary().quadrature_spacing()));
  for (size_t j = 0; j < nodes.size(); j += step) {
    if (norm(nodes[j].point - x) >= r) continue;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, sy = 0.0, sdy = 0.0;
    g.for_each_in_ball(nodes[j].point, g.eps_abs() + h, [&](size_t i) {
      if (g.node_class(i) != NodeClass::GammaTube) return;
      const double dl = g.delta(i);
      s0 += 1.0;
      s1 += dl;
      s2 += dl * dl;
      sy += u[i];
      sdy += dl * u[i];
    });
    if (s0 == 0.0) continue;
    const double det = s0 * s2 - s1 * s1;
    const double c0 = det > 1e-12 * s0 * s2 ? (s2 * sy - s1 * sdy) / det : sy / s0;
    if (std::abs(c0) > tol && std::abs(c0) > 1e-12) return false;
  }
  return true;
}

RatioResult poincare_boundary_ratio(const ScalarField& u, const ScalarField& w, const Vec& param, double r) {
  const GridDomain& g = *u.grid;
  const Vec x = g.boundary().lift(param);
  double abs_sum = 0.0, field_max = 0.0, grad_int = 0.0;
  size_t count = 0;
  const double vol = std::pow(g.spacing(), g.dim());
  g.for_each_in_ball(x, r, [&](size_t i) {
    abs_sum += std::abs(u[i]);
    ++count;
    field_max = std::max(field_max, std::abs(u[i]));
    if (g.node_class(i) == NodeClass::Interior) grad_int += norm(grad_at(u, i)) * w[i] * vol;
  });
  if (count == 0) throw ResolutionError("ball contains no grid nodes");
  if (!trace_vanishes(u, param, r, 1e-2 * field_max))
    throw PreconditionError("field does not vanish on the boundary inside the ball");
  RatioResult res;
  const double num = abs_sum / static_cast<double>(count);
  const double den = grad_int / std::pow(r, g.boundary().boundary_dim());
  if (den == 0.0) {
    res.violation = num != 0.0;
    res.value = num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return res;
  }
  res.value = num / den;
  return res;
}

RatioResult poincare_weighted_ratio(const ScalarField& u, const ScalarField& w, const Vec& x, double r, double p) {
  const GridDomain& g = *u.grid;
  const int n = g.dim();
  if (p < 1.0 || p > 2.0 * n / (n - 1.0) + 1e-12) throw InvalidArgument("exponent p outside [1, 2n/(n-1)]");
  std::vector<size_t> idx;
  g.for_each_in_ball(x, r, [&](size_t i) {
    if (g.node_class(i) == NodeClass::Interior) idx.push_back(i);
  });
  if (idx.empty()) throw ResolutionError("ball contains no interior grid nodes");
  double v = 0.0, mean = 0.0;
  for (size_t i : idx) {
    v += w[i];
    mean += w[i] * u[i];
  }
  mean /= v;
  double lp = 0.0, energy = 0.0;
  for (size_t i : idx) {
    lp += std::pow(std::abs(u[i] - mean), p) * w[i];
    energy += norm2(grad_at(u, i)) * w[i];
  }
  RatioResult res;
  const double num = std::pow(lp / v, 1.0 / p);
  const double den = r * std::sqrt(energy / v);
  const double negligible = 1e-10 * std::max(1.0, std::abs(mean));
  if (den == 0.0 || num <= negligible) {
    res.violation = den == 0.0 && num > negligible;
    res.value = res.violation ? std::numeric_limits<double>::infinity() : 0.0;
    return res;
  }
  res.value = num / den;
  return res;
}

SeminormResult h_seminorm(const BoundarySet& gamma, const BoundaryData& g) {
  SeminormResult res;
  if (g.is_constant()) return res;
  const int d = gamma.boundary_dim();
  const auto nodes = gamma.quadrature();
  const std::vector<double> gv = g.node_values(gamma);
  const double hg = gamma.quadrature_spacing();
  const double expo = 0.5 * (d + 1.0);
  std::vector<size_t> support;
  for (size_t j = 0; j < nodes.size(); ++j)
    if (gv[j] != 0.0) support.push_back(j);
  std::vector<char> in_support(nodes.size(), 0);
  for (size_t j : support) in_support[j] = 1;

  // Ordered pairs with at least one point in the support: pairs inside the
  // support once each, mixed pairs counted twice by symmetry.
  res.value = parallel_sum(support.size(), 64, [&](size_t b, size_t e) {
    double s = 0.0;
    for (size_t a = b; a < e; ++a) {
      const size_t j = support[a];
      for (size_t k = 0; k < nodes.size(); ++k) {
        if (k == j) continue;
        const double r2 = norm2(nodes[j].point - nodes[k].point);
        if (r2 < hg * hg * (1.0 - 1e-12)) continue;
        const double diff = gv[j] - gv[k];
        const double factor = in_support[k] ? 1.0 : 2.0;
        s += factor * diff * diff * std::pow(r2, -expo) * nodes[j].weight * nodes[k].weight;
      }
      // Far part beyond the window, where g vanishes (flat approximation).
      if (d == 1) {
        const double y = nodes[j].param[0], rg = gamma.window_radius();
        s += 2.0 * gv[j] * gv[j] * nodes[j].weight * (1.0 / (rg - y) + 1.0 / (rg + y));
      }
    }
    return s;
  });

  // Near-diagonal estimate: |grad g|^2 (1/d) |S^{d-1}| h_Gamma per unit sigma.
  const double sphere = 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
  for (size_t j = 0; j < nodes.size(); ++j) {
    double grad2 = 0.0;
    for (int k = 0; k < d; ++k) {
      Vec yp = nodes[j].param, ym = nodes[j].param;
      yp[k] += 0.5 * hg;
      ym[k] -= 0.5 * hg;
      const double dg = (g(yp) - g(ym)) / hg;
      grad2 += dg * dg;
    }
    res.excluded += grad2 * sphere / d * hg * nodes[j].weight;
  }
  return res;
}

double w_energy(const ScalarField& u, const ScalarField& w) {
  const GridDomain& g = *u.grid;
  const double vol = std::pow(g.spacing(), g.dim());
  return parallel_sum(u.size(), 4096, [&](size_t b, size_t e) {
    double s = 0.0;
    for (size_t i = b; i < e; ++i)
      if (g.node_class(i) == NodeClass::Interior) s += norm2(grad_at(u, i)) * w[i] * vol;
    return s;
  });
}

void write_field_csv(const ScalarField& u, const std::string& path) {
  const GridDomain& g = *u.grid;
  {
    auto out = fmt::output_file(path);
    std::string header;
    for (int k = 0; k < g.dim(); ++k) header += fmt::format("i{},", k + 1);
    out.print("{}class,value\n", header);
    for (size_t i = 0; i < u.size(); ++i) {
      const auto mi = g.multi_index(i);
      for (int k = 0; k < g.dim(); ++k) out.print("{},", mi[static_cast<size_t>(k)]);
      out.print("{},{:.17g}\n", to_string(g.node_class(i)), u[i]);
    }
  }
  nlohmann::ordered_json meta;
  meta["R"] = g.half_width();
  meta["h"] = g.spacing();
  meta["n"] = g.dim();
  meta["d"] = g.boundary().boundary_dim();
  meta["eps_abs"] = g.eps_abs();
  meta["points_per_axis"] = g.points_per_axis();
  meta["boundary"] = g.boundary().describe();
  std::ofstream(path + ".json") << meta.dump(2) << "\n";
}

}  // namespace codim
