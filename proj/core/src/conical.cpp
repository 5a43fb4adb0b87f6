#include <algorithm>
#include <cmath>
#include <limits>

#include "codim/measure.hpp"
#include "codim/parallel.hpp"

namespace codim {

namespace {

void require_flat(const GridDomain& g, const char* what) {
  if (!g.boundary().is_flat()) throw PreconditionError(std::string(what) + " needs a field in flat coordinates");
}

// Index of the grid coordinate closest to v along one axis.
int axis_index(const GridDomain& g, double v) {
  return static_cast<int>(std::lround((v + g.half_width()) / g.spacing()));
}

// Calls f(idx) for every node whose per-axis indices lie in [lo_k, hi_k].
void for_each_in_index_box(const GridDomain& g, const std::array<int, kMaxDim>& lo, const std::array<int, kMaxDim>& hi,
                           const std::function<void(size_t)>& f) {
  const int n = g.dim();
  std::array<int, kMaxDim> mi = lo;
  for (int k = 0; k < n; ++k)
    if (lo[static_cast<size_t>(k)] > hi[static_cast<size_t>(k)]) return;
  while (true) {
    f(g.linear_index(mi));
    int k = n - 1;
    while (k >= 0 && mi[static_cast<size_t>(k)] == hi[static_cast<size_t>(k)]) {
      mi[static_cast<size_t>(k)] = lo[static_cast<size_t>(k)];
      --k;
    }
    if (k < 0) return;
    ++mi[static_cast<size_t>(k)];
  }
}

struct ColumnNode {
  double s;  // |t|
  double grad2;
  double abs_u;
  double grad;
};

// Trilinear interpolation in which tube nodes take the value of the linear
// closure profile g + (u_i - g) delta_j / delta_i seen from the free nodes of
// the stencil, not the data g they hold (which sits at delta = 0).
double interpolate_across_tube(const ScalarField& u, const Vec& x) {
  const GridDomain& g = *u.grid;
  const auto stencil = interpolation_stencil(g, x);
  double free_weight = 0.0;
  for (const auto& [j, w] : stencil)
    if (g.node_class(j) != NodeClass::GammaTube) free_weight += w;
  double v = 0.0;
  for (const auto& [j, w] : stencil) {
    if (g.node_class(j) != NodeClass::GammaTube || free_weight <= 0.0) {
      v += w * u[j];
      continue;
    }
    double profile = 0.0;
    for (const auto& [i, wi] : stencil)
      if (g.node_class(i) != NodeClass::GammaTube) profile += wi * (u[j] + (u[i] - u[j]) * g.delta(j) / g.delta(i));
    v += w * profile / free_weight;
  }
  return v;
}

}  // namespace

ScalarField pull_back(const ScalarField& u, double kappa) {
  const GridDomain& g = *u.grid;
  const BoundarySet& b = g.boundary();
  if (b.is_flat()) return u;
  const BoundarySet plane = BoundarySet::flat(b.ambient_dim(), b.boundary_dim(),
                                              BoundaryOptions{b.window_radius(), b.quadrature_spacing()});
  auto flat = std::make_shared<GridDomain>(plane, GridSpec{g.half_width(), g.spacing(), g.eps_abs()});
  ScalarField out(flat);
  const double r = g.half_width();
  parallel_for(flat->size(), 1024, [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      const Vec x = rho_map(b, flat->position(i), kappa);
      bool inside = true;
      for (int k = 0; k < x.size(); ++k) inside = inside && std::abs(x[k]) <= r;
      out.values[i] = inside ? interpolate_across_tube(u, x) : std::numeric_limits<double>::quiet_NaN();
    }
  });
  return out;
}

double SquareFunctionResult::ratio(NontangentialVariant v) const {
  const double den = (v == NontangentialVariant::Gradient ? n_grad_norm2 : n_u_norm2) + trace_norm2;
  if (den == 0.0) return s_norm2 == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return s_norm2 / den;
}

SquareFunctionResult square_function(const ScalarField& u, const Vec& q_center, double side, double aperture) {
  const GridDomain& g = *u.grid;
  require_flat(g, "square function");
  const int n = g.dim();
  const int d = g.boundary().boundary_dim();
  const double h = g.spacing();
  if (side < 2.0 * h) throw ResolutionError("cube side below two grid spacings: the cone holds no cells");
  if (!(aperture >= 1.0)) throw InvalidArgument("wide-cone aperture must be at least 1");
  const int m = g.points_per_axis();
  const int zero = axis_index(g, 0.0);

  // Columns: parameter lattice points within reach of the cones of 2Q.
  std::array<int, kMaxDim> clo{}, chi{};
  const double reach = side + aperture * side;
  for (int k = 0; k < d; ++k) {
    clo[static_cast<size_t>(k)] = std::max(0, axis_index(g, q_center[k] - reach));
    chi[static_cast<size_t>(k)] = std::min(m - 1, axis_index(g, q_center[k] + reach));
  }
  const int tcount = static_cast<int>(std::ceil(side / h));
  for (int k = d; k < n; ++k) {
    clo[static_cast<size_t>(k)] = std::max(0, zero - tcount);
    chi[static_cast<size_t>(k)] = std::min(m - 1, zero + tcount);
  }
  std::array<int, kMaxDim> cdim{};
  size_t columns = 1;
  for (int k = 0; k < d; ++k) {
    cdim[static_cast<size_t>(k)] = chi[static_cast<size_t>(k)] - clo[static_cast<size_t>(k)] + 1;
    columns *= static_cast<size_t>(cdim[static_cast<size_t>(k)]);
  }
  auto column_of = [&](const std::array<int, kMaxDim>& mi) {
    size_t c = 0;
    for (int k = 0; k < d; ++k)
      c = c * static_cast<size_t>(cdim[static_cast<size_t>(k)]) +
          static_cast<size_t>(mi[static_cast<size_t>(k)] - clo[static_cast<size_t>(k)]);
    return c;
  };
  std::vector<std::vector<ColumnNode>> col(columns);
  for_each_in_index_box(g, clo, chi, [&](size_t i) {
    if (g.node_class(i) != NodeClass::Interior || std::isnan(u[i])) return;
    const Vec pos = g.position(i);
    const double s = norm(pos.slice(d, n - d));
    if (s >= side) return;
    const double grad = norm(grad_at(u, i));
    if (std::isnan(grad)) return;
    col[column_of(g.multi_index(i))].push_back({s, grad * grad, std::abs(u[i]), grad});
  });
  // Sorted by decreasing |s| with running maxima, for the wide-cone suprema.
  std::vector<std::vector<double>> run_grad(columns), run_u(columns), heights(columns);
  for (size_t c = 0; c < columns; ++c) {
    auto& v = col[c];
    std::sort(v.begin(), v.end(), [](const ColumnNode& a, const ColumnNode& b) { return a.s > b.s; });
    double mg = 0.0, mu = 0.0;
    for (const ColumnNode& e : v) {
      mg = std::max(mg, e.grad);
      mu = std::max(mu, e.abs_u);
      run_grad[c].push_back(mg);
      run_u[c].push_back(mu);
      heights[c].push_back(e.s);
    }
  }

  auto column_param = [&](size_t c) {
    Vec y(d);
    size_t rem = c;
    for (int k = d - 1; k >= 0; --k) {
      const size_t dimk = static_cast<size_t>(cdim[static_cast<size_t>(k)]);
      y[k] = -g.half_width() + h * static_cast<double>(static_cast<size_t>(clo[static_cast<size_t>(k)]) + rem % dimk);
      rem /= dimk;
    }
    return y;
  };
  std::vector<Vec> col_y(columns);
  for (size_t c = 0; c < columns; ++c) col_y[c] = column_param(c);

  // Lattice points of Q and 2Q on the plane.
  auto lattice_points = [&](double half) {
    std::array<int, kMaxDim> lo{}, hi{};
    for (int k = 0; k < d; ++k) {
      lo[static_cast<size_t>(k)] = std::max(0, static_cast<int>(std::ceil((q_center[k] - half + g.half_width()) / h - 1e-9)));
      hi[static_cast<size_t>(k)] =
          std::min(m - 1, static_cast<int>(std::floor((q_center[k] + half + g.half_width()) / h + 1e-9)));
    }
    for (int k = d; k < n; ++k) lo[static_cast<size_t>(k)] = hi[static_cast<size_t>(k)] = zero;
    std::vector<size_t> out;
    for_each_in_index_box(g, lo, hi, [&](size_t i) { out.push_back(i); });
    return out;
  };
  const std::vector<size_t> q_nodes = lattice_points(0.5 * side);
  const std::vector<size_t> q2_nodes = lattice_points(side);
  const double hd = std::pow(h, d), hn = std::pow(h, n);

  SquareFunctionResult res;
  res.s_values.resize(q_nodes.size());
  parallel_for(q_nodes.size(), 1, [&](size_t lo, size_t hi) {
    for (size_t a = lo; a < hi; ++a) {
      const Vec x = g.position(q_nodes[a]).slice(0, d);
      double s2 = 0.0;
      for (size_t c = 0; c < columns; ++c) {
        const double dy = norm(col_y[c] - x);
        if (dy >= side) continue;
        for (const ColumnNode& e : col[c]) {
          if (e.s < dy) break;
          const double dist2 = dy * dy + e.s * e.s;
          s2 += e.grad2 * hn / std::pow(dist2, 0.5 * (n - 2));
        }
      }
      res.s_values[a] = std::sqrt(s2);
    }
  });
  for (size_t a = 0; a < q_nodes.size(); ++a) {
    res.s_norm2 += res.s_values[a] * res.s_values[a] * hd;
    const double tr = u[q_nodes[a]];
    if (!std::isnan(tr)) res.trace_norm2 += tr * tr * hd;
  }
  res.n_grad_values.resize(q2_nodes.size());
  res.n_u_values.resize(q2_nodes.size());
  for (size_t a = 0; a < q2_nodes.size(); ++a) {
    const Vec x = g.position(q2_nodes[a]).slice(0, d);
    double ng = 0.0, nu = 0.0;
    for (size_t c = 0; c < columns; ++c) {
      const double cutoff = norm(col_y[c] - x) / aperture;
      const auto& hs = heights[c];
      // Entries with s > cutoff form a prefix of the decreasing list.
      const auto it = std::partition_point(hs.begin(), hs.end(), [&](double s) { return s > cutoff; });
      const size_t count = static_cast<size_t>(it - hs.begin());
      if (count == 0) continue;
      ng = std::max(ng, run_grad[c][count - 1]);
      nu = std::max(nu, run_u[c][count - 1]);
    }
    res.n_grad_values[a] = ng;
    res.n_u_values[a] = nu;
    res.n_grad_norm2 += ng * ng * hd;
    res.n_u_norm2 += nu * nu * hd;
  }
  return res;
}

CarlesonResult carleson_norm(const GridDomain& g, const std::function<double(size_t)>& f,
                             std::span<const ParamRegion> boxes, double cutoff) {
  require_flat(g, "Carleson norm");
  const int n = g.dim();
  const int d = g.boundary().boundary_dim();
  const double h = g.spacing();
  if (cutoff <= 0.0) cutoff = g.eps_abs();
  const int m = g.points_per_axis();
  const int zero = axis_index(g, 0.0);
  CarlesonResult res;
  double worst_coarse = 0.0;
  for (size_t q = 0; q < boxes.size(); ++q) {
    const ParamRegion& box = boxes[q];
    const double l = box.hi[0] - box.lo[0];
    if (l <= 2.0 * cutoff) throw ResolutionError("box side does not exceed the doubled cutoff");
    std::array<int, kMaxDim> lo{}, hi{};
    for (int k = 0; k < d; ++k) {
      lo[static_cast<size_t>(k)] = std::max(0, static_cast<int>(std::ceil((box.lo[k] + g.half_width()) / h - 1e-9)));
      hi[static_cast<size_t>(k)] =
          std::min(m - 1, static_cast<int>(std::floor((box.hi[k] + g.half_width()) / h + 1e-9)));
    }
    const int tcount = static_cast<int>(std::ceil(l / h));
    for (int k = d; k < n; ++k) {
      lo[static_cast<size_t>(k)] = std::max(0, zero - tcount);
      hi[static_cast<size_t>(k)] = std::min(m - 1, zero + tcount);
    }
    std::vector<size_t> nodes;
    for_each_in_index_box(g, lo, hi, [&](size_t i) {
      const double s = norm(g.position(i).slice(d, n - d));
      if (s > cutoff && s < l) nodes.push_back(i);
    });
    std::vector<double> fine(nodes.size()), coarse(nodes.size());
    parallel_for(nodes.size(), 256, [&](size_t a, size_t b) {
      for (size_t k = a; k < b; ++k) {
        const size_t i = nodes[k];
        const double s = norm(g.position(i).slice(d, n - d));
        const double v = f(i);
        const double term = std::isnan(v) ? 0.0 : v * v * std::pow(h, n) / std::pow(s, n - d);
        fine[k] = term;
        coarse[k] = s > 2.0 * cutoff ? term : 0.0;
      }
    });
    double sf = 0.0, sc = 0.0;
    for (size_t k = 0; k < nodes.size(); ++k) {
      sf += fine[k];
      sc += coarse[k];
    }
    const double scale = std::pow(l, d);
    if (sf / scale > res.value || q == 0) {
      res.value = sf / scale;
      res.worst_box = q;
    }
    worst_coarse = std::max(worst_coarse, sc / scale);
  }
  res.coarse = worst_coarse;
  res.growth = res.coarse > 0.0 ? res.value / res.coarse : (res.value > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
  res.flagged = res.growth > 10.0;
  return res;
}

ScalarField t_gradient_field(const ScalarField& u) {
  const GridDomain& g = *u.grid;
  require_flat(g, "t-gradient field");
  const int d = g.boundary().boundary_dim();
  ScalarField out(u.grid);
  parallel_for(g.size(), 1024, [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      if (g.node_class(i) == NodeClass::GammaTube) continue;
      out.values[i] = norm(g.position(i).slice(d, g.dim() - d)) * norm(grad_at(u, i));
    }
  });
  return out;
}

}  // namespace codim
