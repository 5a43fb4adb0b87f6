#include "codim/solver.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <deque>
#include <limits>

#include "codim/parallel.hpp"

namespace codim {
namespace {

constexpr size_t kChunk = 8192;

double harmonic_mean(double a, double b) {
  if (std::isinf(a) && std::isinf(b)) return std::numeric_limits<double>::max();
  if (std::isinf(a)) return 2.0 * b;
  if (std::isinf(b)) return 2.0 * a;
  return 2.0 * a * b / (a + b);
}

double dot_free(const std::vector<double>& a, const std::vector<double>& b) {
  return parallel_sum(a.size(), kChunk, [&](size_t lo, size_t hi) {
    double s = 0.0;
    for (size_t i = lo; i < hi; ++i) s += a[i] * b[i];
    return s;
  });
}

}  // namespace

LinearSystem::LinearSystem(std::shared_ptr<const GridDomain> grid, const ScalarField& a, const AssemblyOptions& options)
    : grid_(std::move(grid)) {
  const GridDomain& g = *grid_;
  const size_t total = g.size();
  const int n = g.dim();
  free_.assign(total, 0);
  for (size_t i = 0; i < total; ++i) free_[i] = g.node_class(i) == NodeClass::Interior;
  free_count_ = static_cast<size_t>(std::count(free_.begin(), free_.end(), 1));
  data_.assign(total, 0.0);
  diag_.assign(total, 0.0);
  for (size_t i = 0; i < total; ++i)
    if (free_[i] && !(a[i] > 0.0 && std::isfinite(a[i])))
      throw InvalidArgument("coefficient must be positive and finite on interior nodes");

  for (int k = 0; k < n; ++k) {
    auto& f = faces_[static_cast<size_t>(k)];
    f.assign(total, 0.0);
    const size_t s = g.stride(k);
    parallel_for(total, kChunk, [&](size_t lo, size_t hi) {
      for (size_t i = lo; i < hi; ++i) {
        if (g.multi_index(i)[static_cast<size_t>(k)] + 1 >= g.points_per_axis()) continue;
        const size_t j = i + s;
        if (!free_[i] && !free_[j]) continue;
        double c = harmonic_mean(a[i], a[j]);
        if (options.closure == TubeClosure::Linear) {
          if (free_[i] && g.node_class(j) == NodeClass::GammaTube) c *= 1.0 - g.delta(j) / g.delta(i);
          if (free_[j] && g.node_class(i) == NodeClass::GammaTube) c *= 1.0 - g.delta(i) / g.delta(j);
        }
        f[i] = c;
      }
    });
  }
  for (int k = 0; k < n; ++k) {
    const auto& f = faces_[static_cast<size_t>(k)];
    const size_t s = g.stride(k);
    for (size_t i = 0; i < total; ++i) {
      if (f[i] == 0.0) continue;
      diag_[i] += f[i];
      diag_[i + s] += f[i];
    }
  }

  // Every free node must be connected to a constrained node.
  std::vector<char> reached(total, 0);
  std::deque<size_t> queue;
  for (size_t i = 0; i < total; ++i) {
    if (free_[i]) continue;
    reached[i] = 1;
    queue.push_back(i);
  }
  while (!queue.empty()) {
    const size_t i = queue.front();
    queue.pop_front();
    const auto mi = g.multi_index(i);
    for (int k = 0; k < n; ++k) {
      const size_t s = g.stride(k);
      const auto& f = faces_[static_cast<size_t>(k)];
      if (mi[static_cast<size_t>(k)] + 1 < g.points_per_axis() && f[i] > 0.0 && !reached[i + s]) {
        reached[i + s] = 1;
        queue.push_back(i + s);
      }
      if (mi[static_cast<size_t>(k)] > 0 && f[i - s] > 0.0 && !reached[i - s]) {
        reached[i - s] = 1;
        queue.push_back(i - s);
      }
    }
  }
  for (size_t i = 0; i < total; ++i)
    if (!reached[i]) throw SingularSystemError(fmt::format("free node {} is not connected to any constrained node", i));
}

void LinearSystem::set_dirichlet(const BoundaryData& g, const OuterData& g_out) {
  const GridDomain& gr = *grid_;
  parallel_for(data_.size(), kChunk, [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      switch (gr.node_class(i)) {
        case NodeClass::Interior: data_[i] = 0.0; break;
        case NodeClass::GammaTube: data_[i] = g(gr.nearest_param(i)); break;
        case NodeClass::OuterShell: data_[i] = g_out(gr.position(i)); break;
      }
    }
  });
}

void LinearSystem::set_dirichlet_values(std::vector<double> values) {
  if (values.size() != data_.size()) throw InvalidArgument("value vector does not match the grid");
  data_ = std::move(values);
  for (size_t i = 0; i < data_.size(); ++i)
    if (free_[i]) data_[i] = 0.0;
}

double LinearSystem::data_min() const {
  double m = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < data_.size(); ++i)
    if (!free_[i]) m = std::min(m, data_[i]);
  return m;
}

double LinearSystem::data_max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < data_.size(); ++i)
    if (!free_[i]) m = std::max(m, data_[i]);
  return m;
}

void LinearSystem::apply(const std::vector<double>& x, std::vector<double>& y) const {
  const GridDomain& g = *grid_;
  const int n = g.dim();
  y.resize(x.size());
  parallel_for(x.size(), kChunk, [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      if (!free_[i]) {
        y[i] = 0.0;
        continue;
      }
      double v = diag_[i] * x[i];
      for (int k = 0; k < n; ++k) {
        const auto& f = faces_[static_cast<size_t>(k)];
        const size_t s = g.stride(k);
        if (free_[i + s]) v -= f[i] * x[i + s];
        if (free_[i - s]) v -= f[i - s] * x[i - s];
      }
      y[i] = v;
    }
  });
}

std::vector<double> LinearSystem::rhs() const {
  const GridDomain& g = *grid_;
  const int n = g.dim();
  std::vector<double> b(data_.size(), 0.0);
  parallel_for(b.size(), kChunk, [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      if (!free_[i]) continue;
      double v = 0.0;
      for (int k = 0; k < n; ++k) {
        const auto& f = faces_[static_cast<size_t>(k)];
        const size_t s = g.stride(k);
        if (!free_[i + s]) v += f[i] * data_[i + s];
        if (!free_[i - s]) v += f[i - s] * data_[i - s];
      }
      b[i] = v;
    }
  });
  return b;
}

double LinearSystem::energy(const ScalarField& u) const {
  const GridDomain& g = *grid_;
  const int n = g.dim();
  const double scale = std::pow(g.spacing(), n - 2);
  return scale * parallel_sum(u.size(), kChunk, [&](size_t lo, size_t hi) {
           double e = 0.0;
           for (size_t i = lo; i < hi; ++i)
             for (int k = 0; k < n; ++k) {
               const double c = faces_[static_cast<size_t>(k)][i];
               if (c == 0.0) continue;
               const double du = u[i] - u[i + g.stride(k)];
               e += c * du * du;
             }
           return e;
         });
}

LinearSystem assemble(std::shared_ptr<const GridDomain> grid, const ScalarField& a, const BoundaryData& g,
                      const OuterData& g_out, const AssemblyOptions& options) {
  LinearSystem sys(std::move(grid), a, options);
  sys.set_dirichlet(g, g_out);
  return sys;
}

namespace {

// Jacobi-preconditioned CG for A x = b on free nodes; x holds the initial guess.
SolveStats pcg(const LinearSystem& sys, const std::vector<double>& b, std::vector<double>& x,
               const SolveOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const size_t total = b.size();
  SolveStats stats;
  const double bnorm = std::sqrt(dot_free(b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return stats;
  }
  std::vector<double> r(total), z(total), p(total), q(total);
  sys.apply(x, q);
  for (size_t i = 0; i < total; ++i) r[i] = sys.is_free(i) ? b[i] - q[i] : 0.0;
  auto precondition = [&] {
    parallel_for(total, kChunk, [&](size_t lo, size_t hi) {
      for (size_t i = lo; i < hi; ++i) z[i] = sys.is_free(i) ? r[i] / sys.diagonal(i) : 0.0;
    });
  };
  precondition();
  p = z;
  double rz = dot_free(r, z);
  double rnorm = std::sqrt(dot_free(r, r));
  int it = 0;
  while (rnorm > options.tol * bnorm && it < options.max_iterations) {
    sys.apply(p, q);
    const double alpha = rz / dot_free(p, q);
    parallel_for(total, kChunk, [&](size_t lo, size_t hi) {
      for (size_t i = lo; i < hi; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
    });
    precondition();
    const double rz_new = dot_free(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    parallel_for(total, kChunk, [&](size_t lo, size_t hi) {
      for (size_t i = lo; i < hi; ++i) p[i] = z[i] + beta * p[i];
    });
    rnorm = std::sqrt(dot_free(r, r));
    ++it;
  }
  stats.iterations = it;
  stats.residual = rnorm / bnorm;
  stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (rnorm > options.tol * bnorm)
    throw ConvergenceError(fmt::format("conjugate gradients did not reach {} in {} iterations", options.tol, it),
                           stats.residual, it);
  return stats;
}

}  // namespace

ScalarField solve(const LinearSystem& system, const SolveOptions& options, SolveStats* stats,
                  const ScalarField* initial) {
  const size_t total = system.grid().size();
  std::vector<double> x(total, 0.0);
  if (initial)
    for (size_t i = 0; i < total; ++i) x[i] = system.is_free(i) ? (*initial)[i] : 0.0;
  const SolveStats s = pcg(system, system.rhs(), x, options);
  if (stats) *stats = s;
  ScalarField u(system.grid_ptr());
  const auto& data = system.dirichlet_values();
  for (size_t i = 0; i < total; ++i) u.values[i] = system.is_free(i) ? x[i] : data[i];
  return u;
}

std::vector<std::pair<size_t, double>> interpolation_stencil(const GridDomain& grid, const Vec& x) {
  const int n = grid.dim();
  std::array<int, kMaxDim> base{};
  std::array<double, kMaxDim> frac{};
  for (int k = 0; k < n; ++k) {
    const double s = (x[k] + grid.half_width()) / grid.spacing();
    if (s < -1e-9 || s > grid.points_per_axis() - 1 + 1e-9) throw InvalidArgument("point outside the grid box");
    int i = static_cast<int>(std::floor(s + 1e-9));
    i = std::clamp(i, 0, grid.points_per_axis() - 1);
    double f = s - i;
    if (std::abs(f) < 1e-9) f = 0.0;
    if (i == grid.points_per_axis() - 1) f = 0.0;
    base[static_cast<size_t>(k)] = i;
    frac[static_cast<size_t>(k)] = f;
  }
  std::vector<std::pair<size_t, double>> out;
  for (int corner = 0; corner < (1 << n); ++corner) {
    std::array<int, kMaxDim> mi = base;
    double w = 1.0;
    for (int k = 0; k < n; ++k) {
      const bool up = (corner >> k) & 1;
      const double f = frac[static_cast<size_t>(k)];
      w *= up ? f : 1.0 - f;
      mi[static_cast<size_t>(k)] += up ? 1 : 0;
    }
    if (w == 0.0) continue;
    out.emplace_back(grid.linear_index(mi), w);
  }
  return out;
}

double interpolate(const ScalarField& u, const Vec& x) {
  double v = 0.0;
  for (const auto& [i, w] : interpolation_stencil(*u.grid, x)) v += w * u[i];
  return v;
}

AdjointWeights solve_adjoint(const LinearSystem& system, const Vec& x, const SolveOptions& options) {
  const GridDomain& g = system.grid();
  const size_t total = g.size();
  std::vector<double> e(total, 0.0);
  AdjointWeights out;
  // Constrained corners of the stencil contribute their own value directly.
  std::vector<double> direct(total, 0.0);
  for (const auto& [i, w] : interpolation_stencil(g, x)) {
    if (system.is_free(i)) e[i] += w;
    else direct[i] += w;
  }
  std::vector<double> z(total, 0.0);
  out.stats = pcg(system, e, z, options);
  const int n = g.dim();
  for (size_t j = 0; j < total; ++j) {
    if (system.is_free(j)) continue;
    double mu = direct[j];
    const auto mi = g.multi_index(j);
    for (int k = 0; k < n; ++k) {
      const size_t s = g.stride(k);
      if (mi[static_cast<size_t>(k)] + 1 < g.points_per_axis() && system.is_free(j + s))
        mu += system.face(j, k) * z[j + s];
      if (mi[static_cast<size_t>(k)] > 0 && system.is_free(j - s)) mu += system.face(j - s, k) * z[j - s];
    }
    if (mu != 0.0) out.weights.emplace_back(j, mu);
  }
  return out;
}

bool max_principle_check(const ScalarField& u, const LinearSystem& system, double tol) {
  const double lo = system.data_min(), hi = system.data_max();
  const double slack = tol * std::max(hi - lo, 1.0);
  for (double v : u.values)
    if (v < lo - slack || v > hi + slack) return false;
  return true;
}

double harnack_ratio(const ScalarField& u, const Vec& center, double r) {
  const GridDomain& g = *u.grid;
  bool ok = true;
  g.for_each_in_ball(center, 2.0 * r * (1.0 + 1e-12), [&](size_t i) {
    if (g.node_class(i) == NodeClass::GammaTube || !(u[i] > 0.0)) ok = false;
  });
  if (!ok) throw PreconditionError("harnack ratio needs u > 0 and no tube node on the doubled ball");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  g.for_each_in_ball(center, r * (1.0 + 1e-12), [&](size_t i) {
    lo = std::min(lo, u[i]);
    hi = std::max(hi, u[i]);
  });
  if (!(hi > 0.0)) throw ResolutionError("ball contains no grid nodes");
  return hi / lo;
}

}  // namespace codim
