#include "codim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "codim/quadrature.hpp"

namespace codim {

// ---------------------------------------------------------------------------
// Graph primitives

SmallMatrix GraphFunction::jacobian(const Vec& x) const {
  SmallMatrix j;
  j.rows = value_dim();
  j.cols = param_dim();
  const double step = 1e-6;
  for (int c = 0; c < j.cols; ++c) {
    Vec xp = x, xm = x;
    xp[c] += step;
    xm[c] -= step;
    const double lim = domain_radius();
    if (std::isfinite(lim)) {
      xp[c] = std::min(xp[c], lim);
      xm[c] = std::max(xm[c], -lim);
    }
    Vec fp = value(xp), fm = value(xm);
    for (int r = 0; r < j.rows; ++r) j(r, c) = (fp[r] - fm[r]) / (xp[c] - xm[c]);
  }
  return j;
}

namespace {
double spectral_norm(const SmallMatrix& a) {
  // Power iteration on A^T A.
  Vec v(a.cols, 1.0);
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vec av(a.rows);
    for (int r = 0; r < a.rows; ++r)
      for (int c = 0; c < a.cols; ++c) av[r] += a(r, c) * v[c];
    Vec atav(a.cols);
    for (int c = 0; c < a.cols; ++c)
      for (int r = 0; r < a.rows; ++r) atav[c] += a(r, c) * av[r];
    const double nrm = norm(atav);
    if (nrm == 0.0) return 0.0;
    lambda = nrm / std::max(norm(v), 1e-300);
    v = atav * (1.0 / nrm);
  }
  return std::sqrt(lambda);
}
}  // namespace

AffineGraph::AffineGraph(SmallMatrix slope, Vec offset)
    : slope_(slope), offset_(offset), lipschitz_(spectral_norm(slope)) {
  if (offset_.size() != slope_.rows) throw InvalidArgument("affine graph: offset size must equal n-d");
}

Vec AffineGraph::value(const Vec& x) const {
  Vec out = offset_;
  for (int r = 0; r < slope_.rows; ++r)
    for (int c = 0; c < slope_.cols; ++c) out[r] += slope_(r, c) * x[c];
  return out;
}

std::string AffineGraph::describe() const { return fmt::format("affine(lipschitz={:.6g})", lipschitz_); }

SinusoidalGraph::SinusoidalGraph(int d, int codim, double lambda, double frequency)
    : d_(d), codim_(codim), lambda_(lambda), frequency_(frequency) {
  if (lambda < 0.0 || frequency <= 0.0) throw InvalidArgument("sinusoidal graph: need lambda >= 0, frequency > 0");
}

Vec SinusoidalGraph::value(const Vec& x) const {
  Vec out(codim_);
  out[0] = lambda_ / frequency_ * std::sin(frequency_ * x[0]);
  return out;
}

SmallMatrix SinusoidalGraph::jacobian(const Vec& x) const {
  SmallMatrix j;
  j.rows = codim_;
  j.cols = d_;
  j(0, 0) = lambda_ * std::cos(frequency_ * x[0]);
  return j;
}

std::string SinusoidalGraph::describe() const {
  return fmt::format("sinusoidal(lambda={:.6g},frequency={:.6g})", lambda_, frequency_);
}

SawtoothGraph::SawtoothGraph(int d, int codim, double lambda, double period)
    : d_(d), codim_(codim), lambda_(lambda), period_(period) {
  if (lambda < 0.0 || period <= 0.0) throw InvalidArgument("sawtooth graph: need lambda >= 0, period > 0");
}

Vec SawtoothGraph::value(const Vec& x) const {
  Vec out(codim_);
  const double u = x[0] - period_ * std::floor(x[0] / period_);  // [0, P)
  out[0] = lambda_ * (period_ / 4.0 - std::abs(u - period_ / 2.0));
  return out;
}

SmallMatrix SawtoothGraph::jacobian(const Vec& x) const {
  SmallMatrix j;
  j.rows = codim_;
  j.cols = d_;
  const double u = x[0] - period_ * std::floor(x[0] / period_);
  j(0, 0) = u < period_ / 2.0 ? lambda_ : -lambda_;
  return j;
}

std::string SawtoothGraph::describe() const {
  return fmt::format("sawtooth(lambda={:.6g},period={:.6g})", lambda_, period_);
}

SampledGraph::SampledGraph(std::vector<std::vector<double>> axes, std::vector<double> values, int codim,
                           double declared_lipschitz)
    : axes_(std::move(axes)), values_(std::move(values)), codim_(codim) {
  size_t total = 1;
  domain_radius_ = std::numeric_limits<double>::infinity();
  for (const auto& ax : axes_) {
    if (ax.size() < 2) throw InvalidArgument("sampled graph: each axis needs at least two samples");
    total *= ax.size();
    domain_radius_ = std::min({domain_radius_, -ax.front(), ax.back()});
  }
  if (domain_radius_ <= 0.0) throw InvalidArgument("sampled graph: lattice must contain the origin in its interior");
  if (values_.size() != total * static_cast<size_t>(codim_))
    throw InvalidArgument("sampled graph: value count does not match lattice");
  if (declared_lipschitz >= 0.0) {
    lipschitz_ = declared_lipschitz;
    return;
  }
  // Largest difference quotient between lattice neighbors.
  lipschitz_ = 0.0;
  const int d = param_dim();
  std::vector<size_t> stride(static_cast<size_t>(d), 1);
  for (int k = d - 2; k >= 0; --k) stride[k] = stride[k + 1] * axes_[k + 1].size();
  for (size_t idx = 0; idx < total; ++idx) {
    for (int k = 0; k < d; ++k) {
      const size_t ik = (idx / stride[k]) % axes_[k].size();
      if (ik + 1 >= axes_[k].size()) continue;
      const size_t jdx = idx + stride[k];
      double diff2 = 0.0;
      for (int c = 0; c < codim_; ++c) {
        const double df = values_[jdx * codim_ + c] - values_[idx * codim_ + c];
        diff2 += df * df;
      }
      lipschitz_ = std::max(lipschitz_, std::sqrt(diff2) / (axes_[k][ik + 1] - axes_[k][ik]));
    }
  }
}

std::shared_ptr<SampledGraph> SampledGraph::from_csv(const std::string& path, int n, int d,
                                                     double declared_lipschitz) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open sampled graph CSV: " + path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty sampled graph CSV: " + path);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const int codim = n - d;
  if (static_cast<int>(header.size()) != n) throw InvalidArgument(fmt::format("{}: expected {} columns", path, n));
  for (int k = 0; k < d; ++k)
    if (header[static_cast<size_t>(k)] != fmt::format("x{}", k + 1))
      throw InvalidArgument(fmt::format("{}: column {} must be x{}", path, k + 1, k + 1));
  for (int k = 0; k < codim; ++k)
    if (header[static_cast<size_t>(d + k)] != fmt::format("F{}", k + 1))
      throw InvalidArgument(fmt::format("{}: column {} must be F{}", path, d + k + 1, k + 1));

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != n)
      throw InvalidArgument(fmt::format("{}:{}: expected {} values", path, line_no, n));
    rows.push_back(std::move(row));
  }
  std::vector<std::vector<double>> axes(static_cast<size_t>(d));
  for (int k = 0; k < d; ++k) {
    auto& ax = axes[static_cast<size_t>(k)];
    for (const auto& r : rows) ax.push_back(r[static_cast<size_t>(k)]);
    std::sort(ax.begin(), ax.end());
    ax.erase(std::unique(ax.begin(), ax.end()), ax.end());
    for (size_t i = 2; i < ax.size(); ++i)
      if (std::abs((ax[i] - ax[i - 1]) - (ax[1] - ax[0])) > 1e-9 * (1.0 + std::abs(ax[1] - ax[0])))
        throw InvalidArgument(fmt::format("{}: axis x{} is not equispaced", path, k + 1));
  }
  size_t total = 1;
  for (const auto& ax : axes) total *= ax.size();
  if (rows.size() != total) throw InvalidArgument(fmt::format("{}: lattice is incomplete", path));
  std::vector<double> values(total * static_cast<size_t>(codim), 0.0);
  for (const auto& r : rows) {
    size_t idx = 0;
    for (int k = 0; k < d; ++k) {
      const auto& ax = axes[static_cast<size_t>(k)];
      const size_t ik = static_cast<size_t>(std::lower_bound(ax.begin(), ax.end(), r[static_cast<size_t>(k)]) - ax.begin());
      idx = idx * ax.size() + ik;
    }
    for (int c = 0; c < codim; ++c) values[idx * codim + c] = r[static_cast<size_t>(d + c)];
  }
  return std::make_shared<SampledGraph>(std::move(axes), std::move(values), codim, declared_lipschitz);
}

Vec SampledGraph::value(const Vec& x) const {
  const int d = param_dim();
  std::array<size_t, kMaxDim> base{};
  std::array<double, kMaxDim> frac{};
  for (int k = 0; k < d; ++k) {
    const auto& ax = axes_[static_cast<size_t>(k)];
    if (x[k] < ax.front() - 1e-12 || x[k] > ax.back() + 1e-12)
      throw OutOfWindowError(fmt::format("parameter {} outside sampled window [{}, {}]", x[k], ax.front(), ax.back()));
    const double step = ax[1] - ax[0];
    double pos = (x[k] - ax.front()) / step;
    size_t i = static_cast<size_t>(std::clamp(std::floor(pos), 0.0, static_cast<double>(ax.size() - 2)));
    base[k] = i;
    frac[k] = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
  }
  Vec out(codim_);
  for (int corner = 0; corner < (1 << d); ++corner) {
    double w = 1.0;
    size_t idx = 0;
    for (int k = 0; k < d; ++k) {
      const bool up = (corner >> k) & 1;
      w *= up ? frac[k] : 1.0 - frac[k];
      idx = idx * axes_[static_cast<size_t>(k)].size() + base[k] + (up ? 1 : 0);
    }
    if (w == 0.0) continue;
    for (int c = 0; c < codim_; ++c) out[c] += w * values_[idx * codim_ + c];
  }
  return out;
}

std::string SampledGraph::describe() const {
  return fmt::format("sampled(points={},lipschitz={:.6g})", values_.size() / static_cast<size_t>(codim_), lipschitz_);
}

// ---------------------------------------------------------------------------
// BoundarySet

namespace {
void validate_dims(int n, int d) {
  if (n < 3) throw InvalidArgument(fmt::format("ambient dimension n={} must be at least 3", n));
  if (n > kMaxDim) throw InvalidArgument(fmt::format("ambient dimension n={} exceeds {}", n, kMaxDim));
  if (d < 1) throw InvalidArgument(fmt::format("boundary dimension d={} must be at least 1", d));
  if (d >= n - 1)
    throw InvalidArgument(fmt::format("boundary dimension must satisfy d < n-1 (got d={}, n={})", d, n));
}
}  // namespace

BoundarySet BoundarySet::flat(int n, int d, BoundaryOptions options) {
  validate_dims(n, d);
  BoundarySet b;
  b.n_ = n;
  b.d_ = d;
  b.kind_ = BoundaryKind::FlatPlane;
  b.window_radius_ = options.window_radius;
  b.spacing_ = options.quadrature_spacing;
  b.build_quadrature();
  return b;
}

BoundarySet BoundarySet::graph(int n, std::shared_ptr<const GraphFunction> f, BoundaryOptions options) {
  if (!f) throw InvalidArgument("graph boundary needs a graph function");
  const int d = f->param_dim();
  validate_dims(n, d);
  if (f->value_dim() != n - d) throw InvalidArgument("graph function must map R^d to R^{n-d}");
  BoundarySet b;
  b.n_ = n;
  b.d_ = d;
  b.kind_ = BoundaryKind::LipschitzGraph;
  b.f_ = std::move(f);
  b.window_radius_ = std::min(options.window_radius, b.f_->domain_radius());
  b.spacing_ = options.quadrature_spacing;
  b.build_quadrature();
  return b;
}

void BoundarySet::build_quadrature() {
  if (!(window_radius_ > 0.0) || !(spacing_ > 0.0) || spacing_ > window_radius_)
    throw InvalidArgument("boundary window radius and quadrature spacing must be positive");
  lattice_size_ = static_cast<int>(std::lround(2.0 * window_radius_ / spacing_));
  spacing_ = 2.0 * window_radius_ / lattice_size_;
  size_t total = 1;
  for (int k = 0; k < d_; ++k) total *= static_cast<size_t>(lattice_size_);
  if (total > 50'000'000) throw InvalidArgument("boundary quadrature lattice too large; coarsen h_Gamma");
  nodes_.resize(total);
  const double cell = std::pow(spacing_, d_);
  for (size_t idx = 0; idx < total; ++idx) {
    Vec param(d_);
    size_t rem = idx;
    for (int k = d_ - 1; k >= 0; --k) {
      const size_t ik = rem % static_cast<size_t>(lattice_size_);
      rem /= static_cast<size_t>(lattice_size_);
      param[k] = -window_radius_ + (static_cast<double>(ik) + 0.5) * spacing_;
    }
    nodes_[idx] = QuadratureNode{param, lift(param), cell * area_factor(param)};
  }
}

std::string BoundarySet::describe() const {
  if (is_flat()) return fmt::format("flat(n={},d={})", n_, d_);
  return fmt::format("graph(n={},d={},{})", n_, d_, f_->describe());
}

Vec BoundarySet::graph_value(const Vec& param) const {
  if (!f_) return Vec(codim());
  return f_->value(param);
}

SmallMatrix BoundarySet::graph_jacobian(const Vec& param) const {
  if (!f_) {
    SmallMatrix j;
    j.rows = codim();
    j.cols = d_;
    return j;
  }
  return f_->jacobian(param);
}

Vec BoundarySet::lift(const Vec& param) const { return concat(param, graph_value(param)); }

double BoundarySet::area_factor(const Vec& param) const {
  if (!f_) return 1.0;
  const SmallMatrix j = f_->jacobian(param);
  // Gram matrix I + J^T J, determinant by Gaussian elimination.
  std::array<double, kMaxDim * kMaxDim> g{};
  for (int a = 0; a < d_; ++a)
    for (int b = 0; b < d_; ++b) {
      double s = a == b ? 1.0 : 0.0;
      for (int r = 0; r < j.rows; ++r) s += j(r, a) * j(r, b);
      g[static_cast<size_t>(a * d_ + b)] = s;
    }
  double det = 1.0;
  for (int c = 0; c < d_; ++c) {
    const double piv = g[static_cast<size_t>(c * d_ + c)];
    det *= piv;
    for (int r = c + 1; r < d_; ++r) {
      const double f = g[static_cast<size_t>(r * d_ + c)] / piv;
      for (int k = c; k < d_; ++k) g[static_cast<size_t>(r * d_ + k)] -= f * g[static_cast<size_t>(c * d_ + k)];
    }
  }
  return std::sqrt(det);
}

void BoundarySet::check_domain(const Vec& param) const {
  if (!f_) return;
  const double lim = f_->domain_radius();
  if (!std::isfinite(lim)) return;
  for (int k = 0; k < d_; ++k)
    if (std::abs(param[k]) > lim + 1e-12)
      throw OutOfWindowError(fmt::format("query parameter {} outside the sampled window of radius {}", param[k], lim));
}

// ---------------------------------------------------------------------------
// Projection

namespace {

double squared_gap(const BoundarySet& b, const Vec& xp, const Vec& xt, const Vec& y) {
  double s = 0.0;
  for (int i = 0; i < xp.size(); ++i) s += (y[i] - xp[i]) * (y[i] - xp[i]);
  const Vec f = b.graph_value(y);
  for (int k = 0; k < xt.size(); ++k) s += (f[k] - xt[k]) * (f[k] - xt[k]);
  return s;
}

// Solves the d x d system m z = rhs in place (partial pivoting).
bool solve_small(std::array<double, kMaxDim * kMaxDim>& m, Vec& rhs, int d) {
  for (int c = 0; c < d; ++c) {
    int piv = c;
    for (int r = c + 1; r < d; ++r)
      if (std::abs(m[static_cast<size_t>(r * d + c)]) > std::abs(m[static_cast<size_t>(piv * d + c)])) piv = r;
    if (std::abs(m[static_cast<size_t>(piv * d + c)]) < 1e-300) return false;
    if (piv != c) {
      for (int k = 0; k < d; ++k) std::swap(m[static_cast<size_t>(c * d + k)], m[static_cast<size_t>(piv * d + k)]);
      std::swap(rhs[c], rhs[piv]);
    }
    for (int r = c + 1; r < d; ++r) {
      const double f = m[static_cast<size_t>(r * d + c)] / m[static_cast<size_t>(c * d + c)];
      for (int k = c; k < d; ++k) m[static_cast<size_t>(r * d + k)] -= f * m[static_cast<size_t>(c * d + k)];
      rhs[r] -= f * rhs[c];
    }
  }
  for (int r = d - 1; r >= 0; --r) {
    double s = rhs[r];
    for (int k = r + 1; k < d; ++k) s -= m[static_cast<size_t>(r * d + k)] * rhs[k];
    rhs[r] = s / m[static_cast<size_t>(r * d + r)];
  }
  return true;
}

Vec clamp_to_domain(const BoundarySet& b, Vec y) {
  const GraphFunction* f = b.graph_function();
  if (!f) return y;
  const double lim = f->domain_radius();
  if (!std::isfinite(lim)) return y;
  for (int k = 0; k < y.size(); ++k) y[k] = std::clamp(y[k], -lim, lim);
  return y;
}

// Damped Newton on |y - xp|^2 + |F(y) - xt|^2. The residual-curvature term
// uses centered differences of the Jacobian; the Levenberg shift mu takes
// over when the full Hessian is indefinite.
Vec gauss_newton(const BoundarySet& b, const Vec& xp, const Vec& xt, Vec y, double& value) {
  const int d = xp.size();
  value = squared_gap(b, xp, xt, y);
  double mu = 0.0;
  for (int it = 0; it < 80; ++it) {
    const SmallMatrix j = b.graph_jacobian(y);
    const Vec f = b.graph_value(y);
    std::array<double, kMaxDim * kMaxDim> m{};
    Vec g(d);
    for (int a = 0; a < d; ++a) {
      g[a] = y[a] - xp[a];
      for (int r = 0; r < j.rows; ++r) g[a] += j(r, a) * (f[r] - xt[r]);
      for (int c = 0; c < d; ++c) {
        double s = (a == c ? 1.0 + mu : 0.0);
        for (int r = 0; r < j.rows; ++r) s += j(r, a) * j(r, c);
        m[static_cast<size_t>(a * d + c)] = s;
      }
    }
    for (int c = 0; c < d; ++c) {
      const double step = 1e-5 * (1.0 + std::abs(y[c]));
      Vec yp = y, ym = y;
      yp[c] += step;
      ym[c] -= step;
      const SmallMatrix jp = b.graph_jacobian(clamp_to_domain(b, yp));
      const SmallMatrix jm = b.graph_jacobian(clamp_to_domain(b, ym));
      for (int a = 0; a < d; ++a)
        for (int r = 0; r < j.rows; ++r)
          m[static_cast<size_t>(a * d + c)] += (f[r] - xt[r]) * (jp(r, a) - jm(r, a)) / (2.0 * step);
    }
    Vec step = g;
    if (!solve_small(m, step, d) || dot(step, g) <= 0.0) {
      mu = std::max(1e-4, mu * 10.0);
      if (mu > 1e8) break;
      continue;
    }
    Vec trial = clamp_to_domain(b, y - step);
    const double tv = squared_gap(b, xp, xt, trial);
    if (tv <= value) {
      const double moved = norm(trial - y);
      y = trial;
      const bool stalled = value - tv <= 1e-16 * value;
      value = tv;
      mu *= 0.3;
      if (moved <= 1e-14 * (1.0 + norm(y)) || stalled) break;
    } else {
      mu = std::max(1e-4, mu * 10.0);
      if (mu > 1e8) break;
    }
  }
  return y;
}

long long lattice_index(const BoundarySet& b, const Vec& y) {
  long long idx = 0;
  const int m = b.lattice_size();
  for (int k = 0; k < y.size(); ++k) {
    long long ik = static_cast<long long>(std::floor((y[k] + b.window_radius()) / b.quadrature_spacing()));
    ik = std::clamp<long long>(ik, 0, m - 1);
    idx = idx * m + ik;
  }
  return idx;
}

struct Candidate {
  double value;
  long long index;
  Vec y;
};

bool better(const Candidate& a, const Candidate& b) {
  const double tol = 1e-13 * (1.0 + std::max(a.value, b.value));
  if (std::abs(a.value - b.value) > tol) return a.value < b.value;
  return a.index < b.index;
}

Projection finish(const BoundarySet& b, const Vec& y, double value) {
  Projection p;
  p.distance = std::sqrt(std::max(value, 0.0));
  p.param = y;
  p.point = b.lift(y);
  return p;
}

Projection project_graph(const BoundarySet& b, const Vec& x) {
  const int d = b.boundary_dim();
  const Vec xp = x.slice(0, d);
  const Vec xt = x.slice(d, b.codim());
  b.check_domain(xp);
  const double delta0 = std::sqrt(squared_gap(b, xp, xt, xp));
  if (delta0 == 0.0) return finish(b, xp, 0.0);

  const int per_side = d == 1 ? 16 : (d == 2 ? 8 : 4);
  const int pts = 2 * per_side + 1;
  long long total = 1;
  for (int k = 0; k < d; ++k) total *= pts;
  // Values on the full lattice (infinite outside the admissible ball), so
  // that discrete local minima can seed one local solve per basin.
  std::vector<Candidate> grid(static_cast<size_t>(total));
  for (long long idx = 0; idx < total; ++idx) {
    Vec y(d);
    long long rem = idx;
    double r2 = 0.0;
    for (int k = d - 1; k >= 0; --k) {
      const long long ik = rem % pts;
      rem /= pts;
      const double off = delta0 * static_cast<double>(ik - per_side) / per_side;
      y[k] = xp[k] + off;
      r2 += off * off;
    }
    if (r2 > delta0 * delta0 * (1.0 + 1e-12)) {
      grid[static_cast<size_t>(idx)] = {std::numeric_limits<double>::infinity(), 0, y};
      continue;
    }
    y = clamp_to_domain(b, y);
    grid[static_cast<size_t>(idx)] = {squared_gap(b, xp, xt, y), lattice_index(b, y), y};
  }
  std::vector<Candidate> scan;
  for (long long idx = 0; idx < total; ++idx) {
    const Candidate& c = grid[static_cast<size_t>(idx)];
    if (!std::isfinite(c.value)) continue;
    bool local_min = true;
    long long stride = 1;
    for (int k = d - 1; k >= 0 && local_min; --k, stride *= pts) {
      const long long ik = (idx / stride) % pts;
      if (ik > 0 && grid[static_cast<size_t>(idx - stride)].value < c.value) local_min = false;
      if (ik + 1 < pts && grid[static_cast<size_t>(idx + stride)].value < c.value) local_min = false;
    }
    if (local_min) scan.push_back(c);
  }
  const size_t starts = std::min<size_t>(6, scan.size());
  std::partial_sort(scan.begin(), scan.begin() + static_cast<long>(starts), scan.end(), better);
  Candidate best{delta0 * delta0, lattice_index(b, xp), xp};
  for (size_t s = 0; s < starts; ++s) {
    double v = 0.0;
    Vec y = gauss_newton(b, xp, xt, scan[s].y, v);
    Candidate c{v, lattice_index(b, y), y};
    if (better(c, best)) best = c;
  }
  return finish(b, best.y, best.value);
}

}  // namespace

Projection project(const BoundarySet& boundary, const Vec& x) {
  if (x.size() != boundary.ambient_dim()) throw InvalidArgument("point dimension does not match boundary");
  if (boundary.is_flat()) {
    const int d = boundary.boundary_dim();
    Projection p;
    p.param = x.slice(0, d);
    p.point = boundary.lift(p.param);
    p.distance = norm(x.slice(d, boundary.codim()));
    return p;
  }
  return project_graph(boundary, x);
}

Projection project_from_hint(const BoundarySet& boundary, const Vec& x, const Vec& hint) {
  if (boundary.is_flat()) return project(boundary, x);
  const int d = boundary.boundary_dim();
  const Vec xp = x.slice(0, d);
  const Vec xt = x.slice(d, boundary.codim());
  boundary.check_domain(xp);
  double v1 = 0.0, v2 = 0.0;
  const Vec y1 = gauss_newton(boundary, xp, xt, clamp_to_domain(boundary, hint), v1);
  const Vec y2 = gauss_newton(boundary, xp, xt, xp, v2);
  if (norm(y1 - y2) > 1e-6 * (1.0 + std::sqrt(std::min(v1, v2)))) return project_graph(boundary, x);
  return v1 <= v2 ? finish(boundary, y1, v1) : finish(boundary, y2, v2);
}

double distance(const BoundarySet& boundary, const Vec& x) { return project(boundary, x).distance; }

// ---------------------------------------------------------------------------
// Smoothed distance

double flat_smoothed_constant(int d, double alpha) {
  return std::pow(std::numbers::pi, 0.5 * d) * std::tgamma(0.5 * alpha) / std::tgamma(0.5 * (d + alpha));
}

namespace {

// Integrates |X - gamma(y)|^{-(d+alpha)} J(y) (and optionally its gradient in
// X) over the parameter window plus the far-field tail.
struct KernelIntegral {
  std::vector<double> value;  // [I, dI/dX_1, ..., dI/dX_n]
  double error = 0.0;
  bool converged = true;
};

// r2^{-p}, avoiding pow for the common integer and half-integer exponents.
double inverse_power(double r2, double p) {
  if (p == 1.0) return 1.0 / r2;
  if (p == 1.5) return 1.0 / (r2 * std::sqrt(r2));
  if (p == 2.0) return 1.0 / (r2 * r2);
  return std::pow(r2, -p);
}

void kernel_at(const BoundarySet& b, const Vec& x, double alpha, const Vec& y, bool gradient,
               std::span<double> out, double weight) {
  const Vec g = b.lift(y);
  const Vec diff = x - g;
  const double r2 = norm2(diff);
  const double p = 0.5 * (b.boundary_dim() + alpha);
  const double base = inverse_power(r2, p) * b.area_factor(y) * weight;
  out[0] = base;
  if (gradient) {
    const double scale = -2.0 * p / r2 * base;
    for (int i = 0; i < diff.size(); ++i) out[static_cast<size_t>(1 + i)] = scale * diff[i];
  }
}

// 1-D tail over |y| > R using y = R / v, for analytic graphs. For sampled
// graphs the boundary beyond the window is continued by its edge value.
void tail_1d(const BoundarySet& b, const Vec& x, double alpha, bool gradient, bool fast, KernelIntegral& acc,
             double rel_tol) {
  const double r = b.window_radius();
  const size_t m = gradient ? 1 + static_cast<size_t>(b.ambient_dim()) : 1;
  const bool sampled = std::isfinite(b.graph_function() ? b.graph_function()->domain_radius()
                                                        : std::numeric_limits<double>::infinity());
  for (int side : {-1, 1}) {
    auto f = [&](double v, std::span<double> out) {
      const double y1 = side * r / v;
      const double jac = r / (v * v);
      Vec y{y1};
      if (sampled) {
        // Kernel against the edge-continued graph.
        const Vec edge = b.graph_value(Vec{side * r});
        Vec g = concat(y, edge);
        const Vec diff = x - g;
        const double r2 = norm2(diff);
        const double p = 0.5 * (1.0 + alpha);
        const double base = std::pow(r2, -p) * jac;
        out[0] = base;
        if (gradient)
          for (int i = 0; i < diff.size(); ++i) out[static_cast<size_t>(1 + i)] = -2.0 * p / r2 * base * diff[i];
        return;
      }
      kernel_at(b, x, alpha, y, gradient, out, jac);
    };
    if (fast) {
      std::vector<double> buf(m);
      static const quad::Rule tail_rules[] = {quad::gauss_legendre(8, 0.0, 0.25), quad::gauss_legendre(8, 0.25, 1.0)};
      for (const quad::Rule& rule : tail_rules) {
        for (size_t q = 0; q < rule.nodes.size(); ++q) {
          f(rule.nodes[q], buf);
          for (size_t k = 0; k < m; ++k) acc.value[k] += rule.weights[q] * buf[k];
        }
      }
    } else {
      const double breaks[] = {0.0, 0.125, 0.25, 0.5, 1.0};
      auto res = quad::adaptive_panels(f, m, breaks, rel_tol, 20);
      for (size_t k = 0; k < m; ++k) acc.value[k] += res.value[k];
      acc.error += res.error_estimate;
    }
  }
}

KernelIntegral integrate_kernel_1d(const BoundarySet& b, const Vec& x, double alpha, const Projection& proj,
                                   bool gradient, bool fast, double rel_tol, int max_depth) {
  const size_t m = gradient ? 1 + static_cast<size_t>(b.ambient_dim()) : 1;
  KernelIntegral acc;
  acc.value.assign(m, 0.0);
  const double r = b.window_radius();
  const double scale = std::max(proj.distance, 1e-12);
  const std::vector<double> breaks = quad::graded_breaks(proj.param[0], scale, -r, r);
  auto f = [&](double y, std::span<double> out) { kernel_at(b, x, alpha, Vec{y}, gradient, out, 1.0); };
  if (fast) {
    static const quad::Rule unit = quad::gauss_legendre(8, -1.0, 1.0);
    std::vector<double> buf(m);
    for (size_t i = 0; i + 1 < breaks.size(); ++i) {
      const double mid = 0.5 * (breaks[i] + breaks[i + 1]), rad = 0.5 * (breaks[i + 1] - breaks[i]);
      for (size_t q = 0; q < unit.nodes.size(); ++q) {
        f(mid + rad * unit.nodes[q], buf);
        for (size_t k = 0; k < m; ++k) acc.value[k] += rad * unit.weights[q] * buf[k];
      }
    }
  } else {
    auto res = quad::adaptive_panels(f, m, breaks, 0.25 * rel_tol, max_depth);
    acc.value = res.value;
    acc.error = res.error_estimate;
    acc.converged = res.converged;
  }
  tail_1d(b, x, alpha, gradient, fast, acc, 0.25 * rel_tol);
  return acc;
}

// Iterated adaptive integration over the parameter cube for d >= 2.
KernelIntegral integrate_kernel_nd(const BoundarySet& b, const Vec& x, double alpha, const Projection& proj,
                                   bool gradient, double rel_tol, int max_depth,
                                   const std::function<void(const Vec&, std::span<double>)>& kernel) {
  const int d = b.boundary_dim();
  const size_t m = gradient ? 1 + static_cast<size_t>(b.ambient_dim()) : 1;
  const double r = b.window_radius();
  const double scale = std::max(proj.distance, 1e-12);
  KernelIntegral acc;
  acc.value.assign(m, 0.0);
  Vec y(d);
  std::function<void(int, std::span<double>)> level = [&](int k, std::span<double> out) {
    const std::vector<double> breaks = quad::graded_breaks(proj.param[k], scale, -r, r);
    auto f = [&, k](double yk, std::span<double> inner) {
      y[k] = yk;
      if (k == d - 1) {
        kernel(y, inner);
      } else {
        level(k + 1, inner);
      }
    };
    auto res = quad::adaptive_panels(f, m, breaks, rel_tol, max_depth);
    for (size_t c = 0; c < m; ++c) out[c] = res.value[c];
    if (!res.converged) acc.converged = false;
    acc.error = std::max(acc.error, res.error_estimate);
  };
  level(0, acc.value);
  (void)x;
  (void)alpha;
  return acc;
}

KernelIntegral kernel_integral(const BoundarySet& b, const Vec& x, double alpha, const Projection& proj,
                               bool gradient, bool fast, double rel_tol, int max_depth) {
  if (b.boundary_dim() == 1) return integrate_kernel_1d(b, x, alpha, proj, gradient, fast, rel_tol, max_depth);
  const int d = b.boundary_dim();
  auto graph_kernel = [&](const Vec& y, std::span<double> out) { kernel_at(b, x, alpha, y, gradient, out, 1.0); };
  KernelIntegral acc = integrate_kernel_nd(b, x, alpha, proj, gradient, 0.25 * rel_tol, max_depth, graph_kernel);
  // Tail: boundary outside the window treated as flat at the local offset,
  // i.e. (full-space flat integral) - (flat integral over the window).
  const double s = norm(x.slice(d, b.codim()) - b.graph_value(proj.param));
  if (s > 0.0) {
    auto flat_kernel = [&](const Vec& y, std::span<double> out) {
      double r2 = s * s;
      for (int k = 0; k < d; ++k) r2 += (y[k] - x[k]) * (y[k] - x[k]);
      out[0] = std::pow(r2, -0.5 * (d + alpha));
      for (size_t c = 1; c < out.size(); ++c) out[c] = 0.0;
    };
    KernelIntegral window = integrate_kernel_nd(b, x, alpha, proj, false, 0.25 * rel_tol, max_depth, flat_kernel);
    const double full = flat_smoothed_constant(d, alpha) * std::pow(s, -alpha);
    acc.value[0] += std::max(0.0, full - window.value[0]);
  }
  return acc;
}

}  // namespace

double smoothed_distance(const BoundarySet& boundary, const Vec& x, double alpha,
                         const SmoothedDistanceOptions& options) {
  if (!(alpha > 0.0)) throw InvalidArgument("smoothed distance needs alpha > 0");
  const Projection proj = project(boundary, x);
  if (proj.distance == 0.0) throw SingularPointError("smoothed distance is undefined on the boundary");
  const int d = boundary.boundary_dim();
  if (boundary.is_flat() && options.route == SmoothedRoute::Auto)
    return std::pow(flat_smoothed_constant(d, alpha), -1.0 / alpha) * proj.distance;
  KernelIntegral k = kernel_integral(boundary, x, alpha, proj, false, false, options.rel_tol, options.max_depth);
  const double integral = k.value[0];
  if (!k.converged && k.error > options.rel_tol * integral)
    throw ToleranceError(fmt::format("smoothed distance quadrature did not reach rel. tolerance {} (error {:.3g})",
                                     options.rel_tol, k.error / integral),
                         std::pow(integral, -1.0 / alpha));
  return std::pow(integral, -1.0 / alpha);
}

SmoothedDistanceGradient smoothed_distance_gradient(const BoundarySet& boundary, const Vec& x, double alpha,
                                                    bool fast) {
  return smoothed_distance_gradient(boundary, x, alpha, project(boundary, x), fast);
}

SmoothedDistanceGradient smoothed_distance_gradient(const BoundarySet& boundary, const Vec& x, double alpha,
                                                    const Projection& proj, bool fast) {
  if (!(alpha > 0.0)) throw InvalidArgument("smoothed distance needs alpha > 0");
  if (proj.distance == 0.0) throw SingularPointError("smoothed distance is undefined on the boundary");
  const int n = boundary.ambient_dim();
  const int d = boundary.boundary_dim();
  SmoothedDistanceGradient out;
  out.grad_log = Vec(n);
  if (boundary.is_flat()) {
    out.value = std::pow(flat_smoothed_constant(d, alpha), -1.0 / alpha) * proj.distance;
    const double s2 = proj.distance * proj.distance;
    for (int i = d; i < n; ++i) out.grad_log[i] = x[i] / s2;
    return out;
  }
  KernelIntegral k = kernel_integral(boundary, x, alpha, proj, true, fast && d == 1, 1e-4, 30);
  const double integral = k.value[0];
  out.value = std::pow(integral, -1.0 / alpha);
  // log D = -(1/alpha) log I.
  for (int i = 0; i < n; ++i) out.grad_log[i] = -k.value[static_cast<size_t>(1 + i)] / (alpha * integral);
  return out;
}

// ---------------------------------------------------------------------------
// Ahlfors regularity

namespace {

// Fraction of the lattice cell of `node` lying inside {|gamma(y) - c| < r}.
double cell_coverage(const BoundarySet& b, const Vec& node, const Vec& c, double r) {
  const int d = b.boundary_dim();
  const double h = b.quadrature_spacing();
  const double half_diag = 0.5 * h * std::sqrt(static_cast<double>(d)) * (1.0 + b.lipschitz());
  const double dist = norm(b.lift(node) - c);
  if (dist + half_diag < r) return 1.0;
  if (dist - half_diag > r) return 0.0;
  if (d == 1) {
    // |gamma(y) - c|^2 is increasing in |y - p| on each side of the center
    // parameter p; locate the crossing by bisection inside the cell.
    const double a = node[0] - 0.5 * h, bnd = node[0] + 0.5 * h;
    auto inside = [&](double y) { return norm(b.lift(Vec{y}) - c) < r; };
    const bool ia = inside(a), ib = inside(bnd);
    if (ia && ib) return 1.0;
    if (!ia && !ib) {
      // Both ends outside: the ball may still cut the interior of the cell.
      const bool im = inside(node[0]);
      if (!im) return 0.0;
      double lo = a, hi = node[0];
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (inside(mid) ? hi : lo) = mid;
      }
      const double left = hi;
      lo = node[0];
      hi = bnd;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (inside(mid) ? lo : hi) = mid;
      }
      return (lo - left) / h;
    }
    double lo = a, hi = bnd;  // invariant: inside(lo) == ia
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (inside(mid) == ia ? lo : hi) = mid;
    }
    return ia ? (lo - a) / h : (bnd - lo) / h;
  }
  const int sub = 6;
  int in = 0, total = 1;
  for (int k = 0; k < d; ++k) total *= sub;
  for (int s = 0; s < total; ++s) {
    Vec y = node;
    int rem = s;
    for (int k = 0; k < d; ++k) {
      y[k] += h * ((rem % sub + 0.5) / sub - 0.5);
      rem /= sub;
    }
    if (norm(b.lift(y) - c) < r) ++in;
  }
  return static_cast<double>(in) / total;
}

}  // namespace

double ball_surface_measure(const BoundarySet& boundary, const Vec& center_param, double r) {
  const int d = boundary.boundary_dim();
  const int m = boundary.lattice_size();
  const double h = boundary.quadrature_spacing();
  const double rw = boundary.window_radius();
  const Vec c = boundary.lift(center_param);
  std::array<int, kMaxDim> lo{}, hi{};
  long long count = 1;
  for (int k = 0; k < d; ++k) {
    lo[k] = std::max(0, static_cast<int>(std::floor((center_param[k] - r + rw) / h)) - 1);
    hi[k] = std::min(m - 1, static_cast<int>(std::floor((center_param[k] + r + rw) / h)) + 1);
    if (hi[k] < lo[k]) return 0.0;
    count *= hi[k] - lo[k] + 1;
  }
  const auto nodes = boundary.quadrature();
  double total = 0.0;
  for (long long s = 0; s < count; ++s) {
    long long rem = s;
    size_t idx = 0;
    std::array<int, kMaxDim> ik{};
    for (int k = d - 1; k >= 0; --k) {
      const int span = hi[k] - lo[k] + 1;
      ik[k] = lo[k] + static_cast<int>(rem % span);
      rem /= span;
    }
    for (int k = 0; k < d; ++k) idx = idx * static_cast<size_t>(m) + static_cast<size_t>(ik[k]);
    const QuadratureNode& node = nodes[idx];
    const double frac = cell_coverage(boundary, node.param, c, r);
    total += frac * node.weight;
  }
  return total;
}

AhlforsEstimate ahlfors_check(const BoundarySet& boundary, std::span<const Vec> centers,
                              std::span<const double> scales) {
  const double lo = 10.0 * boundary.quadrature_spacing();
  const double hi = 0.5 * boundary.window_radius();
  for (double r : scales)
    if (r < lo * (1.0 - 1e-12) || r > hi * (1.0 + 1e-12))
      throw PreconditionError(fmt::format("Ahlfors scale {} outside [{}, {}]", r, lo, hi));
  const int d = boundary.boundary_dim();
  AhlforsEstimate est;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  double c0 = 1.0;
  for (const Vec& c : centers) {
    for (double r : scales) {
      const double mass = ball_surface_measure(boundary, c, r);
      AhlforsSample s{c, r, mass};
      if (mass <= 0.0) {
        est.empty_balls.push_back(s);
        continue;
      }
      est.samples.push_back(s);
      const double rd = std::pow(r, d);
      c0 = std::max({c0, mass / rd, rd / mass});
      const double lx = std::log(r), ly = std::log(mass);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++count;
    }
  }
  est.constant = c0;
  const double denom = count * sxx - sx * sx;
  if (count >= 2 && std::abs(denom) > 1e-14 * std::max(1.0, count * sxx))
    est.dimension = (count * sxy - sx * sy) / denom;
  else
    est.dimension = std::numeric_limits<double>::quiet_NaN();
  return est;
}

// ---------------------------------------------------------------------------
// Harnack chains

double segment_clearance(const BoundarySet& boundary, const Vec& y1, const Vec& y2) {
  const int d = boundary.boundary_dim();
  if (boundary.is_flat()) {
    const Vec t1 = y1.slice(d, boundary.codim());
    const Vec dt = y2.slice(d, boundary.codim()) - t1;
    const double len2 = norm2(dt);
    const double tau = len2 > 0.0 ? std::clamp(-dot(t1, dt) / len2, 0.0, 1.0) : 0.0;
    return norm(t1 + dt * tau);
  }
  const int samples = 64;
  auto at = [&](double tau) { return distance(boundary, y1 + (y2 - y1) * tau); };
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) {
    const double v = at(static_cast<double>(i) / samples);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  // Golden-section refinement on the bracketing sub-interval.
  double a = std::max(0, best - 1) / static_cast<double>(samples);
  double b = std::min(samples, best + 1) / static_cast<double>(samples);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), e = a + g * (b - a);
  double fc = at(c), fe = at(e);
  for (int it = 0; it < 40; ++it) {
    if (fc < fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - g * (b - a);
      fc = at(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + g * (b - a);
      fe = at(e);
    }
  }
  return std::min({best_val, fc, fe});
}

namespace {
Vec clamp_to_ball(const Vec& p, const Vec& center, double radius) {
  const Vec off = p - center;
  const double len = norm(off);
  if (len <= radius) return p;
  return center + off * (radius / len);
}
}  // namespace

Tube harnack_chain(const BoundarySet& boundary, const Vec& x1, const Vec& x2, double r, double lambda,
                   const HarnackChainOptions& options) {
  if (!(r > 0.0) || lambda < 1.0) throw InvalidArgument("harnack chain needs r > 0 and Lambda >= 1");
  if (distance(boundary, x1) < r * (1.0 - 1e-12) || distance(boundary, x2) < r * (1.0 - 1e-12))
    throw PreconditionError("harnack chain endpoints must satisfy dist(x_i, Gamma) >= r");
  if (norm(x1 - x2) > lambda * r * (1.0 + 1e-12))
    throw PreconditionError("harnack chain endpoints must satisfy |x1 - x2| <= Lambda r");
  const int n = boundary.ambient_dim();
  const int d = boundary.boundary_dim();
  const double radius = 0.5 * r * (1.0 - 1e-9);
  Tube best{x1, x2, segment_clearance(boundary, x1, x2), 0.0, false};
  best.threshold = options.c * std::pow(lambda, -static_cast<double>(d) / (n - d - 1)) * r;

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  auto random_in_ball = [&](const Vec& center) {
    Vec dir(n);
    for (int i = 0; i < n; ++i) dir[i] = normal(rng);
    const double len = norm(dir);
    const double rad = radius * std::pow(unif(rng), 1.0 / n);
    return center + dir * (rad / std::max(len, 1e-300));
  };
  for (int k = 0; k < options.random_candidates; ++k) {
    Vec y1 = random_in_ball(x1), y2 = random_in_ball(x2);
    const double cl = segment_clearance(boundary, y1, y2);
    if (cl > best.clearance) best = Tube{y1, y2, cl, best.threshold, false};
  }
  // Pattern ascent on the 2n coordinates.
  for (double step = r / 8.0; step > r / 1024.0; step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int coord = 0; coord < 2 * n; ++coord) {
        for (double sgn : {1.0, -1.0}) {
          Tube trial = best;
          Vec& y = coord < n ? trial.y1 : trial.y2;
          const Vec& center = coord < n ? x1 : x2;
          y[coord % n] += sgn * step;
          y = clamp_to_ball(y, center, radius);
          trial.clearance = segment_clearance(boundary, trial.y1, trial.y2);
          if (trial.clearance > best.clearance * (1.0 + 1e-12)) {
            best = trial;
            improved = true;
          }
        }
      }
    }
  }
  best.success = best.clearance >= best.threshold;
  return best;
}

// ---------------------------------------------------------------------------
// Mollified graph map

namespace {
struct BumpRule {
  std::vector<Vec> nodes;
  std::vector<double> weights;
};

const BumpRule& bump_rule(int d) {
  static const std::array<BumpRule, kMaxDim + 1> rules = [] {
    std::array<BumpRule, kMaxDim + 1> out;
    for (int dim = 1; dim <= 3; ++dim) {
      const int pts = dim == 1 ? 24 : (dim == 2 ? 12 : 8);
      const quad::Rule gl = quad::gauss_legendre(pts, -1.0, 1.0);
      BumpRule rule;
      int total = 1;
      for (int k = 0; k < dim; ++k) total *= pts;
      double sum = 0.0;
      for (int s = 0; s < total; ++s) {
        Vec z(dim);
        double w = 1.0;
        int rem = s;
        for (int k = 0; k < dim; ++k) {
          z[k] = gl.nodes[static_cast<size_t>(rem % pts)];
          w *= gl.weights[static_cast<size_t>(rem % pts)];
          rem /= pts;
        }
        const double r2 = norm2(z);
        if (r2 >= 1.0) continue;
        w *= std::exp(-1.0 / (1.0 - r2));
        rule.nodes.push_back(z);
        rule.weights.push_back(w);
        sum += w;
      }
      for (double& w : rule.weights) w /= sum;
      out[static_cast<size_t>(dim)] = std::move(rule);
    }
    return out;
  }();
  if (d < 1 || d > 3) throw InvalidArgument("mollified graph supports 1 <= d <= 3");
  return rules[static_cast<size_t>(d)];
}
}  // namespace

Vec mollified_graph(const BoundarySet& boundary, const Vec& param, double s) {
  if (boundary.is_flat()) return Vec(boundary.codim());
  if (s <= 0.0) return boundary.graph_value(param);
  const BumpRule& rule = bump_rule(boundary.boundary_dim());
  Vec out(boundary.codim());
  for (size_t q = 0; q < rule.nodes.size(); ++q) {
    const Vec y = param - rule.nodes[q] * s;
    const Vec f = boundary.graph_value(y);
    out += f * rule.weights[q];
  }
  return out;
}

Vec rho_map(const BoundarySet& boundary, const Vec& point, double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw InvalidArgument("rho map needs kappa in (0, 1]");
  if (boundary.is_flat()) return point;
  const int d = boundary.boundary_dim();
  const Vec x = point.slice(0, d);
  const Vec t = point.slice(d, boundary.codim());
  return concat(x, mollified_graph(boundary, x, kappa * norm(t)) + t);
}

Vec rho_inverse(const BoundarySet& boundary, const Vec& point, double kappa) {
  if (boundary.is_flat()) return point;
  const int d = boundary.boundary_dim();
  const Vec x = point.slice(0, d);
  const Vec target = point.slice(d, boundary.codim());
  Vec t = target - boundary.graph_value(x);
  for (int it = 0; it < 100; ++it) {
    const Vec next = target - mollified_graph(boundary, x, kappa * norm(t));
    const double moved = norm(next - t);
    t = next;
    if (moved <= 1e-14 * (1.0 + norm(t))) break;
  }
  return concat(x, t);
}

}  // namespace codim
