#include "codim/walker.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <fmt/format.h>

#include "codim/parallel.hpp"

namespace codim {

double PathEnsemble::absorbed_fraction() const {
  return paths.empty() ? 0.0 : static_cast<double>(absorbed) / static_cast<double>(paths.size());
}

double PathEnsemble::deficit() const {
  return paths.empty() ? 0.0 : static_cast<double>(escaped + capped) / static_cast<double>(paths.size());
}

bool PathEnsemble::cap_warning() const {
  return !paths.empty() && static_cast<double>(capped) > 0.01 * static_cast<double>(paths.size());
}

namespace {

double log_weight_distance(const BoundarySet& b, const Vec& x, const WalkerParams& p) {
  if (p.variant == WeightVariant::Geometric) return std::log(distance(b, x));
  return std::log(smoothed_distance(b, x, p.alpha));
}

void validate(const BoundarySet& b, const Vec& x, const WalkerParams& p) {
  if (x.size() != b.ambient_dim()) throw InvalidArgument("base point dimension does not match boundary");
  if (b.boundary_dim() >= b.ambient_dim() - 1) throw InvalidArgument("walker needs d < n-1");
  if (!(p.dt0 > 0.0)) throw InvalidArgument("dt0 must be positive");
  if (!(p.eps_abs > 0.0)) throw InvalidArgument("eps_abs must be positive");
  if (!(p.r_esc > norm(x))) throw InvalidArgument("r_esc must exceed |x|");
  if (p.max_steps <= 0) throw InvalidArgument("max_steps must be positive");
  if (!(p.alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  if (!(p.step_cap > 0.0)) throw InvalidArgument("step_cap must be positive");
}

PathRecord run_path(const BoundarySet& b, const Vec& x0, std::uint64_t seed, std::uint64_t id,
                    const WalkerParams& p) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = b.ambient_dim();
  Vec x = x0;
  Projection proj = project(b, x);
  PathRecord rec;
  for (std::int64_t step = 0; step < p.max_steps; ++step) {
    const double delta = proj.distance;
    const double dtau = p.dt0 * std::min(delta * delta, p.step_cap);
    const Vec drift = walker_drift(b, x, proj, p);
    const double noise = std::sqrt(2.0 * dtau);
    for (int i = 0; i < n; ++i) x[i] += drift[i] * dtau + noise * normal(rng);
    rec.steps = step + 1;
    if (norm(x) >= p.r_esc) {
      rec.outcome = PathOutcome::Escaped;
      rec.point = x;
      return rec;
    }
    proj = b.is_flat() ? project(b, x) : project_from_hint(b, x, proj.param);
    if (proj.distance <= p.eps_abs) {
      rec.outcome = PathOutcome::Absorbed;
      rec.point = proj.point;
      rec.param = proj.param;
      return rec;
    }
  }
  rec.outcome = PathOutcome::Capped;
  rec.point = x;
  return rec;
}

}  // namespace

Vec walker_drift(const BoundarySet& boundary, const Vec& x, const Projection& proj, const WalkerParams& params) {
  const int n = boundary.ambient_dim();
  const double factor = boundary.boundary_dim() + 1 - n;
  Vec grad(n);
  if (params.gradient == DriftGradient::CenteredDifference) {
    const double step = proj.distance / 10.0;
    for (int i = 0; i < n; ++i) {
      Vec xp = x, xm = x;
      xp[i] += step;
      xm[i] -= step;
      grad[i] = (log_weight_distance(boundary, xp, params) - log_weight_distance(boundary, xm, params)) / (2.0 * step);
    }
  } else if (params.variant == WeightVariant::Geometric) {
    grad = (x - proj.point) * (1.0 / (proj.distance * proj.distance));
  } else {
    grad = smoothed_distance_gradient(boundary, x, params.alpha, proj, true).grad_log;
  }
  return grad * factor;
}

PathEnsemble sample_paths(const BoundarySet& boundary, const Vec& x, size_t count, std::uint64_t seed,
                          const WalkerParams& params) {
  validate(boundary, x, params);
  if (distance(boundary, x) <= params.eps_abs) throw PreconditionError("base point lies in the absorption tube");
  PathEnsemble out;
  out.base = x;
  out.seed = seed;
  out.params = params;
  out.paths.resize(count);
  parallel_for(count, 64, [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) out.paths[i] = run_path(boundary, x, seed, i, params);
  });
  for (const PathRecord& r : out.paths) {
    switch (r.outcome) {
      case PathOutcome::Absorbed: ++out.absorbed; break;
      case PathOutcome::Escaped: ++out.escaped; break;
      case PathOutcome::Capped: ++out.capped; break;
    }
  }
  return out;
}

void write_paths_csv(const PathEnsemble& ensemble, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(fmt::format("cannot open {} for writing", path));
  const int n = ensemble.base.size();
  f << "path_id";
  for (int i = 1; i <= n; ++i) f << ",y" << i;
  f << ",steps\n";
  for (size_t id = 0; id < ensemble.paths.size(); ++id) {
    const PathRecord& r = ensemble.paths[id];
    if (r.outcome != PathOutcome::Absorbed) continue;
    f << id;
    for (int i = 0; i < n; ++i) f << ',' << fmt::format("{:.17g}", r.point[i]);
    f << ',' << r.steps << '\n';
  }
}

}  // namespace codim
