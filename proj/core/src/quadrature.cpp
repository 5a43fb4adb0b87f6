#include "codim/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace codim::quad {
namespace {

// Kronrod 15-point abscissae (non-negative half) and weights; the 7-point
// Gauss rule uses the odd-indexed abscissae.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  std::vector<double> kronrod;
  double error = 0.0;
};

Segment gk15(const VectorIntegrand& f, size_t m, double lo, double hi, std::vector<double>& buf_a,
             std::vector<double>& buf_b) {
  const double c = 0.5 * (lo + hi);
  const double r = 0.5 * (hi - lo);
  Segment seg;
  seg.kronrod.assign(m, 0.0);
  std::vector<double> gauss(m, 0.0);
  f(c, buf_a);
  for (size_t k = 0; k < m; ++k) {
    seg.kronrod[k] = kWgk[7] * buf_a[k];
    gauss[k] = kWg[3] * buf_a[k];
  }
  for (int j = 0; j < 7; ++j) {
    const double dx = r * kXgk[static_cast<size_t>(j)];
    f(c - dx, buf_a);
    f(c + dx, buf_b);
    for (size_t k = 0; k < m; ++k) {
      const double s = buf_a[k] + buf_b[k];
      seg.kronrod[k] += kWgk[static_cast<size_t>(j)] * s;
      if (j % 2 == 1) gauss[k] += kWg[static_cast<size_t>(j / 2)] * s;
    }
  }
  for (size_t k = 0; k < m; ++k) {
    seg.kronrod[k] *= r;
    gauss[k] *= r;
    seg.error = std::max(seg.error, std::abs(seg.kronrod[k] - gauss[k]));
  }
  return seg;
}

// Recursive bisection with an absolute per-segment budget.
void refine(const VectorIntegrand& f, size_t m, double lo, double hi, const Segment& seg, double budget,
            int depth, AdaptiveResult& out, std::vector<double>& buf_a, std::vector<double>& buf_b) {
  if (seg.error <= budget || depth <= 0) {
    if (seg.error > budget) out.converged = false;
    for (size_t k = 0; k < m; ++k) out.value[k] += seg.kronrod[k];
    out.error_estimate += seg.error;
    return;
  }
  const double mid = 0.5 * (lo + hi);
  Segment left = gk15(f, m, lo, mid, buf_a, buf_b);
  Segment right = gk15(f, m, mid, hi, buf_a, buf_b);
  refine(f, m, lo, mid, left, 0.5 * budget, depth - 1, out, buf_a, buf_b);
  refine(f, m, mid, hi, right, 0.5 * budget, depth - 1, out, buf_a, buf_b);
}

}  // namespace

Rule gauss_legendre(int points, double lo, double hi) {
  Rule rule;
  rule.nodes.resize(static_cast<size_t>(points));
  rule.weights.resize(static_cast<size_t>(points));
  const int half = (points + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= points; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = points * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    const double mid = 0.5 * (lo + hi), rad = 0.5 * (hi - lo);
    rule.nodes[static_cast<size_t>(i)] = mid - rad * z;
    rule.nodes[static_cast<size_t>(points - 1 - i)] = mid + rad * z;
    rule.weights[static_cast<size_t>(i)] = rad * w;
    rule.weights[static_cast<size_t>(points - 1 - i)] = rad * w;
  }
  return rule;
}

AdaptiveResult adaptive_gk15(const VectorIntegrand& f, size_t components, double lo, double hi,
                             double rel_tol, double abs_tol, int max_depth) {
  std::array<double, 2> br = {lo, hi};
  AdaptiveResult res = adaptive_panels(f, components, br, rel_tol, max_depth);
  if (!res.converged && res.error_estimate <= abs_tol) res.converged = true;
  return res;
}

AdaptiveResult adaptive_panels(const VectorIntegrand& f, size_t components, std::span<const double> breaks,
                               double rel_tol, int max_depth) {
  AdaptiveResult out;
  out.value.assign(components, 0.0);
  if (breaks.size() < 2) return out;
  std::vector<double> buf_a(components), buf_b(components);
  std::vector<Segment> first;
  first.reserve(breaks.size() - 1);
  double estimate = 0.0;
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    first.push_back(gk15(f, components, breaks[i], breaks[i + 1], buf_a, buf_b));
    estimate += first.back().kronrod[0];
  }
  const double target = rel_tol * std::abs(estimate);
  const double per_panel = target / static_cast<double>(first.size());
  for (size_t i = 0; i < first.size(); ++i)
    refine(f, components, breaks[i], breaks[i + 1], first[i], per_panel, max_depth, out, buf_a, buf_b);
  if (out.error_estimate <= rel_tol * std::abs(out.value[0])) out.converged = true;
  return out;
}

std::vector<double> graded_breaks(double center, double scale, double lo, double hi) {
  std::vector<double> left, right;
  center = std::clamp(center, lo, hi);
  for (double w = scale; center - w > lo; w *= 2.0) left.push_back(center - w);
  for (double w = scale; center + w < hi; w *= 2.0) right.push_back(center + w);
  std::vector<double> breaks;
  breaks.push_back(lo);
  for (auto it = left.rbegin(); it != left.rend(); ++it) breaks.push_back(*it);
  for (double b : right) breaks.push_back(b);
  breaks.push_back(hi);
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  return breaks;
}

}  // namespace codim::quad
