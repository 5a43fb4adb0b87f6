#pragma once

// Finite-volume discretization of div(a grad u) = 0 on the grid with
// Dirichlet data on the boundary tube and the outer shell, solved by
// Jacobi-preconditioned conjugate gradients.

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "codim/fields.hpp"

namespace codim {

/// Data on the outer shell, as a function of position.
using OuterData = std::function<double(const Vec&)>;

/// How Dirichlet data on the tube enters the free equations.
/// Plain: tube nodes carry g at their own position.
/// Linear: the coupling between a free node i and a tube node j is scaled by
/// (1 - delta_j / delta_i), which places the data at delta = 0 for solutions
/// that are locally affine in delta.
enum class TubeClosure { Plain, Linear };

struct AssemblyOptions {
  TubeClosure closure = TubeClosure::Linear;
};

struct SolveOptions {
  double tol = 1e-8;  ///< Relative residual |b - A u| / |b|.
  int max_iterations = 50000;
};

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;
  double seconds = 0.0;
};

/// Sparse SPD system over the free (interior) nodes. Face coefficients are
/// harmonic means of a on the two adjacent nodes.
class LinearSystem {
 public:
  LinearSystem(std::shared_ptr<const GridDomain> grid, const ScalarField& a, const AssemblyOptions& options = {});

  const GridDomain& grid() const { return *grid_; }
  std::shared_ptr<const GridDomain> grid_ptr() const { return grid_; }
  bool is_free(size_t i) const { return free_[i] != 0; }
  size_t free_count() const { return free_count_; }
  /// Coefficient of the face between i and i + stride(axis) (0 past the edge
  /// and between two constrained nodes). For a free/tube pair this is the
  /// closure-scaled value.
  double face(size_t i, int axis) const { return faces_[static_cast<size_t>(axis)][i]; }
  double diagonal(size_t i) const { return diag_[i]; }

  /// Sets constrained values: g at the nearest boundary parameter on tube
  /// nodes, g_out on shell nodes.
  void set_dirichlet(const BoundaryData& g, const OuterData& g_out);
  /// Sets constrained values directly (one entry per node; free entries ignored).
  void set_dirichlet_values(std::vector<double> values);
  const std::vector<double>& dirichlet_values() const { return data_; }
  double data_min() const;
  double data_max() const;

  /// y = A x on free nodes (x, y full-size; constrained entries of x ignored,
  /// of y set to 0).
  void apply(const std::vector<double>& x, std::vector<double>& y) const;
  /// Right-hand side from the constrained values.
  std::vector<double> rhs() const;
  /// Discrete weighted energy: sum over faces with a free end of
  /// c_f (u_i - u_j)^2 h^{n-2}.
  double energy(const ScalarField& u) const;

 private:
  std::shared_ptr<const GridDomain> grid_;
  std::array<std::vector<double>, kMaxDim> faces_;
  std::vector<double> diag_;
  std::vector<char> free_;
  std::vector<double> data_;
  size_t free_count_ = 0;
};

LinearSystem assemble(std::shared_ptr<const GridDomain> grid, const ScalarField& a, const BoundaryData& g,
                      const OuterData& g_out, const AssemblyOptions& options = {});

/// Conjugate gradients on A u = b with u = data on constrained nodes.
/// Throws ConvergenceError if the tolerance is not met.
ScalarField solve(const LinearSystem& system, const SolveOptions& options = {}, SolveStats* stats = nullptr,
                  const ScalarField* initial = nullptr);

/// Solves A z = e_x for the multilinear interpolation functional at x; the
/// returned weights mu_j (one per constrained node touching a free node)
/// satisfy u(x) = sum_j mu_j u_j for every solution u.
struct AdjointWeights {
  std::vector<std::pair<size_t, double>> weights;
  SolveStats stats;
};
AdjointWeights solve_adjoint(const LinearSystem& system, const Vec& x, const SolveOptions& options = {});

/// Multilinear interpolation weights of the 2^n nodes around x.
std::vector<std::pair<size_t, double>> interpolation_stencil(const GridDomain& grid, const Vec& x);
double interpolate(const ScalarField& u, const Vec& x);

/// min data <= u <= max data up to `tol` times the data range.
bool max_principle_check(const ScalarField& u, const LinearSystem& system, double tol = 1e-8);

/// sup_B u / inf_B u over the closed ball B(center, r). Requires u > 0 on
/// B(center, 2r) and no tube node there.
double harnack_ratio(const ScalarField& u, const Vec& center, double r);

}  // namespace codim
