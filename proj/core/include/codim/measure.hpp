#pragma once

// Harmonic measure on a partition of the boundary into surface cells, its
// density against sigma, and the diagnostics built on solutions: doubling,
// comparison of positive solutions, A-infinity box ratios, localized square
// and nontangential functions, Carleson norms.

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "codim/fields.hpp"
#include "codim/solver.hpp"
#include "codim/walker.hpp"

namespace codim {

/// A cell of the boundary: the image of a parameter box or ball.
struct SurfaceCell {
  ParamRegion region;
  Vec center;           ///< Parameter of the cell center.
  double radius = 0.0;  ///< Half-width of a box cell, radius of a ball cell.
  double sigma = 0.0;   ///< Surface measure.
};

struct Partition {
  std::vector<SurfaceCell> cells;
  size_t size() const { return cells.size(); }
};

/// sigma of the image of a parameter region.
double region_surface_measure(const BoundarySet& boundary, const ParamRegion& region);

/// Cells from explicit parameter regions.
Partition make_partition(const BoundarySet& boundary, std::vector<ParamRegion> regions);
/// `per_axis`^d congruent boxes tiling the parameter box [lo, hi].
Partition box_partition(const BoundarySet& boundary, const Vec& lo, const Vec& hi, int per_axis);
/// Splits every box cell in two along its first axis (ball cells are kept).
Partition refine(const BoundarySet& boundary, const Partition& partition);

enum class Provenance { Solver, Walker };
const char* to_string(Provenance p);

struct HarmonicMeasure {
  Vec base;
  Provenance provenance = Provenance::Solver;
  Partition partition;
  std::vector<double> mass;
  /// Walker: binomial standard error. Solver: mass of the eta-collar of the
  /// cell, the uncertainty from mollifying the indicator.
  std::vector<double> error;
  /// Mass not represented: escaped and capped paths, or 1 - u_1(x).
  double deficit = 0.0;

  double total() const;
};

/// k_j = omega_j / sigma_j, with the cell masses and error bars kept.
struct DensityProfile {
  Partition partition;
  std::vector<double> k;
  std::vector<double> mass;
  std::vector<double> error;
};
DensityProfile density(const HarmonicMeasure& omega);

/// Solution values at x as a linear functional of the Dirichlet data, from
/// one adjoint solve. Shell data for boundary data g are the half-space
/// Poisson integral of g in graph coordinates.
class HarmonicRepresentation {
 public:
  HarmonicRepresentation(const LinearSystem& system, const Vec& x, const SolveOptions& options = {});

  const Vec& base() const { return base_; }
  const GridDomain& grid() const { return *grid_; }
  const SolveStats& stats() const { return stats_; }
  /// u_g(x) for tube data g and shell data P[g].
  double integrate(const BoundaryData& g) const;
  /// Tube part only.
  double integrate_tube(const BoundaryData& g) const;
  /// Mass of {y : dist(y, boundary of E) < eta} for a cell region E.
  double collar_mass(const ParamRegion& region, double eta) const;


 private:
  struct TubeEntry {
    double mu;
    Vec param;
  };
  struct ShellEntry {
    double mu;
    Vec foot;  ///< First d coordinates of the node.
    double height;
  };
  std::shared_ptr<const GridDomain> grid_;
  Vec base_;
  std::vector<TubeEntry> tube_;
  std::vector<ShellEntry> shell_;
  SolveStats stats_;
};

/// Mollified indicator of a cell region.
BoundaryData cell_indicator(const ParamRegion& region, double eta);

/// Per cell, sigma-integral of min(g_E, g_F) over the other cells F, divided
/// by sigma(E): the share of the cell where its indicator overlaps a
/// neighbour's.
std::vector<double> indicator_overlap(const BoundarySet& boundary, const Partition& partition, double eta);

/// Cell masses u_{chi_E}(x), clipped to [0, 1]. Requires eta >= 4 h_Gamma;
/// throws PartitionError when the indicator overlap of a cell exceeds 10%
/// (mass of the overlap estimated with the cell's mean density).
HarmonicMeasure measure_from_solver(const HarmonicRepresentation& rep, const Partition& partition, double eta);
HarmonicMeasure measure_from_solver(const LinearSystem& system, const Vec& x, const Partition& partition,
                                    double eta, const SolveOptions& options = {});
/// One Dirichlet solve per cell; used to cross-check the adjoint route.
HarmonicMeasure measure_from_solver_per_cell(const LinearSystem& system, const Vec& x, const Partition& partition,
                                             double eta, const SolveOptions& options = {});

enum class Normalization {
  Absorbed,  ///< counts / absorbed paths.
  AllPaths,  ///< counts / N; escaped and capped paths land in no cell.
};

/// Cell masses from absorption parameters (half-open boxes, open balls).
HarmonicMeasure estimate_measure(const PathEnsemble& ensemble, const Partition& partition,
                                 Normalization normalization = Normalization::Absorbed);

/// omega of the parameter ball B(y, r), from cell masses weighted by the
/// sigma-fraction of each cell inside the ball. Throws PreconditionError if
/// the partition does not cover the ball.
double ball_mass(const HarmonicMeasure& omega, const BoundarySet& boundary, const Vec& y, double r);
/// omega(B(y, 2r)) / omega(B(y, r)).
double doubling_ratio(const HarmonicMeasure& omega, const BoundarySet& boundary, const Vec& y, double r);

/// [sup u/v] / [inf u/v] over interior nodes of B(gamma(param), r). Requires
/// u, v > 0 on the interior nodes of the doubled ball and vanishing traces
/// there.
double comparison_ratio(const ScalarField& u, const ScalarField& v, const Vec& param, double r);

/// Half the l1 distance of the cell masses.
double total_variation(const HarmonicMeasure& a, const HarmonicMeasure& b);

struct AInfinityBox {
  ParamRegion box;
  double ratio = 1.0;  ///< avg k / exp(avg log k), sigma-weighted over cells.
  size_t cells = 0;
  bool infinite = false;  ///< A cell with k = 0.
};
struct AInfinityResult {
  std::vector<AInfinityBox> boxes;
  double max_ratio = 1.0;
  bool flagged = false;
  std::vector<std::string> notes;  ///< Skipped (empty) boxes.
};
/// Cells belong to a box when their center does.
AInfinityResult a_infinity_diagnostic(const DensityProfile& k, std::span<const ParamRegion> boxes);

/// Same ratio for the half-space Poisson density from (x, s) on the interval
/// [a, b], by the midpoint rule with `points` nodes.
double poisson_a_infinity_ratio(double x, double s, double a, double b, int points = 10000);

/// Cube Q = center + [-side/2, side/2]^d.
ParamRegion cube(const Vec& center, double side);

/// u composed with the graph map rho, sampled on a grid of the same shape
/// around the flat plane R^d. Nodes mapped outside u's box carry NaN. For a
/// flat boundary u is returned unchanged.
ScalarField pull_back(const ScalarField& u, double kappa = 1.0);

enum class NontangentialVariant { Gradient, Value };

struct SquareFunctionResult {
  std::vector<double> s_values;       ///< S^Q u at the lattice points of Q.
  std::vector<double> n_grad_values;  ///< sup |grad u| over the wide cone, on 2Q.
  std::vector<double> n_u_values;     ///< sup |u| over the wide cone, on 2Q.
  double s_norm2 = 0.0;               ///< ||S^Q u||^2_{L^2(Q)}.
  double n_grad_norm2 = 0.0;          ///< ||N^Q u||^2_{L^2(2Q)}, gradient variant.
  double n_u_norm2 = 0.0;             ///< Same, value variant.
  double trace_norm2 = 0.0;           ///< int_Q u^2.
  double ratio(NontangentialVariant v) const;
};

/// Localized square function of a field on a flat-plane grid over the cube Q.
/// The cone at (x, 0) is {|y - x| <= |s|, 0 < |s| < l(Q)}; the wide cone uses
/// |y - x| < aperture |s| with the same truncation. Tube nodes and nodes
/// outside the box are left out.
SquareFunctionResult square_function(const ScalarField& u, const Vec& q_center, double side,
                                     double aperture = 4.0);

struct CarlesonResult {
  double value = 0.0;   ///< sup_Q mu(Q x {cutoff < |t| < l(Q)}) / l(Q)^d.
  double coarse = 0.0;  ///< Same with cutoff doubled.
  double growth = 1.0;  ///< value / coarse.
  bool flagged = false; ///< growth > 10: not a Carleson measure at this resolution.
  size_t worst_box = 0;
};

/// d mu = f^2 dx dt / |t|^{n-d} summed over nodes of a flat-plane grid.
/// `cutoff` <= 0 selects the grid's tube radius.
CarlesonResult carleson_norm(const GridDomain& grid, const std::function<double(size_t)>& f,
                             std::span<const ParamRegion> boxes, double cutoff = 0.0);

/// |t| |grad u| at every node of a flat-plane field.
ScalarField t_gradient_field(const ScalarField& u);

/// One row of diagnostics.csv.
struct DiagnosticRow {
  std::string name;
  std::string params;  ///< `key=value` pairs joined by ';'.
  double value = 0.0;
};

/// `cell_id,center1..centerd,radius,sigma,mass,stderr`.
void write_measure_csv(const HarmonicMeasure& omega, const std::string& path);
/// The measure columns followed by `density`.
void write_density_csv(const DensityProfile& k, const std::string& path);
/// Appends rows to `name,params,value`, writing the header for a new file.
void append_diagnostics_csv(std::span<const DiagnosticRow> rows, const std::string& path);

}  // namespace codim
