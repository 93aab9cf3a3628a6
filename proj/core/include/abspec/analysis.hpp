#pragma once

#include <string>
#include <vector>

#include "abspec/spectral.hpp"

namespace abspec {

struct SweepRow {
  Vec2 pole;
  std::vector<double> values;
  std::vector<int> clusters;
  double max_residual = 0.0;
  bool ok = false;
  std::string error;
};

struct SweepTable {
  std::string domain_id;
  double h = 0.0;
  int order = 2;
  int m = 0;
  std::vector<SweepRow> rows;
};

// One row per pole, in input order; per-pole failures are recorded and the
// sweep continues. jobs > 1 dispatches poles to a worker pool (rows still
// land in input order).
SweepTable sweep(const Domain& domain, const std::vector<Pole>& poles,
                 const SolveOptions& opt, int m, int jobs = 1);

struct BoundaryConvergence {
  Vec2 boundary_point;
  int j = 0;
  std::vector<double> distances;  // descending
  std::vector<double> magnetic;   // lambda_j^a per distance
  double lambda_ref = 0.0;        // Dirichlet lambda_j
  std::vector<double> gaps;
  bool pass = false;
};

BoundaryConvergence boundary_convergence(const Domain& domain, int j,
                                         const Vec2& b,
                                         std::vector<double> distances,
                                         const SolveOptions& opt);

struct NodalReport {
  Vec2 pole;
  int j = 0;
  int k = 0;                       // zero order: k/2, k odd
  double c_k = 0.0, d_k = 0.0;     // leading coefficients, r^{k/2}/k scale
  std::vector<double> ray_angles;  // measured zero crossings, sorted [0,2pi)
  double fit_residual = 0.0;
  double probe_radius = 0.0;
};

struct NodalOptions {
  int samples = 256;
  double zero_threshold = 1e-8;  // relative to the max sample magnitude
  int max_k = 9;                 // highest resolvable order (configurable)
  // By default a clustered eigenvalue refuses the analysis. At
  // symmetry-forced doubles (disk or square center) the ray count is the
  // same for every member of the eigenspace, so callers may analyze a
  // cluster member knowingly.
  bool require_simple = true;
};

// Samples the real antisymmetric eigenfunction on a circle around the pole,
// closing anti-periodically across the cut; the sign-change count is the
// number of nodal rays.
NodalReport nodal_order(const MagneticSolution& sol, int j,
                        double probe_radius, const NodalOptions& opt = {});

// Detection path on raw circle samples (theta ascending over one period,
// anti-periodic closure applied at the wrap). Synthetic fields enter here.
NodalReport nodal_order_from_samples(const std::vector<double>& theta,
                                     const std::vector<double>& values,
                                     double probe_radius,
                                     const NodalOptions& opt = {});

// Max deviation of consecutive ray gaps from 2*pi/k (k >= 3).
double ray_geometry(const NodalReport& report);

// Re-locates a higher-order zero near a printed guess by scanning a 1D
// window and maximizing the relative energy of the fitted leading
// half-harmonic (equivalently, minimizing the nodal fit residual).
struct PoleLocate {
  Vec2 pole;
  NodalReport report;
};
PoleLocate locate_order_pole(const Domain& domain, int j, const Vec2& guess,
                             const Vec2& direction, double window,
                             double step, double probe_radius,
                             const SolveOptions& opt,
                             const NodalOptions& nodal = {});

struct RateFit {
  Vec2 base;
  int j = 0;
  int k = 0;
  std::vector<double> radii;  // usable radii after the noise filter
  std::vector<double> gaps;
  double p = 0.0, p_lo = 0.0, p_hi = 0.0;
  double bound = 0.0;  // (k+1)/2, meaningful for k >= 3
};

struct RateFitOptions {
  bool require_simple = true;    // see NodalOptions::require_simple
  double probe_radius = 0.0;     // 0 = auto for the nodal order at b
};

RateFit rate_fit(const Domain& domain, const Vec2& b, int j,
                 const Vec2& direction, std::vector<double> radii,
                 const SolveOptions& opt, const RateFitOptions& fit_opt = {});

// Fit path alone, for synthetic power-law injection.
RateFit rate_fit_from_gaps(std::vector<double> radii,
                           std::vector<double> gaps);

struct ScanOptions {
  double spike_factor = 10.0;      // vs the median |second difference|
  double crossing_rel_gap = 0.02;  // neighbor-gap threshold for crossings
  double spacing_tol = 1e-9;
};

struct SmoothnessScan {
  int j = 0;
  std::vector<double> param;    // arc-length position along the pole path
  std::vector<double> lambda;   // lambda_j per pole
  std::vector<double> second_diff;
  std::vector<int> kinks;       // indices of second-difference spikes
  std::vector<int> crossings;   // indices of non-simple markers
  std::vector<int> flagged;     // kinks not co-located with a crossing
};

// Pre: the sweep covers a uniformly spaced 1D pole path.
SmoothnessScan smoothness_scan(const SweepTable& table, int j,
                               const ScanOptions& opt = {});

}  // namespace abspec
