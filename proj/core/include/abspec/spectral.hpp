#pragma once

#include <vector>

#include "abspec/assembly.hpp"
#include "abspec/eigensolve.hpp"
#include "abspec/geometry.hpp"
#include "abspec/mesh.hpp"

namespace abspec {

struct SolveOptions {
  double h = 0.03;
  int order = 2;
  double tol = 1e-9;
  GradingSpec grading{};
  std::size_t budget = 400000;
  double min_angle_deg = 20.0;

  MeshOptions mesh_options() const {
    MeshOptions mo;
    mo.h = h;
    mo.grading = grading;
    mo.max_vertices = budget;
    mo.min_angle_deg = min_angle_deg;
    return mo;
  }
};

// lambda_1..lambda_m of the Dirichlet Laplacian.
std::vector<EigenPair> dirichlet_spectrum(const Domain& domain,
                                          const SolveOptions& opt, int m);

// Magnetic spectrum via the antisymmetric cut reduction, keeping enough
// context to evaluate eigenfunctions afterwards.
struct MagneticSolution {
  CutMesh cm;
  FemSystem sys;
  ReducedSystem red;
  std::vector<EigenPair> pairs;
  Cut cut;
  Vec2 pole;
  double pole_boundary_dist = 0.0;
  double grading_radius = 0.0;
  SolveOptions options;

  std::vector<double> values() const {
    std::vector<double> v;
    for (const auto& p : pairs) v.push_back(p.value);
    return v;
  }
  // Full-DOF real representative of eigenfunction j (1-based). The field
  // points into this solution; keep it alive while evaluating.
  FemField field(int j) const;
};

MagneticSolution magnetic_spectrum(const Domain& domain, const Pole& pole,
                                   const SolveOptions& opt, int m);
MagneticSolution magnetic_spectrum_with_cut(const Domain& domain,
                                            const Pole& pole, const Cut& cut,
                                            const SolveOptions& opt, int m);

enum class SymmetryTag : char {
  Symmetric = 's',
  Antisymmetric = 'a',
  Mixed = 'm'
};

struct CoverValue {
  double value = 0.0;
  double residual = 0.0;
  SymmetryTag tag = SymmetryTag::Mixed;
  int cluster = 0;
  double correlation = 0.0;  // <u, u o sigma>_M
};

// Spectrum of the Dirichlet Laplacian on the double cover, each value
// tagged by its behavior under the deck transformation.
std::vector<CoverValue> cover_spectrum(const Domain& domain, const Pole& pole,
                                       const SolveOptions& opt, int m);

// s = <u, u o sigma>_M for a unit M-norm vector; s > 0.9 symmetric,
// s < -0.9 antisymmetric, otherwise ambiguous (Mixed).
SymmetryTag classify(const Eigen::VectorXd& u,
                     const std::vector<int>& deck_perm_reduced,
                     const Eigen::SparseMatrix<double>& M_lower,
                     double* correlation = nullptr);

// The three spectra computed on one shared base mesh, so the merge identity
// {mu_j} = {lambda_j} u {lambda_j^a} can be tested without mesh noise.
struct CoverConsistency {
  std::vector<double> dirichlet;
  std::vector<double> magnetic;
  std::vector<CoverValue> cover;
};
CoverConsistency cover_consistency(const Domain& domain, const Pole& pole,
                                   const SolveOptions& opt, int m);

// Two admissible cuts for the same pole on one shared base mesh; the
// spectra must agree (discrete gauge invariance).
struct CutIndependence {
  Cut primary, alternate;
  std::vector<double> values_primary, values_alternate;
};
CutIndependence cut_independence(const Domain& domain, const Pole& pole,
                                 const SolveOptions& opt, int m);

// Boundary anchor for an alternate cut, roughly opposite the primary one.
Cut alternate_cut(const Domain& domain, const Pole& pole, const Cut& primary);

}  // namespace abspec
