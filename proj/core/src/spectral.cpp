#include "abspec/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <mutex>
#include <numbers>
#include <unordered_map>

#include "abspec/manifest.hpp"

namespace abspec {

namespace {

EigenOptions eigen_options(const SolveOptions& opt) {
  EigenOptions eo;
  eo.tol = opt.tol;
  return eo;
}

// In-process result cache keyed by a content hash of (domain, pole, h,
// order, m, tol, grading). Sweeps never hit it (distinct poles); repeated
// analyses of the same configuration do.
struct SpectrumCache {
  std::mutex mutex;
  std::unordered_map<std::uint64_t, std::vector<EigenPair>> entries;
  std::deque<std::uint64_t> order;

  bool get(std::uint64_t key, std::vector<EigenPair>& out) {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = entries.find(key);
    if (it == entries.end()) return false;
    out = it->second;
    return true;
  }
  void put(std::uint64_t key, const std::vector<EigenPair>& pairs) {
    std::lock_guard<std::mutex> lock(mutex);
    if (entries.count(key)) return;
    entries[key] = pairs;
    order.push_back(key);
    while (order.size() > 16) {
      entries.erase(order.front());
      order.pop_front();
    }
  }
};

SpectrumCache& cache() {
  static SpectrumCache c;
  return c;
}

std::uint64_t solve_key(const char* kind, const Domain& domain,
                        const Vec2* pole, const SolveOptions& opt, int m) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%s|%s|%.17g|%d|%d|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g",
                kind, domain.describe().c_str(), opt.h, opt.order, m, opt.tol,
                opt.grading.gamma, opt.grading.radius, opt.grading.floor_size,
                pole ? pole->x : 0.0, pole ? pole->y : 0.0);
  return fnv1a64(buf);
}

double resolved_grading_radius(const Domain& domain, const Pole& pole,
                               const SolveOptions& opt) {
  if (opt.grading.radius > 0.0) return opt.grading.radius;
  return std::min(0.2, domain.distance_to_boundary(pole.position));
}

}  // namespace

std::vector<EigenPair> dirichlet_spectrum(const Domain& domain,
                                          const SolveOptions& opt, int m) {
  std::uint64_t key = solve_key("dirichlet", domain, nullptr, opt, m);
  std::vector<EigenPair> pairs;
  if (cache().get(key, pairs)) return pairs;
  Mesh mesh = triangulate(domain, opt.mesh_options());
  FemSystem sys = assemble(mesh, opt.order);
  ReducedSystem red = reduce(sys);
  pairs = smallest_eigenpairs(red.K, red.M, m, eigen_options(opt));
  cache().put(key, pairs);
  return pairs;
}

FemField MagneticSolution::field(int j) const {
  if (j < 1 || j > (int)pairs.size())
    throw PreconditionError("magnetic field: eigenpair index out of range");
  FemField f;
  f.mesh = &cm.mesh;
  f.dofmap = &sys.dofmap;
  f.values = expand_to_full(red, pairs[j - 1].vector);
  return f;
}

MagneticSolution magnetic_spectrum_with_cut(const Domain& domain,
                                            const Pole& pole, const Cut& cut,
                                            const SolveOptions& opt, int m) {
  if (!domain.contains(pole.position))
    throw PreconditionError("magnetic spectrum: pole must be interior");
  MagneticSolution sol;
  sol.cut = cut;
  sol.pole = pole.position;
  sol.pole_boundary_dist = domain.distance_to_boundary(pole.position);
  sol.grading_radius = resolved_grading_radius(domain, pole, opt);
  sol.options = opt;
  Mesh mesh = triangulate(domain, opt.mesh_options(), &pole, {cut});
  sol.cm = insert_cut(mesh, 0);
  sol.sys = assemble(sol.cm, opt.order);
  sol.red = reduce(sol.sys);
  sol.pairs = smallest_eigenpairs(sol.red.K, sol.red.M, m, eigen_options(opt));
  return sol;
}

MagneticSolution magnetic_spectrum(const Domain& domain, const Pole& pole,
                                   const SolveOptions& opt, int m) {
  Cut cut = branch_cut(domain, pole);
  return magnetic_spectrum_with_cut(domain, pole, cut, opt, m);
}

SymmetryTag classify(const Eigen::VectorXd& u,
                     const std::vector<int>& deck_perm_reduced,
                     const Eigen::SparseMatrix<double>& M_lower,
                     double* correlation) {
  Eigen::VectorXd pu(u.size());
  for (int i = 0; i < (int)u.size(); i++) pu[deck_perm_reduced[i]] = u[i];
  double s = u.dot(M_lower.selfadjointView<Eigen::Lower>() * pu);
  if (correlation) *correlation = s;
  if (s > 0.9) return SymmetryTag::Symmetric;
  if (s < -0.9) return SymmetryTag::Antisymmetric;
  return SymmetryTag::Mixed;
}

namespace {

std::vector<CoverValue> classify_cover_pairs(
    const std::vector<EigenPair>& pairs, const std::vector<int>& perm_red,
    const Eigen::SparseMatrix<double>& M_lower) {
  std::vector<double> vals;
  for (const auto& p : pairs) vals.push_back(p.value);
  std::vector<int> ids = cluster(vals, 1e-6);

  std::vector<CoverValue> out(pairs.size());
  auto mmul = [&](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(M_lower.selfadjointView<Eigen::Lower>() * x);
  };
  auto apply_perm = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd pu(u.size());
    for (int i = 0; i < (int)u.size(); i++) pu[perm_red[i]] = u[i];
    return pu;
  };

  size_t i = 0;
  while (i < pairs.size()) {
    size_t j = i;
    while (j + 1 < pairs.size() && ids[j + 1] == ids[i]) j++;
    size_t len = j - i + 1;

    bool all_clear = true;
    std::vector<double> corr(len);
    for (size_t t = 0; t < len; t++) {
      double s;
      classify(pairs[i + t].vector, perm_red, M_lower, &s);
      corr[t] = s;
      if (std::fabs(s) <= 0.9) all_clear = false;
    }
    if (all_clear || len == 1) {
      for (size_t t = 0; t < len; t++) {
        out[i + t].correlation = corr[t];
        out[i + t].tag = corr[t] > 0.9 ? SymmetryTag::Symmetric
                         : corr[t] < -0.9 ? SymmetryTag::Antisymmetric
                                          : SymmetryTag::Mixed;
      }
    } else {
      // Diagonalize the deck operator restricted to the cluster span; its
      // eigenvalues sit near +-1 and give per-subspace tags.
      Eigen::MatrixXd S(len, len);
      for (size_t r = 0; r < len; r++) {
        Eigen::VectorXd pu = apply_perm(pairs[i + r].vector);
        Eigen::VectorXd mpu = mmul(pu);
        for (size_t c = 0; c < len; c++)
          S(c, r) = pairs[i + c].vector.dot(mpu);
      }
      Eigen::MatrixXd Ssym = 0.5 * (S + S.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ssym);
      for (size_t t = 0; t < len; t++) {
        double ev = es.eigenvalues()[t];
        out[i + t].correlation = ev;
        out[i + t].tag = ev > 0.9    ? SymmetryTag::Symmetric
                         : ev < -0.9 ? SymmetryTag::Antisymmetric
                                     : SymmetryTag::Mixed;
      }
    }
    for (size_t t = 0; t < len; t++) {
      out[i + t].value = pairs[i + t].value;
      out[i + t].residual = pairs[i + t].residual;
      out[i + t].cluster = ids[i + t];
    }
    i = j + 1;
  }
  return out;
}

std::vector<CoverValue> solve_cover(const CutMesh& cm, const SolveOptions& opt,
                                    int m) {
  CoverMesh cover = double_cover(cm);
  FemSystem sys = assemble(cover, opt.order);
  ReducedSystem red = reduce(sys);
  std::vector<EigenPair> pairs =
      smallest_eigenpairs(red.K, red.M, m, eigen_options(opt));

  std::vector<int> perm_full = deck_dof_permutation(cover, sys.dofmap);
  std::vector<int> perm_red(red.n, -1);
  for (size_t i = 0; i < perm_full.size(); i++) {
    if (red.map[i] < 0) continue;
    int pi = perm_full[i];
    if (red.map[pi] < 0)
      throw NumericalError("cover: deck permutation leaves the free space");
    perm_red[red.map[i]] = red.map[pi];
  }
  return classify_cover_pairs(pairs, perm_red, red.M);
}

}  // namespace

std::vector<CoverValue> cover_spectrum(const Domain& domain, const Pole& pole,
                                       const SolveOptions& opt, int m) {
  Cut cut = branch_cut(domain, pole);
  Mesh mesh = triangulate(domain, opt.mesh_options(), &pole, {cut});
  CutMesh cm = insert_cut(mesh, 0);
  return solve_cover(cm, opt, m);
}

CoverConsistency cover_consistency(const Domain& domain, const Pole& pole,
                                   const SolveOptions& opt, int m) {
  Cut cut = branch_cut(domain, pole);
  Mesh mesh = triangulate(domain, opt.mesh_options(), &pole, {cut});
  CutMesh cm = insert_cut(mesh, 0);

  CoverConsistency out;
  {
    FemSystem sys = assemble(mesh, opt.order);
    ReducedSystem red = reduce(sys);
    for (const auto& p :
         smallest_eigenpairs(red.K, red.M, m, eigen_options(opt)))
      out.dirichlet.push_back(p.value);
  }
  {
    FemSystem sys = assemble(cm, opt.order);
    ReducedSystem red = reduce(sys);
    for (const auto& p :
         smallest_eigenpairs(red.K, red.M, m, eigen_options(opt)))
      out.magnetic.push_back(p.value);
  }
  out.cover = solve_cover(cm, opt, m);
  return out;
}

Cut alternate_cut(const Domain& domain, const Pole& pole, const Cut& primary) {
  Vec2 d0 = (primary.boundary_end() - primary.pole()).normalized();
  const double turn[] = {std::numbers::pi, std::numbers::pi * 0.5,
                         -std::numbers::pi * 0.5, std::numbers::pi * 0.75,
                         -std::numbers::pi * 0.75};
  for (double t : turn) {
    Vec2 dir{d0.x * std::cos(t) - d0.y * std::sin(t),
             d0.x * std::sin(t) + d0.y * std::cos(t)};
    // march the ray out of the domain, then bisect for the boundary point
    double lo = 0.0, hi = domain.distance_to_boundary(pole.position);
    while (hi < 8.0 * std::max(1.0, domain.char_length()) &&
           domain.contains(pole.position + hi * dir))
      hi *= 1.6;
    if (domain.contains(pole.position + hi * dir)) continue;
    for (int it = 0; it < 200; it++) {
      double mid = 0.5 * (lo + hi);
      if (domain.contains(pole.position + mid * dir))
        lo = mid;
      else
        hi = mid;
    }
    Vec2 probe = pole.position + hi * dir;
    auto near = domain.nearest_boundary_points(probe, 1e-12);
    if (near.empty()) continue;
    Vec2 anchor = near.front();
    // the straight segment must stay inside the domain
    bool ok = true;
    for (int i = 1; i < 64; i++) {
      Vec2 q = pole.position + (i / 64.0) * (anchor - pole.position);
      if (!domain.contains(q)) ok = false;
    }
    if (!ok) continue;
    if ((anchor - primary.boundary_end()).norm() <
        1e-6 * std::max(1.0, domain.char_length()))
      continue;
    try {
      return branch_cut_to(domain, pole, anchor);
    } catch (const PreconditionError&) {
      continue;
    }
  }
  throw PreconditionError("alternate_cut: no admissible second cut found");
}

CutIndependence cut_independence(const Domain& domain, const Pole& pole,
                                 const SolveOptions& opt, int m) {
  CutIndependence out;
  out.primary = branch_cut(domain, pole);
  out.alternate = alternate_cut(domain, pole, out.primary);
  // one shared base mesh constrained by both cuts: the two reduced systems
  // are then exactly gauge-equivalent
  Mesh mesh = triangulate(domain, opt.mesh_options(), &pole,
                          {out.primary, out.alternate});
  for (int which = 0; which < 2; which++) {
    CutMesh cm = insert_cut(mesh, which);
    FemSystem sys = assemble(cm, opt.order);
    ReducedSystem red = reduce(sys);
    auto pairs = smallest_eigenpairs(red.K, red.M, m, eigen_options(opt));
    auto& dst = which == 0 ? out.values_primary : out.values_alternate;
    for (const auto& p : pairs) dst.push_back(p.value);
  }
  return out;
}

}  // namespace abspec
