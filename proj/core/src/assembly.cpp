#include "abspec/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "abspec/errors.hpp"

namespace abspec {

namespace {

inline std::uint64_t ekey(int a, int b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
}

// Degree-4 rule on the reference triangle (6 points, weights sum to 1).
struct QuadPoint {
  double l0, l1, l2, w;
};
const QuadPoint kMassRule[6] = {
    {0.108103018168070, 0.445948490915965, 0.445948490915965,
     0.223381589678011},
    {0.445948490915965, 0.108103018168070, 0.445948490915965,
     0.223381589678011},
    {0.445948490915965, 0.445948490915965, 0.108103018168070,
     0.223381589678011},
    {0.816847572980459, 0.091576213509771, 0.091576213509771,
     0.109951743655322},
    {0.091576213509771, 0.816847572980459, 0.091576213509771,
     0.109951743655322},
    {0.091576213509771, 0.091576213509771, 0.816847572980459,
     0.109951743655322}};

// Mid-edge rule, exact for quadratics (P2 stiffness integrands).
const QuadPoint kGradRule[3] = {{0.5, 0.5, 0.0, 1.0 / 3.0},
                                {0.0, 0.5, 0.5, 1.0 / 3.0},
                                {0.5, 0.0, 0.5, 1.0 / 3.0}};

void p2_shapes(double l0, double l1, double l2, double n[6]) {
  n[0] = l0 * (2.0 * l0 - 1.0);
  n[1] = l1 * (2.0 * l1 - 1.0);
  n[2] = l2 * (2.0 * l2 - 1.0);
  n[3] = 4.0 * l1 * l2;  // edge opposite vertex 0
  n[4] = 4.0 * l2 * l0;  // edge opposite vertex 1
  n[5] = 4.0 * l0 * l1;  // edge opposite vertex 2
}

struct ElementMatrices {
  // local stiffness and mass, sized 3 (P1) or 6 (P2)
  double K[6][6];
  double M[6][6];
  int n;
};

ElementMatrices element_matrices(const Vec2& a, const Vec2& b, const Vec2& c,
                                 int order) {
  ElementMatrices em{};
  double area2 = (b - a).cross(c - a);  // 2*area
  if (area2 <= 0.0)
    throw NumericalError("assembly: inverted element (non-positive Jacobian)");
  double area = 0.5 * area2;

  // gradients of barycentric coordinates
  Vec2 grad_l[3] = {{(b.y - c.y) / area2, (c.x - b.x) / area2},
                    {(c.y - a.y) / area2, (a.x - c.x) / area2},
                    {(a.y - b.y) / area2, (b.x - a.x) / area2}};

  if (order == 1) {
    em.n = 3;
    for (int i = 0; i < 3; i++)
      for (int j = 0; j < 3; j++) {
        em.K[i][j] = area * grad_l[i].dot(grad_l[j]);
        em.M[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
      }
    return em;
  }

  em.n = 6;
  for (const auto& q : kGradRule) {
    double l[3] = {q.l0, q.l1, q.l2};
    Vec2 g[6];
    for (int i = 0; i < 3; i++)
      g[i] = grad_l[i] * (4.0 * l[i] - 1.0);
    g[3] = (grad_l[1] * l[2] + grad_l[2] * l[1]) * 4.0;
    g[4] = (grad_l[2] * l[0] + grad_l[0] * l[2]) * 4.0;
    g[5] = (grad_l[0] * l[1] + grad_l[1] * l[0]) * 4.0;
    for (int i = 0; i < 6; i++)
      for (int j = 0; j < 6; j++)
        em.K[i][j] += area * q.w * g[i].dot(g[j]);
  }
  for (const auto& q : kMassRule) {
    double n[6];
    p2_shapes(q.l0, q.l1, q.l2, n);
    for (int i = 0; i < 6; i++)
      for (int j = 0; j < 6; j++) em.M[i][j] += area * q.w * n[i] * n[j];
  }
  return em;
}

DofMap build_dofmap(const Mesh& mesh, int order) {
  if (order != 1 && order != 2)
    throw PreconditionError("assembly: element order must be 1 or 2");
  DofMap dm;
  dm.order = order;
  dm.n_vertices = mesh.vertex_count();
  if (order == 1) {
    dm.n_dofs = dm.n_vertices;
  } else {
    std::vector<std::array<int, 2>> edges;
    {
      std::unordered_map<std::uint64_t, char> seen;
      for (const auto& t : mesh.triangles) {
        for (int i = 0; i < 3; i++) {
          int u = t.v[i], v = t.v[(i + 1) % 3];
          auto key = ekey(u, v);
          if (seen.emplace(key, 1).second)
            edges.push_back({std::min(u, v), std::max(u, v)});
        }
      }
    }
    std::sort(edges.begin(), edges.end());
    dm.edges = std::move(edges);
    for (int e = 0; e < (int)dm.edges.size(); e++)
      dm.edge_dof[ekey(dm.edges[e][0], dm.edges[e][1])] = dm.n_vertices + e;
    dm.n_dofs = dm.n_vertices + (int)dm.edges.size();
  }
  dm.status.assign(dm.n_dofs, DofStatus::Free);
  dm.master.assign(dm.n_dofs, -1);
  return dm;
}

// Count triangle uses per edge (1 = border edge of the stored topology).
std::unordered_map<std::uint64_t, int> edge_usage(const Mesh& mesh) {
  std::unordered_map<std::uint64_t, int> use;
  for (const auto& t : mesh.triangles)
    for (int i = 0; i < 3; i++) use[ekey(t.v[i], t.v[(i + 1) % 3])]++;
  return use;
}

void mark_dirichlet_boundary(const Mesh& mesh, DofMap& dm,
                             const std::unordered_map<std::uint64_t, int>& use,
                             const std::unordered_map<std::uint64_t, char>*
                                 cut_edges) {
  for (int v = 0; v < mesh.vertex_count(); v++)
    if (mesh.boundary_vertex[v]) dm.status[v] = DofStatus::Dirichlet;
  if (dm.order == 2) {
    for (int e = 0; e < (int)dm.edges.size(); e++) {
      auto key = ekey(dm.edges[e][0], dm.edges[e][1]);
      if (use.at(key) == 1 && (!cut_edges || !cut_edges->count(key)))
        dm.status[dm.n_vertices + e] = DofStatus::Dirichlet;
    }
  }
}

FemSystem assemble_impl(const Mesh& mesh, int order, DofMap dm) {
  std::vector<Eigen::Triplet<double>> kt, mt;
  kt.reserve(mesh.triangle_count() * 21);
  mt.reserve(mesh.triangle_count() * 21);
  for (const auto& t : mesh.triangles) {
    auto em = element_matrices(mesh.points[t.v[0]], mesh.points[t.v[1]],
                               mesh.points[t.v[2]], order);
    int dofs[6];
    dofs[0] = t.v[0];
    dofs[1] = t.v[1];
    dofs[2] = t.v[2];
    if (order == 2) {
      dofs[3] = dm.edge_dof_of(t.v[1], t.v[2]);
      dofs[4] = dm.edge_dof_of(t.v[2], t.v[0]);
      dofs[5] = dm.edge_dof_of(t.v[0], t.v[1]);
    }
    for (int i = 0; i < em.n; i++) {
      for (int j = 0; j < em.n; j++) {
        if (dofs[i] < dofs[j]) continue;  // lower triangle only
        kt.emplace_back(dofs[i], dofs[j], em.K[i][j]);
        mt.emplace_back(dofs[i], dofs[j], em.M[i][j]);
      }
    }
  }
  Eigen::SparseMatrix<double> K(dm.n_dofs, dm.n_dofs), M(dm.n_dofs, dm.n_dofs);
  K.setFromTriplets(kt.begin(), kt.end());
  M.setFromTriplets(mt.begin(), mt.end());
  FemSystem sys;
  sys.K = SymmetricSparse(std::move(K));
  sys.M = SymmetricSparse(std::move(M));
  sys.dofmap = std::move(dm);
  return sys;
}

}  // namespace

int DofMap::edge_dof_of(int u, int v) const {
  auto it = edge_dof.find(ekey(u, v));
  if (it == edge_dof.end())
    throw NumericalError("dofmap: unknown edge");
  return it->second;
}

int DofMap::free_count() const {
  int n = 0;
  for (auto s : status)
    if (s == DofStatus::Free) n++;
  return n;
}

FemSystem assemble(const Mesh& mesh, int order) {
  DofMap dm = build_dofmap(mesh, order);
  auto use = edge_usage(mesh);
  mark_dirichlet_boundary(mesh, dm, use, nullptr);
  return assemble_impl(mesh, order, std::move(dm));
}

FemSystem assemble(const CutMesh& cm, int order) {
  const Mesh& mesh = cm.mesh;
  DofMap dm = build_dofmap(mesh, order);
  auto use = edge_usage(mesh);

  // cut edges are interior despite having a single incident triangle
  std::unordered_map<std::uint64_t, char> cut_edges;
  int K = (int)cm.chain_left.size() - 1;
  for (int i = 0; i < K; i++) {
    cut_edges[ekey(cm.chain_left[i], cm.chain_left[i + 1])] = 1;
    cut_edges[ekey(cm.chain_right[i], cm.chain_right[i + 1])] = 1;
  }
  mark_dirichlet_boundary(mesh, dm, use, &cut_edges);

  // pole: u(a) = -u(a) forces zero
  dm.status[cm.pole_vertex] = DofStatus::Dirichlet;

  // vertex pairs (interior cut vertices), sign -1
  for (const auto& pr : cm.pairs) {
    if (dm.status[pr.left] == DofStatus::Free &&
        dm.status[pr.right] == DofStatus::Free) {
      dm.status[pr.right] = DofStatus::Slave;
      dm.master[pr.right] = pr.left;
    }
  }
  // edge-midpoint pairs for P2
  if (order == 2) {
    for (int i = 0; i < K; i++) {
      int dl = dm.edge_dof_of(cm.chain_left[i], cm.chain_left[i + 1]);
      int dr = dm.edge_dof_of(cm.chain_right[i], cm.chain_right[i + 1]);
      if (dm.status[dl] == DofStatus::Free &&
          dm.status[dr] == DofStatus::Free) {
        dm.status[dr] = DofStatus::Slave;
        dm.master[dr] = dl;
      }
    }
  }
  return assemble_impl(mesh, order, std::move(dm));
}

FemSystem assemble(const CoverMesh& cover, int order) {
  DofMap dm = build_dofmap(cover.mesh, order);
  auto use = edge_usage(cover.mesh);
  mark_dirichlet_boundary(cover.mesh, dm, use, nullptr);
  return assemble_impl(cover.mesh, order, std::move(dm));
}

ReducedSystem reduce(const FemSystem& sys) {
  const DofMap& dm = sys.dofmap;
  ReducedSystem red;
  red.map.assign(dm.n_dofs, -1);
  red.sign.assign(dm.n_dofs, 1.0);
  int n = 0;
  for (int i = 0; i < dm.n_dofs; i++)
    if (dm.status[i] == DofStatus::Free) red.map[i] = n++;
  for (int i = 0; i < dm.n_dofs; i++) {
    if (dm.status[i] == DofStatus::Slave) {
      int m = dm.master[i];
      if (m < 0 || dm.status[m] != DofStatus::Free)
        throw NumericalError("reduce: slave without a free master");
      red.map[i] = red.map[m];
      red.sign[i] = -1.0;
    }
  }
  red.n = n;
  if (n == 0)
    throw PreconditionError("reduce: empty system (all DOFs eliminated)");

  auto fold = [&](const SymmetricSparse& a) {
    std::vector<Eigen::Triplet<double>> trip;
    const auto& low = a.lower();
    for (int col = 0; col < low.outerSize(); col++) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(low, col); it;
           ++it) {
        int i = (int)it.row(), j = (int)it.col();
        int ri = red.map[i], rj = red.map[j];
        if (ri < 0 || rj < 0) continue;
        double v = it.value() * red.sign[i] * red.sign[j];
        if (i == j) {
          trip.emplace_back(ri, rj, v);
        } else {
          // symmetric pair (i,j) and (j,i)
          int a1 = std::max(ri, rj), b1 = std::min(ri, rj);
          if (ri == rj)
            trip.emplace_back(ri, rj, 2.0 * v);
          else
            trip.emplace_back(a1, b1, v);
        }
      }
    }
    Eigen::SparseMatrix<double> out(n, n);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
  };
  red.K = fold(sys.K);
  red.M = fold(sys.M);

  // sanity: the reduced mass matrix must have a positive diagonal
  for (int i = 0; i < n; i++) {
    if (red.M.coeff(i, i) <= 0.0)
      throw NumericalError("reduce: singular reduced mass matrix");
  }
  return red;
}

Eigen::VectorXd expand_to_full(const ReducedSystem& red,
                               const Eigen::VectorXd& v) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(red.map.size());
  for (size_t i = 0; i < red.map.size(); i++)
    if (red.map[i] >= 0) full[i] = red.sign[i] * v[red.map[i]];
  return full;
}

std::vector<int> deck_dof_permutation(const CoverMesh& cover,
                                      const DofMap& dofmap) {
  std::vector<int> perm(dofmap.n_dofs, -1);
  for (int v = 0; v < dofmap.n_vertices; v++) perm[v] = cover.deck[v];
  if (dofmap.order == 2) {
    for (int e = 0; e < (int)dofmap.edges.size(); e++) {
      int u = cover.deck[dofmap.edges[e][0]];
      int v = cover.deck[dofmap.edges[e][1]];
      perm[dofmap.n_vertices + e] = dofmap.edge_dof_of(u, v);
    }
  }
  return perm;
}

double FemField::eval(const Vec2& p) const {
  std::array<double, 3> bary;
  int t = mesh->locate(p, bary);
  if (t < 0)
    throw PreconditionError("fem eval: point outside the mesh");
  const Triangle& tri = mesh->triangles[t];
  if (dofmap->order == 1) {
    return bary[0] * values[tri.v[0]] + bary[1] * values[tri.v[1]] +
           bary[2] * values[tri.v[2]];
  }
  double n[6];
  p2_shapes(bary[0], bary[1], bary[2], n);
  int dofs[6] = {tri.v[0],
                 tri.v[1],
                 tri.v[2],
                 dofmap->edge_dof_of(tri.v[1], tri.v[2]),
                 dofmap->edge_dof_of(tri.v[2], tri.v[0]),
                 dofmap->edge_dof_of(tri.v[0], tri.v[1])};
  double s = 0.0;
  for (int i = 0; i < 6; i++) s += n[i] * values[dofs[i]];
  return s;
}

void dump_matrix(std::ostream& os, const SymmetricSparse& m) {
  char buf[96];
  const auto& low = m.lower();
  for (int col = 0; col < low.outerSize(); col++) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(low, col); it; ++it) {
      std::snprintf(buf, sizeof buf, "%d %d %.15g\n", (int)it.row() + 1,
                    (int)it.col() + 1, it.value());
      os << buf;
    }
  }
}

}  // namespace abspec
