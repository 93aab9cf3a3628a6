#include <doctest.h>

#include <cmath>
#include <sstream>

#include "abspec/assembly.hpp"
#include "abspec/eigensolve.hpp"
#include "oracles.hpp"

using namespace abspec;

namespace {

Mesh reference_triangle() {
  Mesh m;
  m.points = {{0, 0}, {1, 0}, {0, 1}};
  m.triangles = {{{0, 1, 2}}};
  m.boundary_vertex = {0, 0, 0};  // keep everything free
  return m;
}

Mesh translated(const Mesh& m, Vec2 d) {
  Mesh out = m;
  for (auto& p : out.points) p = p + d;
  return out;
}

Mesh rotated90(const Mesh& m) {
  Mesh out = m;
  for (auto& p : out.points) p = {-p.y, p.x};  // exact in floating point
  return out;
}

double dense_coeff(const SymmetricSparse& s, int i, int j) {
  if (i < j) std::swap(i, j);
  return s.lower().coeff(i, j);
}

}  // namespace

TEST_CASE("P1 matrices on the reference triangle match hand integration") {
  FemSystem sys = assemble(reference_triangle(), 1);
  for (int i = 0; i < 3; i++) {
    for (int j = 0; j < 3; j++) {
      CHECK(dense_coeff(sys.K, i, j) ==
            doctest::Approx(oracles::kRefStiffness[i][j]).epsilon(1e-14));
      CHECK(dense_coeff(sys.M, i, j) ==
            doctest::Approx(oracles::kRefMass[i][j]).epsilon(1e-14));
    }
  }
}

TEST_CASE("stiffness row sums vanish before elimination") {
  Domain sq = Domain::unit_square();
  MeshOptions opt;
  opt.h = 0.2;
  Mesh m = triangulate(sq, opt);
  for (int order : {1, 2}) {
    FemSystem sys = assemble(m, order);
    Eigen::VectorXd rs = sys.K.row_sums();
    CHECK(rs.cwiseAbs().maxCoeff() < 1e-10);
    // mass total = area
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(sys.M.dimension());
    CHECK(ones.dot(sys.M.multiply(ones)) ==
          doctest::Approx(m.total_area()).epsilon(1e-12));
  }
}

TEST_CASE("translation leaves the matrices unchanged") {
  Domain sq = Domain::unit_square();
  MeshOptions opt;
  opt.h = 0.25;
  Mesh m = triangulate(sq, opt);
  Mesh mt = translated(m, {0.37, -1.25});
  for (int order : {1, 2}) {
    FemSystem a = assemble(m, order);
    FemSystem b = assemble(mt, order);
    double scale = a.K.lower().coeffs().cwiseAbs().maxCoeff();
    Eigen::SparseMatrix<double> dk = a.K.lower() - b.K.lower();
    Eigen::SparseMatrix<double> dm = a.M.lower() - b.M.lower();
    CHECK(dk.coeffs().cwiseAbs().maxCoeff() < 1e-12 * scale);
    CHECK(dm.coeffs().cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("inverted elements are rejected") {
  Mesh bad = reference_triangle();
  std::swap(bad.triangles[0].v[1], bad.triangles[0].v[2]);  // now clockwise
  CHECK_THROWS_AS(assemble(bad, 1), NumericalError);
}

TEST_CASE("reduce with no constraints is the identity") {
  Mesh m = reference_triangle();
  FemSystem sys = assemble(m, 1);
  ReducedSystem red = reduce(sys);
  CHECK(red.n == 3);
  for (int i = 0; i < 3; i++)
    for (int j = 0; j <= i; j++)
      CHECK(red.K.coeff(i, j) ==
            doctest::Approx(dense_coeff(sys.K, i, j)).epsilon(1e-15));
}

TEST_CASE("all-Dirichlet system errors") {
  Mesh m = reference_triangle();
  m.boundary_vertex = {1, 1, 1};
  FemSystem sys = assemble(m, 1);
  CHECK_THROWS_AS(reduce(sys), PreconditionError);
}

TEST_CASE("constraint folding preserves the quadratic form") {
  Domain sq = Domain::unit_square();
  Pole pole({0.5, 0.5});
  Cut cut = branch_cut(sq, pole);
  MeshOptions opt;
  opt.h = 0.18;
  Mesh m = triangulate(sq, opt, &pole, {cut});
  CutMesh cm = insert_cut(m);

  for (int order : {1, 2}) {
    FemSystem sys = assemble(cm, order);
    ReducedSystem red = reduce(sys);
    // deterministic pseudo-random reduced vector
    Eigen::VectorXd v(red.n);
    for (int i = 0; i < red.n; i++)
      v[i] = std::sin(1.0 + 7.0 * i) * (1.0 + 0.1 * (i % 5));
    Eigen::VectorXd full = expand_to_full(red, v);
    // full vector respects constraints by construction; compare forms
    double qf_full = sys.K.quadratic_form(full);
    double qf_red = v.dot(red.K.selfadjointView<Eigen::Lower>() * v);
    CHECK(qf_red == doctest::Approx(qf_full).epsilon(1e-12));
    double mf_full = sys.M.quadratic_form(full);
    double mf_red = v.dot(red.M.selfadjointView<Eigen::Lower>() * v);
    CHECK(mf_red == doctest::Approx(mf_full).epsilon(1e-12));
  }
}

TEST_CASE("cut pair bookkeeping on the cut mesh") {
  Domain sq = Domain::unit_square();
  Pole pole({0.5, 0.5});
  Cut cut = branch_cut(sq, pole);
  MeshOptions opt;
  opt.h = 0.18;
  Mesh m = triangulate(sq, opt, &pole, {cut});
  CutMesh cm = insert_cut(m);
  FemSystem sys = assemble(cm, 2);
  const DofMap& dm = sys.dofmap;

  CHECK(dm.status[cm.pole_vertex] == DofStatus::Dirichlet);
  int slaves = 0;
  for (int i = 0; i < dm.n_dofs; i++)
    if (dm.status[i] == DofStatus::Slave) slaves++;
  // one per interior cut vertex plus one per cut edge (P2 midpoints)
  int expected = (int)cm.pairs.size() + ((int)cm.chain_left.size() - 1);
  CHECK(slaves == expected);
}

TEST_CASE("rigid rotation leaves the spectrum unchanged") {
  Domain sq = Domain::unit_square();
  MeshOptions opt;
  opt.h = 0.3;
  Mesh m = triangulate(sq, opt);
  Mesh mr = rotated90(m);
  FemSystem a = assemble(m, 2);
  FemSystem b = assemble(mr, 2);
  ReducedSystem ra = reduce(a), rb = reduce(b);
  auto ea = dense_eigenpairs(ra.K, ra.M, 1);
  auto eb = dense_eigenpairs(rb.K, rb.M, 1);
  CHECK(ea[0].value == doctest::Approx(eb[0].value).epsilon(1e-10));
}

TEST_CASE("matrix dump is 1-based lower triangle") {
  FemSystem sys = assemble(reference_triangle(), 1);
  std::ostringstream os;
  dump_matrix(os, sys.K);
  std::istringstream in(os.str());
  int i, j;
  double v;
  int rows = 0;
  while (in >> i >> j >> v) {
    CHECK(i >= 1);
    CHECK(j >= 1);
    CHECK(i >= j);
    rows++;
  }
  CHECK(rows == 6);  // dense lower triangle of a 3x3
}
