#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "abspec/spectral.hpp"
#include "oracles.hpp"

using namespace abspec;
namespace {
constexpr double kPi = std::numbers::pi;

double rel_err(double v, double ref) { return std::fabs(v - ref) / ref; }
}  // namespace

TEST_CASE("oracle sanity: frozen zeros") {
  CHECK(oracles::bessel_j_zero(0, 1) ==
        doctest::Approx(2.404825557695773).epsilon(1e-10));
  CHECK(oracles::bessel_j_zero(4, 1) ==
        doctest::Approx(7.588342434503804).epsilon(1e-8));
  CHECK(oracles::tanx_eq_x_root() ==
        doctest::Approx(4.493409457909064).epsilon(1e-10));
  // J_{1/2} vanishes at n*pi
  CHECK(oracles::bessel_j_zero(0.5, 1) == doctest::Approx(kPi).epsilon(1e-10));
  CHECK(oracles::bessel_j_zero(0.5, 2) ==
        doctest::Approx(2 * kPi).epsilon(1e-10));
  // the tan x = x root is the first zero of J_{3/2}
  CHECK(oracles::bessel_j_zero(1.5, 1) ==
        doctest::Approx(oracles::tanx_eq_x_root()).epsilon(1e-10));
}

TEST_CASE("square Dirichlet spectrum") {
  SolveOptions opt;
  opt.h = 0.05;
  auto pairs = dirichlet_spectrum(Domain::unit_square(), opt, 4);
  double expected[4] = {2 * kPi * kPi, 5 * kPi * kPi, 5 * kPi * kPi,
                        8 * kPi * kPi};
  for (int i = 0; i < 4; i++)
    CHECK(rel_err(pairs[i].value, expected[i]) < 5e-3);
  CHECK(std::is_sorted(pairs.begin(), pairs.end(),
                       [](const EigenPair& a, const EigenPair& b) {
                         return a.value < b.value;
                       }));
}

TEST_CASE("disk Dirichlet fundamental mode hits the Bessel zero") {
  SolveOptions opt;
  opt.h = 0.05;
  double j01 = oracles::bessel_j_zero(0, 1);
  auto pairs = dirichlet_spectrum(Domain::unit_disk(), opt, 1);
  CHECK(rel_err(pairs[0].value, j01 * j01) < 5e-3);
}

TEST_CASE("sector Dirichlet fundamental mode") {
  SolveOptions opt;
  opt.h = 0.05;
  double j41 = oracles::bessel_j_zero(4, 1);
  auto pairs = dirichlet_spectrum(Domain::sector(kPi / 4, 1.0), opt, 1);
  CHECK(rel_err(pairs[0].value, j41 * j41) < 1e-2);
}

TEST_CASE("disk-center magnetic spectrum matches half-integer Bessel zeros") {
  // Separation of variables: angular numbers |m + 1/2| come in pairs, so
  // every level at the center is double: pi^2, pi^2, z^2, z^2 with z the
  // first root of tan x = x. The same structure falls out of the
  // multiplicity-two characterization of interior maxima of lambda_1^a.
  SolveOptions opt;
  opt.h = 0.05;
  Domain disk = Domain::unit_disk();
  MagneticSolution sol = magnetic_spectrum(disk, Pole({0.0, 0.0}), opt, 4);
  double z32 = oracles::tanx_eq_x_root();
  CHECK(rel_err(sol.pairs[0].value, kPi * kPi) < 1e-2);
  CHECK(rel_err(sol.pairs[1].value, kPi * kPi) < 1e-2);
  CHECK(rel_err(sol.pairs[2].value, z32 * z32) < 1e-2);
  CHECK(rel_err(sol.pairs[3].value, z32 * z32) < 1e-2);

  // diamagnetic excess vs the Dirichlet ground state of the same mesh family
  auto dir = dirichlet_spectrum(disk, opt, 1);
  CHECK(sol.pairs[0].value > dir[0].value);
}

TEST_CASE("magnetic preconditions") {
  SolveOptions opt;
  opt.h = 0.1;
  CHECK_THROWS_AS(
      magnetic_spectrum(Domain::unit_square(), Pole({0.5, 0.0}), opt, 1),
      PreconditionError);
}

TEST_CASE("classification of hand vectors") {
  // two dofs swapped by sigma, M = identity
  Eigen::SparseMatrix<double> M(2, 2);
  M.insert(0, 0) = 1.0;
  M.insert(1, 1) = 1.0;
  M.makeCompressed();
  std::vector<int> perm{1, 0};
  double s = 0.0;
  Eigen::VectorXd sym(2), anti(2);
  sym << std::sqrt(0.5), std::sqrt(0.5);
  anti << std::sqrt(0.5), -std::sqrt(0.5);
  CHECK(classify(sym, perm, M, &s) == SymmetryTag::Symmetric);
  CHECK(s == doctest::Approx(1.0));
  CHECK(classify(anti, perm, M, &s) == SymmetryTag::Antisymmetric);
  CHECK(s == doctest::Approx(-1.0));
  Eigen::VectorXd mixed(2);
  mixed << 1.0, 0.0;
  CHECK(classify(mixed, perm, M, &s) == SymmetryTag::Mixed);
}

TEST_CASE("cover spectrum merges the two families") {
  SolveOptions opt;
  opt.h = 0.09;
  Domain sq = Domain::unit_square();
  Pole pole({0.5, 0.5});
  int m = 10;
  CoverConsistency cc = cover_consistency(sq, pole, opt, m);

  std::vector<double> merged = cc.dirichlet;
  merged.insert(merged.end(), cc.magnetic.begin(), cc.magnetic.end());
  std::sort(merged.begin(), merged.end());
  merged.resize(m);
  REQUIRE((int)cc.cover.size() == m);
  for (int i = 0; i < m; i++)
    CHECK(rel_err(cc.cover[i].value, merged[i]) < 1e-6);

  int sym = 0, anti = 0;
  for (const auto& v : cc.cover) {
    if (v.tag == SymmetryTag::Symmetric) sym++;
    if (v.tag == SymmetryTag::Antisymmetric) anti++;
  }
  CHECK(sym + anti == m);
  CHECK(sym > 0);
  CHECK(anti > 0);
}

TEST_CASE("disk-center cover tags alternate as the oracles dictate") {
  SolveOptions opt;
  opt.h = 0.07;
  CoverConsistency cc =
      cover_consistency(Domain::unit_disk(), Pole({0.0, 0.0}), opt, 2);
  double j01 = oracles::bessel_j_zero(0, 1);
  CHECK(rel_err(cc.cover[0].value, j01 * j01) < 1e-2);
  CHECK(cc.cover[0].tag == SymmetryTag::Symmetric);
  CHECK(rel_err(cc.cover[1].value, kPi * kPi) < 1e-2);
  CHECK(cc.cover[1].tag == SymmetryTag::Antisymmetric);
  // simple eigenvalues classify with a saturated correlation
  CHECK(std::fabs(cc.cover[0].correlation) > 0.999);
  CHECK(std::fabs(cc.cover[1].correlation) > 0.999);
}

TEST_CASE("two admissible cuts give the same magnetic spectrum") {
  SolveOptions opt;
  opt.h = 0.09;
  CutIndependence ci =
      cut_independence(Domain::unit_square(), Pole({0.4, 0.3}), opt, 4);
  CHECK((ci.primary.boundary_end() - ci.alternate.boundary_end()).norm() >
        0.2);
  for (int i = 0; i < 4; i++)
    CHECK(rel_err(ci.values_primary[i], ci.values_alternate[i]) < 1e-6);
}

TEST_CASE("lanczos path agrees with the dense oracle on a magnetic system") {
  SolveOptions opt;
  opt.h = 0.12;
  Domain disk = Domain::unit_disk();
  Pole pole({0.3, 0.2});
  Cut cut = branch_cut(disk, pole);
  Mesh mesh = triangulate(disk, opt.mesh_options(), &pole, {cut});
  CutMesh cm = insert_cut(mesh);
  FemSystem sys = assemble(cm, 2);
  ReducedSystem red = reduce(sys);
  REQUIRE(red.n <= 2000);
  auto it = smallest_eigenpairs(red.K, red.M, 5);
  auto dn = dense_eigenpairs(red.K, red.M, 5);
  for (int i = 0; i < 5; i++)
    CHECK(it[i].value == doctest::Approx(dn[i].value).epsilon(1e-9));
}

TEST_CASE("antisymmetric reduction equals the cover antisymmetric family") {
  SolveOptions opt;
  opt.h = 0.12;
  Domain sq = Domain::unit_square();
  Pole pole({0.5, 0.5});
  CoverConsistency cc = cover_consistency(sq, pole, opt, 8);
  std::vector<double> anti;
  for (const auto& v : cc.cover)
    if (v.tag == SymmetryTag::Antisymmetric) anti.push_back(v.value);
  REQUIRE(anti.size() >= 2);
  for (size_t i = 0; i < std::min(anti.size(), cc.magnetic.size()); i++)
    CHECK(rel_err(anti[i], cc.magnetic[i]) < 1e-8);
}
