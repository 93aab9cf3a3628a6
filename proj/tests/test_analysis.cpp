#include <doctest.h>

#include <cmath>
#include <numbers>

#include "abspec/analysis.hpp"

using namespace abspec;
namespace {
constexpr double kPi = std::numbers::pi;

std::vector<double> circle_thetas(int n, double start) {
  std::vector<double> t(n);
  for (int i = 0; i < n; i++) t[i] = start + 2.0 * kPi * (i + 0.5) / n;
  return t;
}

SweepTable synthetic_path(int n, int m,
                          const std::vector<std::vector<double>>& values) {
  SweepTable t;
  t.domain_id = "synthetic";
  t.h = 0.05;
  t.order = 2;
  t.m = m;
  for (int i = 0; i < n; i++) {
    SweepRow row;
    row.pole = {i * 0.01, 0.0};
    row.values = values[i];
    row.clusters.assign(m, 0);
    row.ok = true;
    t.rows.push_back(row);
  }
  return t;
}

}  // namespace

TEST_CASE("sweep over the coarse square grid") {
  Domain sq = Domain::unit_square();
  SolveOptions opt;
  opt.h = 0.09;
  auto poles = pole_grid(sq, 4);
  SweepTable table = sweep(sq, poles, opt, 2);
  REQUIRE(table.rows.size() == 9);
  for (const auto& row : table.rows) {
    CHECK(row.ok);
    CHECK(row.values.size() == 2);
    CHECK(row.values[0] > 0.0);
  }
  // dihedral symmetry of the square transported to the operator
  auto find = [&](double x, double y) -> const SweepRow& {
    for (const auto& r : table.rows)
      if (r.pole.x == doctest::Approx(x) && r.pole.y == doctest::Approx(y))
        return r;
    throw std::runtime_error("pole not found");
  };
  const SweepRow& a = find(0.25, 0.25);
  const SweepRow& b = find(0.75, 0.25);
  for (int j = 0; j < 2; j++)
    CHECK(std::fabs(a.values[j] - b.values[j]) / a.values[j] < 1e-3);

  // landscape extremum: the center maximizes lambda_1^a on the grid
  double best = -1e300;
  Vec2 argmax{0, 0};
  for (const auto& r : table.rows) {
    if (r.values[0] > best) {
      best = r.values[0];
      argmax = r.pole;
    }
  }
  CHECK(argmax.x == doctest::Approx(0.5));
  CHECK(argmax.y == doctest::Approx(0.5));
}

TEST_CASE("sweep records per-pole failures without dying") {
  Domain sq = Domain::unit_square();
  SolveOptions opt;
  opt.h = 0.2;
  opt.budget = 40;  // guarantees a budget error per pole
  std::vector<Pole> poles{Pole({0.5, 0.5})};
  SweepTable table = sweep(sq, poles, opt, 1);
  REQUIRE(table.rows.size() == 1);
  CHECK(!table.rows[0].ok);
  CHECK(!table.rows[0].error.empty());
}

TEST_CASE("sweep preconditions") {
  Domain sq = Domain::unit_square();
  SolveOptions opt;
  CHECK_THROWS_AS(sweep(sq, {}, opt, 1), PreconditionError);
  CHECK_THROWS_AS(sweep(sq, {Pole({2.0, 0.0})}, opt, 1), PreconditionError);
}

TEST_CASE("boundary convergence on the square") {
  Domain sq = Domain::unit_square();
  SolveOptions opt;
  opt.h = 0.06;
  BoundaryConvergence bc = boundary_convergence(
      sq, 1, {0.5, 0.0}, {0.2, 0.1, 0.05, 0.02}, opt);
  CHECK(bc.pass);
  for (size_t i = 0; i + 1 < bc.gaps.size(); i++)
    CHECK(bc.gaps[i + 1] < bc.gaps[i]);
  // strict diamagnetic excess at d = 0.2
  CHECK(bc.magnetic[0] > bc.lambda_ref);

  CHECK_THROWS_AS(boundary_convergence(sq, 1, {0.5, 0.0}, {0.2}, opt),
                  PreconditionError);
  CHECK_THROWS_AS(
      boundary_convergence(sq, 1, {0.5, 0.5}, {0.2, 0.1}, opt),
      PreconditionError);
}

TEST_CASE("nodal detection on synthetic fields") {
  int n = 256;
  auto theta = circle_thetas(n, 0.3);

  SUBCASE("pure k=3 harmonic") {
    std::vector<double> v(n);
    for (int i = 0; i < n; i++) v[i] = std::cos(1.5 * theta[i]);
    NodalReport r = nodal_order_from_samples(theta, v, 0.05);
    CHECK(r.k == 3);
    CHECK(r.ray_angles.size() == 3);
    CHECK(ray_geometry(r) < 1e-10);
    CHECK(r.fit_residual < 1e-12);
    // paper-scale coefficients: samples were not r^{k/2}/k scaled, so the
    // fit returns c_k = k / r^{k/2}
    CHECK(r.c_k == doctest::Approx(3.0 / std::pow(0.05, 1.5)).epsilon(1e-10));
  }

  SUBCASE("k=1 dominates a small k=3 admixture") {
    std::vector<double> v(n);
    for (int i = 0; i < n; i++)
      v[i] = 0.9 * std::sin(0.5 * theta[i]) + 0.1 * std::cos(1.5 * theta[i]);
    NodalReport r = nodal_order_from_samples(theta, v, 0.05);
    CHECK(r.k == 1);
    CHECK_THROWS_AS(ray_geometry(r), PreconditionError);
  }

  SUBCASE("zero-graze samples are skipped, parity stays odd") {
    std::vector<double> v(n);
    for (int i = 0; i < n; i++) {
      v[i] = std::cos(2.5 * theta[i]);
      if (std::fabs(v[i]) < 1e-12) v[i] = 0.0;
    }
    NodalReport r = nodal_order_from_samples(theta, v, 0.04);
    CHECK(r.k == 5);
    CHECK(r.k % 2 == 1);
  }

  SUBCASE("silent circle errors out") {
    std::vector<double> v(n, 0.0);
    CHECK_THROWS_AS(nodal_order_from_samples(theta, v, 0.05), NumericalError);
  }

  SUBCASE("order cap") {
    std::vector<double> v(n);
    for (int i = 0; i < n; i++) v[i] = std::cos(5.5 * theta[i]);
    NodalOptions opt;
    opt.max_k = 9;
    CHECK_THROWS_AS(nodal_order_from_samples(theta, v, 0.05, opt),
                    NumericalError);
  }
}

TEST_CASE("nodal order of the disk-center ground state") {
  Domain disk = Domain::unit_disk();
  SolveOptions opt;
  opt.h = 0.05;
  MagneticSolution sol = magnetic_spectrum(disk, Pole({0.0, 0.0}), opt, 2);
  // lambda_1 at the center is a double level, but any eigenvector of it is
  // J_{1/2} times a single half-harmonic: exactly one nodal ray
  NodalReport r = nodal_order(sol, 1, 0.05);
  CHECK(r.k == 1);
  CHECK(r.ray_angles.size() == 1);
  // stability under probe halving
  NodalReport r2 = nodal_order(sol, 1, 0.025);
  CHECK(r2.k == 1);
  // c_k^2 + d_k^2 must be nonzero (leading coefficient exists)
  CHECK(r.c_k * r.c_k + r.d_k * r.d_k > 0.0);

  // a detected cluster refuses the analysis
  MagneticSolution clustered = sol;
  clustered.pairs[1].cluster = clustered.pairs[0].cluster;
  CHECK_THROWS_AS(nodal_order(clustered, 2, 0.05), PreconditionError);
  // oversized probe radius refuses
  CHECK_THROWS_AS(nodal_order(sol, 1, 0.6), PreconditionError);
}

TEST_CASE("rate fit at a k=1 pole is reported without a bound") {
  // disk center, j=1: the (k+1)/2 vanishing bound only applies for k >= 3,
  // so no bound is asserted, but the fit itself still runs and reports a
  // slope
  Domain disk = Domain::unit_disk();
  SolveOptions opt;
  opt.h = 0.06;
  RateFitOptions fo;
  fo.require_simple = false;  // pi^2 is the center double
  RateFit fit =
      rate_fit(disk, {0.0, 0.0}, 1, {1.0, 0.0}, {0.2, 0.15, 0.1}, opt, fo);
  CHECK(fit.k == 1);
  CHECK(fit.bound == doctest::Approx(1.0));
  CHECK(fit.p > 0.0);  // the gap shrinks toward the center
}

TEST_CASE("rate fit recovers synthetic power laws") {
  for (double q : {1.0, 2.0, 3.0}) {
    std::vector<double> radii{0.08, 0.06, 0.04, 0.03};
    std::vector<double> gaps;
    for (double r : radii) gaps.push_back(5.0 * std::pow(r, q));
    RateFit fit = rate_fit_from_gaps(radii, gaps);
    CHECK(std::fabs(fit.p - q) / q < 1e-2);
    CHECK(fit.p_lo <= fit.p);
    CHECK(fit.p_hi >= fit.p);
  }
  CHECK_THROWS_AS(rate_fit_from_gaps({0.1, 0.05}, {1.0, 0.5}),
                  PreconditionError);
  CHECK_THROWS_AS(rate_fit_from_gaps({0.1, 0.2, 0.3}, {1, 1, 1}),
                  PreconditionError);
}

TEST_CASE("smoothness scan on synthetic paths") {
  int n = 41;

  SUBCASE("constant sequence has no kinks") {
    std::vector<std::vector<double>> vals(n, {10.0, 20.0});
    SmoothnessScan s = smoothness_scan(synthetic_path(n, 2, vals), 1);
    CHECK(s.kinks.empty());
    CHECK(s.flagged.empty());
  }

  SUBCASE("kink co-located with a crossing is not flagged") {
    std::vector<std::vector<double>> vals;
    for (int i = 0; i < n; i++) {
      double x = i / double(n - 1);
      double l1 = 10.0 + 5.0 * x - 12.0 * std::fabs(x - 0.5);
      double l2 = l1 + 0.02 + 8.0 * std::fabs(x - 0.5);
      vals.push_back({l1, l2});
    }
    SmoothnessScan s = smoothness_scan(synthetic_path(n, 2, vals), 1);
    REQUIRE(s.kinks.size() == 1);
    CHECK(std::abs(s.kinks[0] - (n - 1) / 2) <= 1);
    REQUIRE(s.crossings.size() >= 1);
    CHECK(s.flagged.empty());
  }

  SUBCASE("kink at a simple point is flagged") {
    std::vector<std::vector<double>> vals;
    for (int i = 0; i < n; i++) {
      double x = i / double(n - 1);
      double l1 = 10.0 - 12.0 * std::fabs(x - 0.5);
      vals.push_back({l1, l1 + 30.0});  // wide gap everywhere
    }
    SmoothnessScan s = smoothness_scan(synthetic_path(n, 2, vals), 1);
    REQUIRE(s.kinks.size() == 1);
    CHECK(s.flagged.size() == 1);
  }

  SUBCASE("non-uniform paths are rejected") {
    std::vector<std::vector<double>> vals(n, {10.0, 20.0});
    SweepTable t = synthetic_path(n, 2, vals);
    t.rows[3].pole.x += 0.004;
    CHECK_THROWS_AS(smoothness_scan(t, 1), PreconditionError);
  }
}
