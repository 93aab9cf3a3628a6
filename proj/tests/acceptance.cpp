// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails. Slow pipelines run with pinned mesh parameters; every
// tolerance is fixed here, not configurable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "abspec/analysis.hpp"
#include "abspec/spectral.hpp"
#include "oracles.hpp"

using namespace abspec;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) failures++;
}

double rel_err(double v, double ref) { return std::fabs(v - ref) / ref; }

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// ---------------------------------------------------------------- 1
void criterion_disk_center() {
  // The Bessel oracle (run ahead of the build) gives the center spectrum
  // with multiplicity: |m + 1/2| pairs make every level double, so the
  // J_{1/2} value pi^2 occupies indexes 1 AND 2, and the J_{3/2} double
  // (first root of tan x = x, squared) sits at indexes 3 and 4. Both stated
  // reference values are verified at the stated 1% with that indexing; the
  // dense fallback oracle confirms the multiplicity structure.
  try {
    SolveOptions opt;
    opt.h = 0.03;
    auto t0 = std::chrono::steady_clock::now();
    MagneticSolution sol =
        magnetic_spectrum(Domain::unit_disk(), Pole({0.0, 0.0}), opt, 4);
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    double z = oracles::tanx_eq_x_root();  // first zero of J_{3/2}
    double lam12 = kPi * kPi, lam34 = z * z;
    double e1 = rel_err(sol.pairs[0].value, lam12);
    double e2 = rel_err(sol.pairs[1].value, lam12);
    double e3 = rel_err(sol.pairs[2].value, lam34);
    double e4 = rel_err(sol.pairs[3].value, lam34);
    bool pass = e1 < 0.01 && e2 < 0.01 && e3 < 0.01 && e4 < 0.01 &&
                sol.red.n <= 50000 && secs < 60.0;
    report(1, pass,
           fmt("disk center: l1,l2=%.4f,%.4f (pi^2 double, err %.1e/%.1e), "
               "l3,l4=%.4f,%.4f (ref %.4f double, err %.1e/%.1e), dofs=%d, "
               "%.1fs",
               sol.pairs[0].value, sol.pairs[1].value, e1, e2,
               sol.pairs[2].value, sol.pairs[3].value, lam34, e3, e4,
               sol.red.n, secs));
  } catch (const std::exception& e) {
    report(1, false, std::string("exception: ") + e.what());
  }
}

// ---------------------------------------------------------------- 2
void criterion_square_dirichlet() {
  try {
    SolveOptions opt;
    opt.h = 0.03;
    auto pairs = dirichlet_spectrum(Domain::unit_square(), opt, 4);
    double refs[4] = {2 * kPi * kPi, 5 * kPi * kPi, 5 * kPi * kPi,
                      8 * kPi * kPi};
    bool vals_ok = true;
    double worst = 0.0;
    for (int i = 0; i < 4; i++) {
      double e = rel_err(pairs[i].value, refs[i]);
      worst = std::max(worst, e);
      if (e >= 0.005) vals_ok = false;
    }
    // degeneracy detected at a discretization-aware gap
    std::vector<double> vals;
    for (const auto& p : pairs) vals.push_back(p.value);
    auto ids = cluster(vals, 1e-4);
    bool cluster_ok = ids[1] == ids[2] && ids[0] != ids[1] && ids[3] != ids[2];
    report(2, vals_ok && cluster_ok,
           fmt("square Dirichlet: worst err %.2e (tol 5e-3), l2/l3 cluster %s",
               worst, cluster_ok ? "detected" : "missed"));
  } catch (const std::exception& e) {
    report(2, false, std::string("exception: ") + e.what());
  }
}

// ---------------------------------------------------------------- 3
void criterion_cover_consistency() {
  try {
    struct Case {
      Domain domain;
      Vec2 pole;
      const char* name;
    };
    std::vector<Case> cases;
    cases.push_back({Domain::unit_square(), {0.5, 0.5}, "square"});
    cases.push_back({Domain::unit_disk(), {0.3, 0.0}, "disk"});
    cases.push_back({Domain::sector(kPi / 4, 1.0), {0.63, 0.0}, "sector"});
    int m = 10;
    bool pass = true;
    double worst = 0.0;
    for (const auto& c : cases) {
      SolveOptions opt;
      opt.h = 0.07;
      CoverConsistency cc = cover_consistency(c.domain, Pole(c.pole), opt, m);
      std::vector<double> merged = cc.dirichlet;
      merged.insert(merged.end(), cc.magnetic.begin(), cc.magnetic.end());
      std::sort(merged.begin(), merged.end());
      merged.resize(m);
      for (int i = 0; i < m; i++) {
        double e = rel_err(cc.cover[i].value, merged[i]);
        worst = std::max(worst, e);
        if (e >= 1e-6) pass = false;
      }
    }
    report(3, pass,
           fmt("cover = dirichlet u magnetic on 3 (domain,pole) pairs, first "
               "%d values, worst rel dev %.2e (tol 1e-6)",
               m, worst));
  } catch (const std::exception& e) {
    report(3, false, std::string("exception: ") + e.what());
  }
}

// ---------------------------------------------------------------- 4
void criterion_cut_independence() {
  try {
    SolveOptions opt;
    opt.h = 0.06;
    bool pass = true;
    double worst = 0.0;
    {
      CutIndependence ci =
          cut_independence(Domain::unit_square(), Pole({0.5, 0.5}), opt, 4);
      for (int i = 0; i < 4; i++)
        worst = std::max(worst,
                         rel_err(ci.values_primary[i], ci.values_alternate[i]));
    }
    {
      CutIndependence ci = cut_independence(Domain::sector(kPi / 4, 1.0),
                                            Pole({0.5, 0.05}), opt, 4);
      for (int i = 0; i < 4; i++)
        worst = std::max(worst,
                         rel_err(ci.values_primary[i], ci.values_alternate[i]));
    }
    pass = worst < 1e-6;
    report(4, pass,
           fmt("two admissible cuts agree: worst rel dev %.2e (tol 1e-6)",
               worst));
  } catch (const std::exception& e) {
    report(4, false, std::string("exception: ") + e.what());
  }
}

// ---------------------------------------------------------------- 5
void criterion_boundary_limit() {
  try {
    SolveOptions opt;
    opt.h = 0.035;
    Domain sq = Domain::unit_square();
    int m = 6;
    std::vector<double> dists{0.2, 0.1, 0.05, 0.02};
    auto dir = dirichlet_spectrum(sq, opt, m);
    std::vector<std::vector<double>> gaps(5);  // gaps[j][i]
    for (double d : dists) {
      MagneticSolution sol = magnetic_spectrum(sq, Pole({0.5, d}), opt, m);
      for (int j = 1; j <= 4; j++)
        gaps[j].push_back(
            std::fabs(sol.pairs[j - 1].value - dir[j - 1].value));
    }
    bool pass = true;
    std::ostringstream detail;
    for (int j = 1; j <= 4; j++) {
      bool dec = true;
      for (size_t i = 0; i + 1 < gaps[j].size(); i++)
        if (!(gaps[j][i + 1] < gaps[j][i])) dec = false;
      bool final_ok = gaps[j].back() < 0.2 * gaps[j].front();
      if (!(dec && final_ok)) pass = false;
      detail << "j" << j << ":" << (dec ? "dec" : "NONMONO") << " ratio "
             << fmt("%.3f", gaps[j].back() / gaps[j].front()) << "  ";
    }
    report(5, pass, "boundary limit gaps " + detail.str());
  } catch (const std::exception& e) {
    report(5, false, std::string("exception: ") + e.what());
  }
}

// ---------------------------------------------------------------- 6
void criterion_diamagnetic() {
  try {
    SolveOptions opt;
    opt.h = 0.06;
    Domain sq = Domain::unit_square();
    auto dir = dirichlet_spectrum(sq, opt, 1);
    double lam1 = dir[0].value;
    auto poles = pole_grid(sq, 10);
    SweepTable table = sweep(sq, poles, opt, 1);
    bool pass = true;
    double min_margin = 1e300;
    for (const auto& row : table.rows) {
      if (!row.ok) {
        pass = false;
        continue;
      }
      double margin = row.values[0] - lam1;
      double floor = 10.0 * row.max_residual * row.values[0];
      min_margin = std::min(min_margin, margin);
      if (!(margin > floor)) pass = false;
    }
    report(6, pass,
           fmt("diamagnetic excess over Pi_10 (%zu poles): min l1^a - l1 = "
               "%.3e > 10x residual floor",
               table.rows.size(), min_margin));
  } catch (const std::exception& e) {
    report(6, false, std::string("exception: ") + e.what());
  }
}

// ---------------------------------------------------------------- 7
void criterion_nodal_orders() {
  // At the square center lambda_3 = lambda_4 is a symmetry-forced double
  // (detected cluster, split ~1e-8 relative). Every member of that
  // eigenspace carries the same leading half-harmonic order, so the two
  // basis eigenfunctions are analyzed inside the cluster knowingly.
  try {
    bool pass = true;
    std::ostringstream detail;

    SolveOptions opt;
    opt.h = 0.03;
    NodalOptions in_cluster;
    in_cluster.require_simple = false;

    Domain sq = Domain::unit_square();
    MagneticSolution sol = magnetic_spectrum(sq, Pole({0.5, 0.5}), opt, 5);
    bool clustered = sol.pairs[2].cluster == sol.pairs[3].cluster;
    for (int j : {3, 4}) {
      NodalReport r = nodal_order(sol, j, 0.05, in_cluster);
      double dev = r.k >= 3 ? ray_geometry(r) : 1e300;
      bool ok = r.k == 3 && dev <= 0.15;
      if (!ok) pass = false;
      detail << "square j" << j << ": k=" << r.k
             << fmt(" dev=%.3f ", r.k >= 3 ? dev : -1.0);
    }
    detail << (clustered ? "(l3=l4 double) " : "(l3,l4 split) ");

    // the printed a_(3) ~ (0.63, 0) is a two-digit guess; re-locate the
    // order-3/2 pole on the axis by minimizing the nodal fit residual
    Domain sec = Domain::sector(kPi / 4, 1.0);
    PoleLocate loc = locate_order_pole(sec, 3, {0.63, 0.0}, {1.0, 0.0},
                                       0.015, 0.005, 0.08, opt);
    double dev_s = loc.report.k >= 3 ? ray_geometry(loc.report) : 1e300;
    if (!(loc.report.k == 3 && dev_s <= 0.15)) pass = false;
    detail << fmt("sector j3 @ a1=%.3f: k=%d dev=%.3f ", loc.pole.x,
                  loc.report.k, dev_s);

    MagneticSolution sdisk =
        magnetic_spectrum(Domain::unit_disk(), Pole({0.0, 0.0}), opt, 2);
    NodalReport rd = nodal_order(sdisk, 1, 0.05, in_cluster);
    if (rd.k != 1) pass = false;
    detail << "disk j1 (pi^2 double): k=" << rd.k;

    report(7, pass, "nodal orders: " + detail.str());
  } catch (const std::exception& e) {
    report(7, false, std::string("exception: ") + e.what());
  }
}

// ---------------------------------------------------------------- 8
void criterion_rate_fit() {
  try {
    bool synth_ok = true;
    for (double q : {1.0, 2.0, 3.0}) {
      std::vector<double> radii{0.08, 0.06, 0.04, 0.03}, gaps;
      for (double r : radii) gaps.push_back(3.7 * std::pow(r, q));
      RateFit f = rate_fit_from_gaps(radii, gaps);
      if (std::fabs(f.p - q) / q >= 0.01) synth_ok = false;
    }

    SolveOptions opt;
    opt.h = 0.02;
    RateFitOptions fo;
    fo.require_simple = false;  // lambda_3 sits in the center double
    RateFit fit = rate_fit(Domain::unit_square(), {0.5, 0.5}, 3, {1.0, 0.0},
                           {0.08, 0.06, 0.04, 0.03}, opt, fo);
    bool pass = synth_ok && fit.k == 3 && fit.p >= 2.0 - 0.3;
    report(8, pass,
           fmt("rate at square center j=3 (inside the l3=l4 double): k=%d "
               "p=%.3f (bound %.1f - 0.3); synthetic q in {1,2,3} within "
               "1%%: %s",
               fit.k, fit.p, fit.bound, synth_ok ? "yes" : "no"));
  } catch (const std::exception& e) {
    report(8, false, std::string("exception: ") + e.what());
  }
}

// ---------------------------------------------------------------- 9
void criterion_smoothness() {
  try {
    SolveOptions opt;
    opt.h = 0.04;
    Domain sec = Domain::sector(kPi / 4, 1.0);
    std::vector<Pole> poles;
    for (int i = 1; i < 200; i++) {
      Vec2 p{i / 200.0, 0.0};
      if (sec.contains(p)) poles.push_back(Pole(p));
    }
    SweepTable table = sweep(sec, poles, opt, 4);
    bool pass = true;
    std::ostringstream detail;
    int expected[3] = {0, 1, 3};  // crossings for j = 1, 2
    for (int j : {1, 2}) {
      SmoothnessScan scan = smoothness_scan(table, j);
      bool count_ok =
          std::abs((int)scan.kinks.size() - expected[j]) <= 1;
      bool coloc_ok = scan.flagged.empty();
      if (!(count_ok && coloc_ok)) pass = false;
      detail << "j" << j << ": kinks=" << scan.kinks.size() << " (expect "
             << expected[j] << "+-1) flagged=" << scan.flagged.size() << "  ";
    }
    report(9, pass, "sector axis scan (step 1/200): " + detail.str());
  } catch (const std::exception& e) {
    report(9, false, std::string("exception: ") + e.what());
  }
}

// ---------------------------------------------------------------- 10
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_determinism() {
  try {
    fs::path base = fs::temp_directory_path() / "abspec_acceptance";
    fs::remove_all(base);
    fs::create_directories(base);
    fs::path cfg = base / "sweep.cfg";
    {
      std::ofstream os(cfg);
      os << "domain.kind = square\n"
            "mesh.h = 0.12\n"
            "solve.m = 2\n"
            "sweep.n = 5\n";
    }
    std::string bin = ABSPEC_BIN_PATH;
    auto run = [&](const std::string& args) {
      std::string cmd = bin + " " + args + " > /dev/null 2>&1";
      return std::system(cmd.c_str());
    };
    int rc1 = run("sweep --config " + cfg.string() + " --out " +
                  (base / "r1").string() + " --jobs 1");
    int rc2 = run("sweep --config " + cfg.string() + " --out " +
                  (base / "r2").string() + " --jobs 3");
    int rc3 = run("sweep --config " + (base / "r1" / "manifest.jsonl").string() +
                  " --out " + (base / "r3").string());
    bool ran = rc1 == 0 && rc2 == 0 && rc3 == 0;
    std::string a = slurp(base / "r1" / "sweep.csv");
    std::string b = slurp(base / "r2" / "sweep.csv");
    std::string c = slurp(base / "r3" / "sweep.csv");
    bool pass = ran && !a.empty() && a == b && a == c;
    report(10, pass,
           fmt("byte-identical sweeps: jobs1==jobs3 %s, manifest re-run %s",
               a == b ? "yes" : "NO", a == c ? "yes" : "NO"));
  } catch (const std::exception& e) {
    report(10, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  std::printf("abspec acceptance criteria\n");
  criterion_disk_center();
  criterion_square_dirichlet();
  criterion_cover_consistency();
  criterion_cut_independence();
  criterion_boundary_limit();
  criterion_diamagnetic();
  criterion_nodal_orders();
  criterion_rate_fit();
  criterion_smoothness();
  criterion_determinism();
  if (failures) {
    std::printf("%d criterion(s) FAILED\n", failures);
    return 1;
  }
  std::printf("all criteria PASSED\n");
  return 0;
}
