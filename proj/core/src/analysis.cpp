#include "abspec/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace abspec {

namespace {
constexpr double kPi = std::numbers::pi;

double wrap2pi(double t) {
  t = std::fmod(t, 2.0 * kPi);
  if (t < 0.0) t += 2.0 * kPi;
  return t;
}

struct SlopeFit {
  double slope, stderr_slope;
};

SlopeFit log_log_slope(const std::vector<double>& x,
                       const std::vector<double>& y) {
  int n = (int)x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> lx(n), ly(n);
  for (int i = 0; i < n; i++) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  double denom = n * sxx - sx * sx;
  double slope = (n * sxy - sx * sy) / denom;
  double intercept = (sy - slope * sx) / n;
  double ss = 0.0;
  for (int i = 0; i < n; i++) {
    double r = ly[i] - (intercept + slope * lx[i]);
    ss += r * r;
  }
  double se = n > 2 ? std::sqrt(ss / (n - 2) / (sxx - sx * sx / n)) : 0.0;
  return {slope, se};
}

}  // namespace

SweepTable sweep(const Domain& domain, const std::vector<Pole>& poles,
                 const SolveOptions& opt, int m, int jobs) {
  if (poles.empty()) throw PreconditionError("sweep: empty pole list");
  for (const auto& p : poles)
    if (!domain.contains(p.position))
      throw PreconditionError("sweep: all poles must be interior");

  SweepTable table;
  table.domain_id = domain.describe();
  table.h = opt.h;
  table.order = opt.order;
  table.m = m;
  table.rows.resize(poles.size());

  auto run_one = [&](size_t i) {
    SweepRow row;
    row.pole = poles[i].position;
    try {
      MagneticSolution sol = magnetic_spectrum(domain, poles[i], opt, m);
      row.values = sol.values();
      for (const auto& p : sol.pairs) {
        row.clusters.push_back(p.cluster);
        row.max_residual = std::max(row.max_residual, p.residual);
      }
      row.ok = true;
    } catch (const Error& e) {
      row.ok = false;
      row.error = e.what();
    }
    table.rows[i] = std::move(row);
  };

  if (jobs <= 1) {
    for (size_t i = 0; i < poles.size(); i++) run_one(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int w = 0; w < jobs; w++) {
      pool.emplace_back([&] {
        while (true) {
          size_t i = next.fetch_add(1);
          if (i >= poles.size()) break;
          run_one(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  return table;
}

BoundaryConvergence boundary_convergence(const Domain& domain, int j,
                                         const Vec2& b,
                                         std::vector<double> distances,
                                         const SolveOptions& opt) {
  if (distances.size() < 2)
    throw PreconditionError(
        "boundary_convergence: need at least two distances");
  std::sort(distances.rbegin(), distances.rend());

  // inward direction: nearest boundary point of a probe slightly inside
  // fails for corner points, so use the local tangent of the boundary piece
  double tol = 1e-9 * std::max(1.0, domain.char_length());
  Vec2 inward{0, 0};
  bool found = false;
  for (const auto& s : domain.boundary()) {
    if (s.kind == BoundarySegment::Kind::Line) {
      Vec2 d = s.b - s.a;
      double len2 = d.squared_norm();
      double t = (b - s.a).dot(d) / len2;
      if (t < -1e-12 || t > 1.0 + 1e-12) continue;
      if ((s.a + t * d - b).norm() > tol) continue;
      Vec2 tang = d.normalized();
      inward = {-tang.y, tang.x};  // interior lies left of the CCW boundary
      found = true;
      break;
    } else {
      if (std::fabs((b - s.center).norm() - s.radius) > tol) continue;
      double ang = std::atan2(b.y - s.center.y, b.x - s.center.x);
      double rel = wrap2pi(ang - s.t0);
      if (rel > s.t1 - s.t0) continue;
      inward = (s.center - b).normalized();
      found = true;
      break;
    }
  }
  if (!found)
    throw PreconditionError(
        "boundary_convergence: point does not lie on the boundary");

  BoundaryConvergence out;
  out.boundary_point = b;
  out.j = j;
  out.distances = distances;

  int m = j + 2;
  auto dir = dirichlet_spectrum(domain, opt, m);
  out.lambda_ref = dir[j - 1].value;

  for (double d : distances) {
    Vec2 a = b + d * inward;
    if (!domain.contains(a))
      throw PreconditionError("boundary_convergence: pole exits the domain");
    MagneticSolution sol = magnetic_spectrum(domain, Pole(a), opt, m);
    out.magnetic.push_back(sol.pairs[j - 1].value);
    out.gaps.push_back(std::fabs(sol.pairs[j - 1].value - out.lambda_ref));
  }

  // verdict: strictly decreasing over the last three samples and the final
  // gap below a fifth of the initial one
  size_t n = out.gaps.size();
  bool dec = true;
  for (size_t i = n >= 3 ? n - 3 : 0; i + 1 < n; i++)
    if (!(out.gaps[i + 1] < out.gaps[i])) dec = false;
  out.pass = dec && out.gaps.back() < out.gaps.front() / 5.0;
  return out;
}

NodalReport nodal_order(const MagneticSolution& sol, int j,
                        double probe_radius, const NodalOptions& opt) {
  if (j < 1 || j > (int)sol.pairs.size())
    throw PreconditionError("nodal_order: eigenpair index out of range");
  // simplicity: the eigenvalue must sit in a singleton cluster
  if (opt.require_simple) {
    for (int t = 0; t < (int)sol.pairs.size(); t++) {
      if (t == j - 1) continue;
      if (sol.pairs[t].cluster == sol.pairs[j - 1].cluster)
        throw PreconditionError(
            "nodal_order: eigenvalue is numerically non-simple");
    }
  }
  if (!(probe_radius > 0.0) || probe_radius >= sol.pole_boundary_dist / 2.0)
    throw PreconditionError(
        "nodal_order: probe radius must be below dist(pole, boundary)/2");
  if (probe_radius > sol.grading_radius)
    throw PreconditionError(
        "nodal_order: probe radius must stay inside the graded region");

  FemField f = sol.field(j);
  double theta_cut =
      (sol.cm.mesh.points[sol.cm.chain_left[1]] - sol.pole).angle();

  int n = opt.samples;
  std::vector<double> theta(n), val(n);
  for (int i = 0; i < n; i++) {
    theta[i] = theta_cut + 2.0 * kPi * (i + 0.5) / n;
    Vec2 p = sol.pole + probe_radius * Vec2{std::cos(theta[i]),
                                            std::sin(theta[i])};
    val[i] = f.eval(p);
  }
  NodalReport report = nodal_order_from_samples(theta, val, probe_radius, opt);
  report.pole = sol.pole;
  report.j = j;
  return report;
}

NodalReport nodal_order_from_samples(const std::vector<double>& theta,
                                     const std::vector<double>& val,
                                     double probe_radius,
                                     const NodalOptions& opt) {
  int n = (int)theta.size();
  if (n < 16 || val.size() != theta.size())
    throw PreconditionError("nodal_order: need at least 16 circle samples");
  double amax = 0.0;
  for (double v : val) amax = std::max(amax, std::fabs(v));
  if (amax <= 0.0)
    throw NumericalError("nodal_order: all samples vanish on the circle");
  double zero_tol = opt.zero_threshold * amax;

  // Count sign changes over the anti-periodic closure (.., val[n-1], -val[0]).
  // Zero-graze samples are skipped; crossings interpolate between the
  // flanking non-negligible samples.
  std::vector<int> nz;  // indices of non-negligible samples
  for (int i = 0; i < n; i++)
    if (std::fabs(val[i]) > zero_tol) nz.push_back(i);
  if ((int)nz.size() < 8)
    throw NumericalError(
        "nodal_order: samples below the noise floor; the pole sits too close "
        "to an unresolvable nodal structure");

  // Anti-periodic trigonometric interpolant of the samples. The offset
  // uniform grid theta_i = theta_0 + (i+1/2) * 2pi/n carries the DCT-IV /
  // DST-IV half-integer basis exactly, so band-limited data (and in
  // particular pure harmonics) reconstruct to machine precision.
  double theta0 = theta[0] - kPi / n;  // grid origin
  std::vector<double> ca(n / 2), sa(n / 2);
  for (int mi = 0; mi < n / 2; mi++) {
    int mode = 2 * mi + 1;
    double a = 0.0, b = 0.0;
    for (int i = 0; i < n; i++) {
      double phi = theta[i] - theta0;
      a += val[i] * std::cos(0.5 * mode * phi);
      b += val[i] * std::sin(0.5 * mode * phi);
    }
    ca[mi] = 2.0 * a / n;
    sa[mi] = 2.0 * b / n;
  }
  auto interp = [&](double th) {
    double phi = th - theta0;
    double s = 0.0;
    for (int mi = 0; mi < n / 2; mi++) {
      int mode = 2 * mi + 1;
      s += ca[mi] * std::cos(0.5 * mode * phi) +
           sa[mi] * std::sin(0.5 * mode * phi);
    }
    return s;
  };

  std::vector<double> rays;
  int changes = 0;
  for (size_t t = 0; t < nz.size(); t++) {
    int i0 = nz[t];
    int i1 = nz[(t + 1) % nz.size()];
    double v0 = val[i0];
    double th0 = theta[i0];
    double v1, th1;
    if (t + 1 < nz.size()) {
      v1 = val[i1];
      th1 = theta[i1];
    } else {
      v1 = -val[i1];  // anti-periodic wrap
      th1 = theta[i1] + 2.0 * kPi;
    }
    if ((v0 > 0) != (v1 > 0)) {
      changes++;
      // bisection on the interpolant inside the bracket
      double lo = th0, hi = th1;
      bool lo_pos = v0 > 0;
      for (int it = 0; it < 80; it++) {
        double mid = 0.5 * (lo + hi);
        if ((interp(mid) > 0) == lo_pos)
          lo = mid;
        else
          hi = mid;
      }
      rays.push_back(wrap2pi(0.5 * (lo + hi)));
    }
  }

  int k = changes;
  if (k % 2 == 0)
    throw NumericalError(
        "nodal_order: even sign-change count (anti-periodic closure "
        "violated by noise)");
  if (k > opt.max_k)
    throw NumericalError("nodal_order: detected order exceeds the cap");

  // leading-coefficient fit against cos(k theta / 2), sin(k theta / 2)
  double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
  for (int i = 0; i < n; i++) {
    double c = std::cos(0.5 * k * theta[i]);
    double s = std::sin(0.5 * k * theta[i]);
    a11 += c * c;
    a12 += c * s;
    a22 += s * s;
    b1 += c * val[i];
    b2 += s * val[i];
  }
  double det = a11 * a22 - a12 * a12;
  double cfit = (a22 * b1 - a12 * b2) / det;
  double sfit = (a11 * b2 - a12 * b1) / det;
  double ss = 0, tot = 0;
  for (int i = 0; i < n; i++) {
    double fit = cfit * std::cos(0.5 * k * theta[i]) +
                 sfit * std::sin(0.5 * k * theta[i]);
    ss += (val[i] - fit) * (val[i] - fit);
    tot += val[i] * val[i];
  }

  NodalReport report;
  report.k = k;
  double scale = k / std::pow(probe_radius, 0.5 * k);
  report.c_k = cfit * scale;
  report.d_k = sfit * scale;
  std::sort(rays.begin(), rays.end());
  report.ray_angles = std::move(rays);
  report.fit_residual = std::sqrt(ss / tot);
  report.probe_radius = probe_radius;
  return report;
}

double ray_geometry(const NodalReport& report) {
  if (report.k < 3)
    throw PreconditionError("ray_geometry: requires k >= 3 nodal rays");
  if ((int)report.ray_angles.size() != report.k)
    throw PreconditionError("ray_geometry: ray count does not match k");
  double target = 2.0 * kPi / report.k;
  double dev = 0.0;
  for (int i = 0; i < report.k; i++) {
    double gap = (i + 1 < report.k)
                     ? report.ray_angles[i + 1] - report.ray_angles[i]
                     : report.ray_angles[0] + 2.0 * kPi -
                           report.ray_angles[report.k - 1];
    dev = std::max(dev, std::fabs(gap - target));
  }
  return dev;
}

PoleLocate locate_order_pole(const Domain& domain, int j, const Vec2& guess,
                             const Vec2& direction, double window,
                             double step, double probe_radius,
                             const SolveOptions& opt,
                             const NodalOptions& nodal) {
  if (!(window > 0.0) || !(step > 0.0) || step > window)
    throw PreconditionError("locate_order_pole: need 0 < step <= window");
  Vec2 dir = direction.normalized();
  PoleLocate best;
  double best_res = 1e300;
  bool found = false;
  std::string last_error;
  for (double t = -window; t <= window + 1e-15; t += step) {
    Vec2 p = guess + t * dir;
    if (!domain.contains(p)) continue;
    try {
      MagneticSolution sol = magnetic_spectrum(domain, Pole(p), opt, j + 2);
      NodalReport rep = nodal_order(sol, j, probe_radius, nodal);
      if (rep.fit_residual < best_res) {
        best_res = rep.fit_residual;
        best.pole = p;
        best.report = rep;
        found = true;
      }
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  if (!found)
    throw PreconditionError("locate_order_pole: no scan point admitted the "
                            "nodal analysis (last error: " +
                            last_error + ")");
  return best;
}

RateFit rate_fit_from_gaps(std::vector<double> radii,
                           std::vector<double> gaps) {
  if (radii.size() != gaps.size() || radii.size() < 3)
    throw PreconditionError("rate_fit: need at least 3 usable radii");
  for (size_t i = 0; i + 1 < radii.size(); i++)
    if (!(radii[i] > radii[i + 1]))
      throw PreconditionError("rate_fit: radii must be strictly decreasing");
  for (double g : gaps)
    if (!(g > 0.0))
      throw PreconditionError("rate_fit: gaps must be positive");
  auto fit = log_log_slope(radii, gaps);
  RateFit out;
  out.radii = std::move(radii);
  out.gaps = std::move(gaps);
  out.p = fit.slope;
  out.p_lo = fit.slope - 2.0 * fit.stderr_slope;
  out.p_hi = fit.slope + 2.0 * fit.stderr_slope;
  return out;
}

RateFit rate_fit(const Domain& domain, const Vec2& b, int j,
                 const Vec2& direction, std::vector<double> radii,
                 const SolveOptions& opt, const RateFitOptions& fit_opt) {
  if (radii.size() < 3)
    throw PreconditionError("rate_fit: need at least 3 radii");
  std::sort(radii.rbegin(), radii.rend());
  double dist = domain.distance_to_boundary(b);
  for (double r : radii)
    if (!(r > 0.0) || r >= dist / 2.0)
      throw PreconditionError(
          "rate_fit: radii must lie within dist(b, boundary)/2");

  int m = j + 2;
  MagneticSolution base = magnetic_spectrum(domain, Pole(b), opt, m);
  if (fit_opt.require_simple) {
    for (int t = 0; t < (int)base.pairs.size(); t++) {
      if (t == j - 1) continue;
      if (base.pairs[t].cluster == base.pairs[j - 1].cluster)
        throw PreconditionError("rate_fit: lambda_j at b is not simple");
    }
  }
  double lambda_b = base.pairs[j - 1].value;
  double noise = 10.0 * base.pairs[j - 1].residual * std::fabs(lambda_b);

  double probe = fit_opt.probe_radius > 0.0
                     ? fit_opt.probe_radius
                     : std::min({0.05, dist / 4.0, base.grading_radius});
  NodalOptions nopt;
  nopt.require_simple = fit_opt.require_simple;
  NodalReport nodal = nodal_order(base, j, probe, nopt);

  Vec2 dir = direction.normalized();
  std::vector<double> used_r, used_g;
  for (double r : radii) {
    Vec2 a = b + r * dir;
    MagneticSolution sol = magnetic_spectrum(domain, Pole(a), opt, m);
    double gap = std::fabs(sol.pairs[j - 1].value - lambda_b);
    if (gap > noise) {
      used_r.push_back(r);
      used_g.push_back(gap);
    }
  }
  if (used_r.size() < 3)
    throw PreconditionError(
        "rate_fit: fewer than 3 radii survive the noise filter");

  RateFit out = rate_fit_from_gaps(used_r, used_g);
  out.base = b;
  out.j = j;
  out.k = nodal.k;
  out.bound = 0.5 * (nodal.k + 1);
  return out;
}

SmoothnessScan smoothness_scan(const SweepTable& table, int j,
                               const ScanOptions& opt) {
  const auto& rows = table.rows;
  if (rows.size() < 5)
    throw PreconditionError("smoothness_scan: path too short");
  if (j < 1 || j > table.m)
    throw PreconditionError("smoothness_scan: j outside the sweep range");

  // uniform 1D path check
  Vec2 step = rows[1].pole - rows[0].pole;
  double ds = step.norm();
  for (size_t i = 0; i + 1 < rows.size(); i++) {
    Vec2 d = rows[i + 1].pole - rows[i].pole;
    if (std::fabs(d.norm() - ds) > opt.spacing_tol * std::max(1.0, ds) ||
        std::fabs(d.cross(step)) > opt.spacing_tol)
      throw PreconditionError(
          "smoothness_scan: sweep is not a uniformly spaced 1D path");
  }

  SmoothnessScan scan;
  scan.j = j;
  for (size_t i = 0; i < rows.size(); i++) {
    if (!rows[i].ok)
      throw PreconditionError("smoothness_scan: sweep contains failed rows");
    scan.param.push_back(i * ds);
    scan.lambda.push_back(rows[i].values[j - 1]);
  }

  size_t n = scan.lambda.size();
  scan.second_diff.assign(n, 0.0);
  for (size_t i = 1; i + 1 < n; i++)
    scan.second_diff[i] =
        scan.lambda[i - 1] - 2.0 * scan.lambda[i] + scan.lambda[i + 1];

  std::vector<double> mags;
  for (size_t i = 1; i + 1 < n; i++)
    mags.push_back(std::fabs(scan.second_diff[i]));
  std::sort(mags.begin(), mags.end());
  double median = mags[mags.size() / 2];
  double thresh = opt.spike_factor * std::max(median, 1e-300);

  // spikes: local maxima of |D2| above the threshold, merged within 2 steps
  std::vector<int> raw;
  for (size_t i = 1; i + 1 < n; i++) {
    double v = std::fabs(scan.second_diff[i]);
    if (v <= thresh) continue;
    bool localmax = true;
    for (int o = -2; o <= 2; o++) {
      size_t t = i + o;
      if (o == 0 || t < 1 || t + 1 >= n) continue;
      if (std::fabs(scan.second_diff[t]) > v) localmax = false;
    }
    if (localmax) raw.push_back((int)i);
  }
  for (int idx : raw) {
    if (!scan.kinks.empty() && idx - scan.kinks.back() <= 2) continue;
    scan.kinks.push_back(idx);
  }

  // non-simple markers: local minima of the relative gap to the nearest
  // neighbor eigenvalue, below the crossing threshold
  std::vector<double> gap(n, 1e300);
  for (size_t i = 0; i < n; i++) {
    const auto& vals = rows[i].values;
    double g = 1e300;
    if (j < (int)vals.size() + 1 && j < table.m)
      g = std::min(g, vals[j] - vals[j - 1]);
    if (j >= 2) g = std::min(g, vals[j - 1] - vals[j - 2]);
    gap[i] = g / std::max(1e-300, std::fabs(vals[j - 1]));
  }
  for (size_t i = 0; i < n; i++) {
    if (gap[i] >= opt.crossing_rel_gap) continue;
    bool localmin = true;
    if (i >= 1 && gap[i - 1] < gap[i]) localmin = false;
    if (i + 1 < n && gap[i + 1] < gap[i]) localmin = false;
    if (localmin) scan.crossings.push_back((int)i);
  }
  // merge adjacent plateau markers
  {
    std::vector<int> merged;
    for (int c : scan.crossings) {
      if (!merged.empty() && c - merged.back() <= 1) continue;
      merged.push_back(c);
    }
    scan.crossings = std::move(merged);
  }

  for (int kink : scan.kinks) {
    bool colocated = false;
    for (int c : scan.crossings)
      if (std::abs(kink - c) <= 1) colocated = true;
    if (!colocated) scan.flagged.push_back(kink);
  }
  return scan;
}

}  // namespace abspec
