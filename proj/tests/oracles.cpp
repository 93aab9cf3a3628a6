#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace oracles {

double bessel_j(double nu, double x) {
  if (x < 0.0) throw std::invalid_argument("bessel_j: x >= 0 required");
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  double half = 0.5 * x;
  double term = std::pow(half, nu) / std::tgamma(nu + 1.0);
  double sum = term;
  for (int m = 1; m < 200; m++) {
    term *= -(half * half) / (m * (m + nu));
    sum += term;
    if (std::fabs(term) < 1e-18 * std::fabs(sum) + 1e-300) break;
  }
  return sum;
}

double bessel_j_zero(double nu, int k) {
  int found = 0;
  double step = 0.01;
  double prev_x = step, prev_v = bessel_j(nu, prev_x);
  for (double x = 2.0 * step; x < 200.0; x += step) {
    double v = bessel_j(nu, x);
    if ((prev_v > 0.0) != (v > 0.0)) {
      found++;
      if (found == k) {
        double lo = prev_x, hi = x;
        for (int it = 0; it < 200; it++) {
          double mid = 0.5 * (lo + hi);
          double vm = bessel_j(nu, mid);
          if ((vm > 0.0) == (prev_v > 0.0))
            lo = mid;
          else
            hi = mid;
        }
        return 0.5 * (lo + hi);
      }
    }
    prev_x = x;
    prev_v = v;
  }
  throw std::runtime_error("bessel_j_zero: zero not found in range");
}

double tanx_eq_x_root() {
  // g(x) = sin(x) - x cos(x) changes sign across the root in (pi, 3pi/2)
  auto g = [](double x) { return std::sin(x) - x * std::cos(x); };
  double lo = 3.2, hi = 4.6;
  for (int it = 0; it < 200; it++) {
    double mid = 0.5 * (lo + hi);
    if ((g(mid) > 0.0) == (g(lo) > 0.0))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Integrals of grad(l_i).grad(l_j) and l_i l_j over the unit right triangle.
const double kRefStiffness[3][3] = {
    {1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
const double kRefMass[3][3] = {{2.0 / 24, 1.0 / 24, 1.0 / 24},
                               {1.0 / 24, 2.0 / 24, 1.0 / 24},
                               {1.0 / 24, 1.0 / 24, 2.0 / 24}};

}  // namespace oracles
