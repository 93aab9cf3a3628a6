#pragma once

// Test-only oracles, independent of the library's solver path: Bessel
// functions by power series, zeros by bisection, hand-integrated reference
// element matrices.

#include <vector>

namespace oracles {

// J_nu(x) by the ascending power series (adequate for x <= 25).
double bessel_j(double nu, double x);

// k-th positive zero of J_nu, located by scan + bisection.
double bessel_j_zero(double nu, int k);

// First positive root of tan(x) = x (the first zero of J_{3/2}).
double tanx_eq_x_root();

// Hand-integrated P1 matrices on the reference triangle (0,0),(1,0),(0,1).
extern const double kRefStiffness[3][3];
extern const double kRefMass[3][3];

}  // namespace oracles
