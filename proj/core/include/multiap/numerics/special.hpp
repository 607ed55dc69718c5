#pragma once

#include <vector>

namespace multiap::numerics {

/// P_j(t) by the three-term recurrence. Throws ValidationError for |t| > 1
/// or j < 0.
double legendre(int j, double t);

/// sin(u)/u and its first three derivatives in u.
struct SincDerivs {
  double s0;
  double s1;
  double s2;
  double s3;
};

/// Closed forms away from the origin, Taylor series for |u| < patch_radius.
SincDerivs sinc_derivs(double u, double patch_radius = 1.0);

double sinc(double u, double patch_radius = 1.0);

/// j_0(u) ... j_{n_max}(u). Odd parity is applied for u < 0.
std::vector<double> sph_bessel_sequence(int n_max, double u);

double sph_bessel(int n, double u);

}  // namespace multiap::numerics
