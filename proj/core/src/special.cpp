#include "multiap/numerics/special.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "multiap/errors.hpp"

namespace multiap::numerics {

double legendre(int j, double t) {
  if (j < 0) throw ValidationError("Legendre order must be >= 0");
  if (!(std::abs(t) <= 1.0)) {
    std::ostringstream msg;
    msg << "Legendre argument " << t << " outside [-1, 1]";
    throw ValidationError(msg.str());
  }
  if (j == 0) return 1.0;
  double p0 = 1.0;
  double p1 = t;
  for (int k = 2; k <= j; ++k) {
    const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

SincDerivs sinc_derivs(double u, double patch_radius) {
  if (std::abs(u) < patch_radius) {
    // sin(u)/u = sum_k c_k u^{2k}, c_k = (-1)^k / (2k+1)!, differentiated termwise.
    const double u2 = u * u;
    SincDerivs d{0.0, 0.0, 0.0, 0.0};
    double coef = 1.0;
    double p = 1.0;  // u^{2k-4} for k >= 2, tracked from k = 2 onwards
    for (int k = 0; k < 30; ++k) {
      const double m = 2.0 * k;
      if (k == 0) {
        d.s0 += coef;
      } else if (k == 1) {
        d.s0 += coef * u2;
        d.s1 += coef * m * u;
        d.s2 += coef * m * (m - 1.0);
      } else {
        // p = u^{2k-4}
        d.s0 += coef * p * u2 * u2;
        d.s1 += coef * m * p * u2 * u;
        d.s2 += coef * m * (m - 1.0) * p * u2;
        d.s3 += coef * m * (m - 1.0) * (m - 2.0) * p * u;
        if (std::abs(coef * m * m * m * p) < 1e-18) break;
        p *= u2;
      }
      coef *= -1.0 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
    }
    return d;
  }
  const double s = std::sin(u);
  const double c = std::cos(u);
  const double u2 = u * u;
  return {s / u, (u * c - s) / u2, (-u2 * s - 2.0 * u * c + 2.0 * s) / (u2 * u),
          (-u2 * u * c + 3.0 * u2 * s + 6.0 * u * c - 6.0 * s) / (u2 * u2)};
}

double sinc(double u, double patch_radius) {
  if (std::abs(u) >= patch_radius) return std::sin(u) / u;
  const double u2 = u * u;
  double sum = 0.0;
  double term = 1.0;
  for (int k = 0; k < 30 && std::abs(term) > 1e-18; ++k) {
    sum += term;
    term *= -u2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
  }
  return sum;
}

namespace {

std::vector<double> sph_bessel_nonneg(int n_max, double u) {
  std::vector<double> j(static_cast<std::size_t>(n_max) + 1, 0.0);
  if (u == 0.0) {
    j[0] = 1.0;
    return j;
  }
  if (u < 1.0) {
    // j_n(u) = u^n/(2n+1)!! * sum_k (-u^2/2)^k / (k! (2n+3)(2n+5)...(2n+2k+1))
    double pre = 1.0;
    for (int n = 0; n <= n_max; ++n) {
      if (n > 0) pre *= u / (2.0 * n + 1.0);
      double term = 1.0;
      double sum = 1.0;
      for (int k = 0; k < 40; ++k) {
        term *= -u * u / (2.0 * (k + 1.0) * (2.0 * n + 2.0 * k + 3.0));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
      }
      j[static_cast<std::size_t>(n)] = pre * sum;
    }
    return j;
  }
  const double j0 = std::sin(u) / u;
  const double j1 = std::sin(u) / (u * u) - std::cos(u) / u;
  if (u > n_max) {
    j[0] = j0;
    if (n_max >= 1) j[1] = j1;
    for (int n = 1; n < n_max; ++n) {
      j[static_cast<std::size_t>(n) + 1] = (2.0 * n + 1.0) / u * j[n] - j[n - 1];
    }
    return j;
  }
  // Miller's downward recurrence from well above max(n_max, u).
  const int top = std::max(n_max, static_cast<int>(std::ceil(u)));
  const int start = top + static_cast<int>(std::sqrt(40.0 * top)) + 10;
  double above = 0.0;
  double cur = 1e-300;
  for (int n = start; n > 0; --n) {
    const double below = (2.0 * n + 1.0) / u * cur - above;
    above = cur;
    cur = below;
    if (n - 1 <= n_max) j[static_cast<std::size_t>(n) - 1] = cur;
    if (n <= n_max) j[static_cast<std::size_t>(n)] = above;
    if (std::abs(cur) > 1e200) {
      cur *= 1e-200;
      above *= 1e-200;
      for (auto& v : j) v *= 1e-200;
    }
  }
  const double scale = std::abs(j0) >= std::abs(j1) ? j0 / j[0] : j1 / j[1];
  for (auto& v : j) v *= scale;
  return j;
}

}  // namespace

std::vector<double> sph_bessel_sequence(int n_max, double u) {
  if (n_max < 0) throw ValidationError("spherical Bessel order must be >= 0");
  std::vector<double> j = sph_bessel_nonneg(n_max, std::abs(u));
  if (u < 0.0) {
    for (std::size_t n = 1; n < j.size(); n += 2) j[n] = -j[n];
  }
  return j;
}

double sph_bessel(int n, double u) { return sph_bessel_sequence(n, u).back(); }

}  // namespace multiap::numerics
