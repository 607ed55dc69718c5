#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "multiap/apertures.hpp"

namespace multiap {

/// Sinc-bessel local modes j = 0..j_max on a hard aperture of width delta.
/// Aperture plane: i^j sqrt((2j+1)/delta) P_j(2k/delta) on |k| <= delta/2.
/// Image plane: (-1)^j sqrt((2j+1)/sigma) j_j(pi x/sigma), real with parity (-1)^j.
class LocalModeBasis {
 public:
  LocalModeBasis(int j_max, double delta);

  int j_max() const noexcept { return j_max_; }
  double delta() const noexcept { return delta_; }
  double sigma() const noexcept { return sigma_; }

 private:
  int j_max_;
  double delta_;
  double sigma_;
};

constexpr int kDefaultJMax = 40;

cplx mode_k(int j, double k, double delta);
double mode_x(int j, double x, double sigma);

double gamma_j(int j, double a, double sigma);
double gamma_j_deriv(int j, double a, double sigma);

/// Gamma_j, Gamma_j' and Gamma_j'' for j = 0..j_max at one point.
struct GammaTable {
  std::vector<double> g;
  std::vector<double> g1;
  std::vector<double> g2;
};
GammaTable gamma_table(int j_max, double a, double sigma);

/// sum_{j > j_max} Gamma_j^2 and its first two a-derivatives, summed
/// directly rather than as 1 - partial sum.
struct TailSums {
  double value;
  double deriv;
  double deriv2;
};
TailSums gamma_tail(int j_max, double a, double sigma);

/// exp(-i alpha_mu a) Gamma_j(a)
cplx shifted_gamma(int j, std::size_t mu, double a, const ApertureArray& array);

/// Amplitudes <phi_{j mu} | psi(. - x)> over labels (j, mu), j-major, and
/// their x-derivatives.
struct LocalAmplitudes {
  std::vector<cplx> a;
  std::vector<cplx> da;
  std::vector<cplx> d2a;
};
LocalAmplitudes local_amplitudes(const ApertureArray& array, int j_max, double x);

inline std::size_t label_index(int j, std::size_t mu, std::size_t n) {
  return static_cast<std::size_t>(j) * n + mu;
}

/// Orthonormal modes built from the compound PSF and its successive
/// x-derivatives. Each mode is stored as coefficients over local-mode labels
/// (j, mu), j = 0..order-1, so overlaps with shifted PSFs are exact.
class CompoundGramSchmidt {
 public:
  CompoundGramSchmidt(const ApertureArray& array, int order);

  int order() const noexcept { return order_; }
  int label_j_max() const noexcept { return order_ - 1; }
  const ApertureArray& array() const noexcept { return array_; }
  const std::vector<std::vector<cplx>>& coefficients() const noexcept { return coeffs_; }

  /// <A_m | psi(. - x)>, its first and second x-derivatives.
  struct Amplitude {
    cplx a;
    cplx da;
    cplx d2a;
  };
  Amplitude amplitude(int m, double x) const;
  std::vector<Amplitude> amplitudes(double x) const;

  /// Image-plane value A_m(x).
  cplx value(int m, double x) const;
  /// Aperture-plane value of A_m at k.
  cplx value_k(int m, double k) const;

 private:
  ApertureArray array_;
  int order_;
  std::vector<std::vector<cplx>> coeffs_;
};

/// Throws ValidationError for asymmetric arrays or order < 1.
CompoundGramSchmidt gram_schmidt(const ApertureArray& array, int order);

}  // namespace multiap
