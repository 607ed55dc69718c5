#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace multiap {

using cplx = std::complex<double>;

/// n equal hard apertures of width delta centred at alpha_mu in the aperture
/// plane. Immutable once built.
class ApertureArray {
 public:
  /// Throws ValidationError on empty input, delta <= 0, nonzero mean
  /// position or overlapping apertures.
  static ApertureArray make(std::vector<double> positions, double delta);
  /// Two apertures at +-r*delta/2 with delta = 2*pi/sigma.
  static ApertureArray pair(double r, double sigma = 1.0);
  static ApertureArray single(double sigma = 1.0);

  std::size_t n() const noexcept { return positions_.size(); }
  double delta() const noexcept { return delta_; }
  double sigma() const noexcept { return sigma_; }
  const std::vector<double>& positions() const noexcept { return positions_; }
  double alpha(std::size_t mu) const { return positions_.at(mu); }
  double r_mu(std::size_t mu) const { return positions_.at(mu) / delta_; }
  /// alpha_2 - alpha_1 and beta/delta; two-aperture arrays only.
  double baseline_beta() const;
  double r() const;
  bool symmetric() const noexcept { return symmetric_; }
  /// (1/n) sum_mu alpha_mu^2
  double mean_alpha2() const;

  /// Throws ValidationError naming `what` unless the array is symmetric.
  void require_symmetric(const char* what) const;

 private:
  ApertureArray(std::vector<double> positions, double delta, bool symmetric);

  std::vector<double> positions_;
  double delta_;
  double sigma_;
  bool symmetric_;
};

inline ApertureArray make_array(std::vector<double> positions, double delta) {
  return ApertureArray::make(std::move(positions), delta);
}

struct PointSource {
  double position;
  double brightness;
};

/// Weighted point-source constellation with photon budget N.
class Scene {
 public:
  /// Throws ValidationError unless sum b = 1, b > 0 and N > 0.
  static Scene make(std::vector<PointSource> sources, double n_photons);

  const std::vector<PointSource>& sources() const noexcept { return sources_; }
  double n_photons() const noexcept { return n_photons_; }

 private:
  Scene(std::vector<PointSource> sources, double n_photons)
      : sources_(std::move(sources)), n_photons_(n_photons) {}
  std::vector<PointSource> sources_;
  double n_photons_;
};

/// d/dtheta (and d2/dtheta2) of every source position and brightness.
struct SceneTangent {
  std::vector<double> d_position;
  std::vector<double> d_brightness;
  std::vector<double> d2_position;
  std::vector<double> d2_brightness;
};

/// Sources at +theta and -theta with equal brightness.
struct TwoPointScene {
  double theta = 0.0;
  double n_photons = 1.0;

  void validate() const;
  Scene scene() const;
  SceneTangent tangent() const;
};

// Point spread functions ----------------------------------------------------

/// sin(pi x/sigma)/(pi x) * sqrt(sigma), Taylor-patched for |pi x/sigma| < patch.
double psf_single(double x, double sigma, double patch_radius = 1.0);
double psf_single_deriv(double x, double sigma, double patch_radius = 1.0);

/// (1/sqrt n) psf_single(x) sum_mu exp(i alpha_mu x)
cplx psf_compound(const ApertureArray& array, double x);

/// |psf_compound|^2 and its x-derivative.
struct Intensity {
  double value;
  double deriv;
};
Intensity intensity_compound(const ApertureArray& array, double x);

// Autocorrelations ----------------------------------------------------------

struct RealDerivs {
  double g0, g1, g2, g3;
};
struct ComplexDerivs {
  cplx g0, g1, g2, g3;
};

/// sin(pi a/sigma)/(pi a/sigma) and derivatives in a.
RealDerivs autocorr_single_derivs(double a, double sigma, double patch_radius = 1.0);

cplx autocorr_compound(const ApertureArray& array, double a);
ComplexDerivs autocorr_derivs(const ApertureArray& array, double a, double patch_radius = 1.0);

/// Real part of the compound autocorrelation for symmetric arrays, where the
/// imaginary part vanishes identically.
RealDerivs autocorr_derivs_real(const ApertureArray& array, double a, double patch_radius = 1.0);

}  // namespace multiap
