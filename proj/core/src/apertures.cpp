#include "multiap/apertures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "multiap/errors.hpp"
#include "multiap/numerics/special.hpp"

namespace multiap {

using std::numbers::pi;

ApertureArray::ApertureArray(std::vector<double> positions, double delta, bool symmetric)
    : positions_(std::move(positions)), delta_(delta), sigma_(2.0 * pi / delta), symmetric_(symmetric) {}

ApertureArray ApertureArray::make(std::vector<double> positions, double delta) {
  if (positions.empty()) throw ValidationError("aperture array needs at least one aperture");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("aperture width delta must be > 0");
  double sum = 0.0;
  double scale = delta;
  for (double a : positions) {
    if (!std::isfinite(a)) throw ValidationError("aperture positions must be finite");
    sum += a;
    scale += std::abs(a);
  }
  const double tol = 1e-12 * scale;
  if (std::abs(sum) > tol) {
    std::ostringstream msg;
    msg << "aperture positions must average to zero (sum = " << sum << ")";
    throw ValidationError(msg.str());
  }
  std::vector<double> sorted = positions;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    if (sorted[i + 1] - sorted[i] < delta - tol) {
      std::ostringstream msg;
      msg << "apertures at " << sorted[i] << " and " << sorted[i + 1]
          << " overlap (separation below width " << delta << ")";
      throw ValidationError(msg.str());
    }
  }
  bool symmetric = true;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (std::abs(sorted[i] + sorted[sorted.size() - 1 - i]) > tol) symmetric = false;
  }
  return ApertureArray(std::move(positions), delta, symmetric);
}

ApertureArray ApertureArray::pair(double r, double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("sigma must be > 0");
  const double delta = 2.0 * pi / sigma;
  const double half = 0.5 * r * delta;
  return make({-half, half}, delta);
}

ApertureArray ApertureArray::single(double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("sigma must be > 0");
  return make({0.0}, 2.0 * pi / sigma);
}

double ApertureArray::baseline_beta() const {
  if (n() != 2) throw ValidationError("baseline is defined for two-aperture arrays only");
  return std::abs(positions_[1] - positions_[0]);
}

double ApertureArray::r() const { return baseline_beta() / delta_; }

double ApertureArray::mean_alpha2() const {
  double s = 0.0;
  for (double a : positions_) s += a * a;
  return s / static_cast<double>(n());
}

void ApertureArray::require_symmetric(const char* what) const {
  if (!symmetric_) {
    throw ValidationError(std::string(what) + " requires a mirror-symmetric aperture array");
  }
}

void TwoPointScene::validate() const {
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw ValidationError("theta must be >= 0");
  if (!(n_photons > 0.0)) throw ValidationError("photon number N must be > 0");
}

Scene TwoPointScene::scene() const {
  validate();
  return Scene::make({{theta, 0.5}, {-theta, 0.5}}, n_photons);
}

SceneTangent TwoPointScene::tangent() const {
  return {{1.0, -1.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
}

Scene Scene::make(std::vector<PointSource> sources, double n_photons) {
  if (sources.empty()) throw ValidationError("scene needs at least one source");
  if (!(n_photons > 0.0) || !std::isfinite(n_photons)) throw ValidationError("photon number N must be > 0");
  double total = 0.0;
  for (const auto& s : sources) {
    if (!(s.brightness > 0.0)) throw ValidationError("source brightness must be > 0");
    if (!std::isfinite(s.position)) throw ValidationError("source position must be finite");
    total += s.brightness;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "source brightnesses must sum to 1 (got " << total << ")";
    throw ValidationError(msg.str());
  }
  return Scene(std::move(sources), n_photons);
}

double psf_single(double x, double sigma, double patch_radius) {
  return numerics::sinc(pi * x / sigma, patch_radius) / std::sqrt(sigma);
}

double psf_single_deriv(double x, double sigma, double patch_radius) {
  return numerics::sinc_derivs(pi * x / sigma, patch_radius).s1 * (pi / sigma) / std::sqrt(sigma);
}

cplx psf_compound(const ApertureArray& array, double x) {
  cplx sum{};
  for (double a : array.positions()) sum += std::polar(1.0, a * x);
  return sum * psf_single(x, array.sigma()) / std::sqrt(static_cast<double>(array.n()));
}

Intensity intensity_compound(const ApertureArray& array, double x) {
  const auto& pos = array.positions();
  const double n = static_cast<double>(array.n());
  // |sum exp(i alpha x)|^2 = n + 2 sum_{mu>nu} cos((alpha_mu - alpha_nu) x)
  double amp = n;
  double amp_d = 0.0;
  for (std::size_t mu = 0; mu < pos.size(); ++mu) {
    for (std::size_t nu = 0; nu < mu; ++nu) {
      const double d = pos[mu] - pos[nu];
      amp += 2.0 * std::cos(d * x);
      amp_d -= 2.0 * d * std::sin(d * x);
    }
  }
  const double p = psf_single(x, array.sigma());
  const double dp = psf_single_deriv(x, array.sigma());
  return {p * p * amp / n, (2.0 * p * dp * amp + p * p * amp_d) / n};
}

RealDerivs autocorr_single_derivs(double a, double sigma, double patch_radius) {
  const double k = pi / sigma;
  const auto s = numerics::sinc_derivs(k * a, patch_radius);
  return {s.s0, k * s.s1, k * k * s.s2, k * k * k * s.s3};
}

ComplexDerivs autocorr_derivs(const ApertureArray& array, double a, double patch_radius) {
  const auto g = autocorr_single_derivs(a, array.sigma(), patch_radius);
  cplx s0{}, s1{}, s2{}, s3{};
  const cplx mi{0.0, -1.0};
  for (double al : array.positions()) {
    const cplx e = std::polar(1.0, -al * a);
    const cplx f = mi * al;
    s0 += e;
    s1 += f * e;
    s2 += f * f * e;
    s3 += f * f * f * e;
  }
  const double inv_n = 1.0 / static_cast<double>(array.n());
  s0 *= inv_n;
  s1 *= inv_n;
  s2 *= inv_n;
  s3 *= inv_n;
  return {g.g0 * s0, g.g1 * s0 + g.g0 * s1, g.g2 * s0 + 2.0 * g.g1 * s1 + g.g0 * s2,
          g.g3 * s0 + 3.0 * g.g2 * s1 + 3.0 * g.g1 * s2 + g.g0 * s3};
}

cplx autocorr_compound(const ApertureArray& array, double a) {
  return autocorr_derivs(array, a).g0;
}

RealDerivs autocorr_derivs_real(const ApertureArray& array, double a, double patch_radius) {
  const auto c = autocorr_derivs(array, a, patch_radius);
  return {c.g0.real(), c.g1.real(), c.g2.real(), c.g3.real()};
}

}  // namespace multiap
