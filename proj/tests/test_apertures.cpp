#include "doctest.h"

#include <cmath>
#include <numbers>

#include "multiap/apertures.hpp"
#include "multiap/errors.hpp"
#include "multiap/numerics.hpp"

using namespace multiap;
using std::numbers::pi;

namespace {

const double kDelta = 2.0 * pi;

// Gamma(a) = sum_mu (1/(n delta)) int_{aperture mu} exp(-i k a) dk
cplx autocorr_k_oracle(const ApertureArray& array, double a) {
  static const auto rule = numerics::gauss_legendre(64);
  cplx acc{};
  const double w = 1.0 / (static_cast<double>(array.n()) * array.delta());
  for (double al : array.positions()) {
    const double lo = al - 0.5 * array.delta();
    const double hi = al + 0.5 * array.delta();
    const auto panels = static_cast<std::size_t>(2 + std::abs(a) * array.delta());
    const double re = numerics::integrate_gauss_legendre([&](double k) { return std::cos(k * a); }, lo, hi, rule, panels);
    const double im = numerics::integrate_gauss_legendre([&](double k) { return -std::sin(k * a); }, lo, hi, rule, panels);
    acc += w * cplx(re, im);
  }
  return acc;
}

}  // namespace

TEST_CASE("make_array validation and derived quantities") {
  const auto pair = make_array({-kDelta, kDelta}, kDelta);
  CHECK(pair.r() == doctest::Approx(2.0));
  CHECK(pair.baseline_beta() == doctest::Approx(2.0 * kDelta));
  CHECK(pair.sigma() == doctest::Approx(1.0));
  CHECK(pair.symmetric());

  const auto single = make_array({0.0}, kDelta);
  CHECK(single.n() == 1);
  CHECK(single.mean_alpha2() == 0.0);

  const auto three = make_array({-kDelta, 0.0, kDelta}, kDelta);
  CHECK(three.symmetric());
  CHECK(three.r_mu(2) == doctest::Approx(1.0));

  const auto skew = make_array({-2.0 * kDelta, 0.5 * kDelta, 1.5 * kDelta}, kDelta);
  CHECK_FALSE(skew.symmetric());

  CHECK_THROWS_AS(make_array({-0.4 * kDelta, 0.4 * kDelta}, kDelta), ValidationError);
  CHECK_THROWS_AS(make_array({-kDelta, 1.5 * kDelta}, kDelta), ValidationError);
  CHECK_THROWS_AS(make_array({0.0}, 0.0), ValidationError);
  CHECK_THROWS_AS(make_array({}, kDelta), ValidationError);
  CHECK_THROWS_AS(ApertureArray::pair(0.5), ValidationError);
  CHECK_THROWS_AS(three.r(), ValidationError);
  CHECK_THROWS_AS(skew.require_symmetric("test"), ValidationError);
}

TEST_CASE("scene validation") {
  CHECK_NOTHROW(Scene::make({{0.1, 0.25}, {-0.1, 0.75}}, 10.0));
  CHECK_THROWS_AS(Scene::make({{0.1, 0.5}, {-0.1, 0.6}}, 1.0), ValidationError);
  CHECK_THROWS_AS(Scene::make({{0.1, 1.0}, {-0.1, 0.0}}, 1.0), ValidationError);
  CHECK_THROWS_AS(Scene::make({{0.1, 1.0}}, 0.0), ValidationError);
  CHECK_THROWS_AS((TwoPointScene{-0.1, 1.0}.validate()), ValidationError);
  const auto s = TwoPointScene{0.2, 5.0}.scene();
  CHECK(s.sources()[0].position == 0.2);
  CHECK(s.sources()[1].position == -0.2);
  CHECK(s.sources()[0].brightness == 0.5);
}

TEST_CASE("psf_single") {
  CHECK(psf_single(0.0, 1.0) == doctest::Approx(1.0));
  CHECK(std::abs(psf_single(1.0, 1.0)) < 1e-15);
  CHECK(psf_single(0.5, 1.0) == doctest::Approx(2.0 / pi).epsilon(1e-14));
  // continuity across the series patch
  for (double sigma : {0.5, 1.0, 3.0}) {
    const double edge = sigma / pi;
    for (double x : {edge * (1 - 1e-9), edge * (1 + 1e-9)}) {
      const double u = pi * x / sigma;
      CHECK(psf_single(x, sigma) == doctest::Approx(std::sin(u) / u / std::sqrt(sigma)).epsilon(1e-14));
    }
    CHECK(psf_single(1e-5 * sigma, sigma) == doctest::Approx(psf_single(1e-5 * sigma, sigma, 1e-4)).epsilon(1e-14));
  }
}

TEST_CASE("psf_compound") {
  for (double r : {1.0, 1.71, 3.0}) {
    const auto a = ApertureArray::pair(r);
    CHECK(psf_compound(a, 0.0).real() == doctest::Approx(std::sqrt(2.0)));
    for (double x : {-1.3, -0.2, 0.05, 0.4, 2.7}) {
      const cplx v = psf_compound(a, x);
      const double closed = std::sqrt(2.0) * std::cos(pi * x * r) * std::sin(pi * x) / (pi * x);
      CHECK(std::abs(v.real() - closed) < 1e-12);
      CHECK(std::abs(v.imag()) < 1e-12);
    }
  }
  const auto three = make_array({-kDelta, 0.0, kDelta}, kDelta);
  for (double x : {0.1, 0.7}) CHECK(std::abs(psf_compound(three, x).imag()) < 1e-12);
}

TEST_CASE("compound psf normalization in the aperture plane") {
  for (const auto& array : {ApertureArray::pair(2.0), make_array({-kDelta, 0.0, kDelta}, kDelta)}) {
    CHECK(std::abs(autocorr_k_oracle(array, 0.0) - 1.0) < 1e-13);
    CHECK(std::abs(autocorr_compound(array, 0.0) - 1.0) < 1e-13);
  }
  // image plane: mass outside [-L, L] is below the reported tail bound
  const auto array = ApertureArray::pair(2.0);
  numerics::QuadratureSpec spec;
  spec.tail_coefficient = 2.0;
  const auto q = numerics::integrate([&](double x) { return std::norm(psf_compound(array, x)); }, spec);
  CHECK(std::abs(q.value - 1.0) <= q.tail_bound);
}

TEST_CASE("autocorrelation closed forms") {
  CHECK(std::abs(autocorr_compound(ApertureArray::single(), 0.0) - 1.0) < 1e-15);
  for (double r : {1.0, 2.0}) {
    const auto a = ApertureArray::pair(r);
    for (double x : {0.03, 0.3, 0.9, 1.6}) {
      const double closed = std::cos(pi * r * x) * std::sin(pi * x) / (pi * x);
      CHECK(std::abs(autocorr_compound(a, x).real() - closed) < 1e-13);
    }
  }
  const auto d = autocorr_single_derivs(0.0, 1.0);
  CHECK(d.g2 == doctest::Approx(-pi * pi / 3.0).epsilon(1e-14));
  CHECK(d.g1 == 0.0);
}

TEST_CASE("autocorrelation symmetry") {
  const auto skew = make_array({-2.0 * kDelta, 0.5 * kDelta, 1.5 * kDelta}, kDelta);
  const auto sym = make_array({-1.5 * kDelta, 0.0, 1.5 * kDelta}, kDelta);
  for (double a : {0.1, 0.45, 1.2}) {
    CHECK(std::abs(autocorr_compound(skew, -a) - std::conj(autocorr_compound(skew, a))) < 1e-14);
    CHECK(std::abs(autocorr_compound(sym, a).imag()) < 1e-14);
    CHECK(std::abs(autocorr_compound(sym, a) - autocorr_compound(sym, -a)) < 1e-14);
  }
}

TEST_CASE("autocorrelation derivatives against finite differences") {
  for (const auto& array : {ApertureArray::single(), ApertureArray::pair(2.0),
                            make_array({-2.0 * kDelta, 0.5 * kDelta, 1.5 * kDelta}, kDelta)}) {
    for (double a : {0.1, 0.5, 1.0}) {
      const auto d = autocorr_derivs(array, a);
      auto re = [&](double x) { return autocorr_compound(array, x).real(); };
      auto im = [&](double x) { return autocorr_compound(array, x).imag(); };
      CHECK(std::abs(d.g1.real() - numerics::central_diff(re, a)) < 1e-8);
      CHECK(std::abs(d.g1.imag() - numerics::central_diff(im, a)) < 1e-8);
      auto d1re = [&](double x) { return autocorr_derivs(array, x).g1.real(); };
      auto d2re = [&](double x) { return autocorr_derivs(array, x).g2.real(); };
      CHECK(std::abs(d.g2.real() - numerics::central_diff(d1re, a)) < 1e-7);
      CHECK(std::abs(d.g3.real() - numerics::central_diff(d2re, a)) < 1e-6);
    }
  }
}

TEST_CASE("autocorrelation matches the aperture-plane overlap integral") {
  for (const auto& array : {ApertureArray::single(0.7), ApertureArray::pair(1.71),
                            make_array({-2.0 * kDelta, 0.5 * kDelta, 1.5 * kDelta}, kDelta)}) {
    for (double a = -2.0; a <= 2.0; a += 0.173) {
      CHECK(std::abs(autocorr_compound(array, a) - autocorr_k_oracle(array, a)) < 1e-10);
    }
  }
}

TEST_CASE("compound intensity") {
  const auto a = ApertureArray::pair(2.0);
  for (double x : {-0.8, 0.0, 0.13, 0.6}) {
    const auto i = intensity_compound(a, x);
    CHECK(i.value == doctest::Approx(std::norm(psf_compound(a, x))).epsilon(1e-12));
    const double fd = numerics::central_diff([&](double y) { return intensity_compound(a, y).value; }, x);
    CHECK(std::abs(i.deriv - fd) < 1e-8);
  }
}
