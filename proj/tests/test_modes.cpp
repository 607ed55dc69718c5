#include "doctest.h"

#include <cmath>
#include <numbers>

#include "multiap/apertures.hpp"
#include "multiap/errors.hpp"
#include "multiap/modes.hpp"
#include "multiap/numerics.hpp"

using namespace multiap;
using std::numbers::pi;

namespace {

const auto& rule() {
  static const auto r = numerics::gauss_legendre(64);
  return r;
}

// int_{lo}^{hi} f(k) dk for complex f
template <class F>
cplx integrate_k(F&& f, double lo, double hi, std::size_t panels) {
  const double re = numerics::integrate_gauss_legendre([&](double k) { return f(k).real(); }, lo, hi, rule(), panels);
  const double im = numerics::integrate_gauss_legendre([&](double k) { return f(k).imag(); }, lo, hi, rule(), panels);
  return {re, im};
}

// Gamma_j(a) = int exp(-i k a) psi~(k) conj(phi~_j(k)) dk with psi~ = 1/sqrt(delta) on the aperture
cplx gamma_definition(int j, double a, double sigma) {
  const double delta = 2.0 * pi / sigma;
  const auto panels = static_cast<std::size_t>(4 + std::abs(a) * delta / 2.0);
  return integrate_k(
      [&](double k) { return std::exp(cplx(0.0, -k * a)) * std::conj(mode_k(j, k, delta)) / std::sqrt(delta); },
      -0.5 * delta, 0.5 * delta, panels);
}

}  // namespace

TEST_CASE("mode_k values and orthonormality") {
  const double delta = 2.0 * pi;
  CHECK(std::abs(mode_k(0, 0.0, delta) - 1.0 / std::sqrt(delta)) < 1e-15);
  CHECK(std::abs(mode_k(1, 0.0, delta)) < 1e-15);
  CHECK(mode_k(3, 0.51 * delta, delta) == cplx{});
  for (int j = 0; j <= 12; ++j) {
    for (int l = 0; l <= 12; ++l) {
      const cplx g = integrate_k([&](double k) { return mode_k(j, k, delta) * std::conj(mode_k(l, k, delta)); },
                                 -0.5 * delta, 0.5 * delta, 2);
      CHECK(std::abs(g - (j == l ? 1.0 : 0.0)) < 1e-12);
    }
  }
}

TEST_CASE("mode_x") {
  for (double x : {-2.3, -0.4, 0.0, 0.2, 1.7}) CHECK(mode_x(0, x, 1.0) == doctest::Approx(psf_single(x, 1.0)).epsilon(1e-13));
  CHECK(std::abs(mode_x(1, 0.0, 1.0)) < 1e-15);
  for (int j = 0; j <= 8; ++j)
    for (double x : {0.15, 0.9, 3.3}) CHECK(mode_x(j, -x, 1.3) == ((j % 2) ? -1.0 : 1.0) * mode_x(j, x, 1.3));

  // inverse Fourier transform of mode_k
  const double sigma = 1.0;
  const double delta = 2.0 * pi / sigma;
  const double x = 0.7 * sigma;
  const cplx ft = integrate_k([&](double k) { return std::exp(cplx(0.0, k * x)) * mode_k(2, k, delta); }, -0.5 * delta,
                              0.5 * delta, 4) /
                  std::sqrt(2.0 * pi);
  CHECK(std::abs(ft.imag()) < 1e-12);
  CHECK(std::abs(ft.real() - mode_x(2, x, sigma)) < 1e-12);
}

TEST_CASE("image-plane modes are orthonormal under integrate") {
  // |phi_j|^2 is bounded by (2j+1)/(pi x)^2 far out
  numerics::QuadratureSpec spec;
  spec.domain_halfwidth = 400.0;
  spec.rel_tol = 1e-9;
  spec.abs_tol = 1e-10;
  for (int j = 0; j <= 3; ++j) {
    spec.tail_coefficient = 2.0 * j + 1.0;
    const auto q = numerics::integrate([&](double x) { return mode_x(j, x, 1.0) * mode_x(j, x, 1.0); }, spec);
    CHECK(std::abs(q.value - 1.0) <= q.tail_bound);
  }
}

TEST_CASE("gamma_j closed form") {
  for (double a : {0.05, 0.4, 1.3}) {
    for (double sigma : {1.0, 2.5}) {
      CHECK(gamma_j(0, a, sigma) == doctest::Approx(sigma * std::sin(pi * a / sigma) / (pi * a)).epsilon(1e-13));
    }
  }
  for (int j = 1; j <= 15; j += 2) CHECK(std::abs(gamma_j(j, 0.0, 1.0)) < 1e-15);
  CHECK(gamma_j(0, 0.0, 1.0) == 1.0);
  double parseval = 0.0;
  for (int j = 0; j <= 40; ++j) parseval += std::pow(gamma_j(j, 0.3, 1.0), 2);
  CHECK(std::abs(parseval - 1.0) < 1e-6);
}

TEST_CASE("gamma_j equals sqrt(sigma) phi_j and its definition integral") {
  for (double sigma : {1.0, 0.6}) {
    for (int j = 0; j <= 10; ++j) {
      for (double a = 0.0; a <= 2.0 * sigma + 1e-12; a += 0.05 * sigma) {
        const double g = gamma_j(j, a, sigma);
        CHECK(std::abs(g - std::sqrt(sigma) * mode_x(j, a, sigma)) < 1e-12);
        const cplx def = gamma_definition(j, a, sigma);
        CHECK(std::abs(def - g) < 1e-8);
      }
    }
  }
}

TEST_CASE("gamma derivative tables") {
  const double sigma = 1.0;
  for (double a : {0.0, 0.07, 0.5, 1.9, 12.0}) {
    const auto t = gamma_table(20, a, sigma);
    for (int j = 0; j <= 20; ++j) {
      CHECK(t.g[j] == doctest::Approx(gamma_j(j, a, sigma)).epsilon(1e-12));
      CHECK(std::abs(t.g1[j] - gamma_j_deriv(j, a, sigma)) < 1e-12);
      const double fd1 = numerics::central_diff([&](double x) { return gamma_j(j, x, sigma); }, a);
      const double fd2 = numerics::central_diff([&](double x) { return gamma_j_deriv(j, x, sigma); }, a);
      CHECK(std::abs(t.g1[j] - fd1) < 1e-8);
      CHECK(std::abs(t.g2[j] - fd2) < 1e-8);
    }
  }
}

TEST_CASE("tail sums and completeness") {
  for (double a : {0.0, 0.2, 0.9, 3.0}) {
    double prev = 2.0;
    for (int J = 0; J <= 30; ++J) {
      const auto tail = gamma_tail(J, a, 1.0);
      double head = 0.0;
      for (int j = 0; j <= J; ++j) head += std::pow(gamma_j(j, a, 1.0), 2);
      CHECK(std::abs(tail.value - (1.0 - head)) < 1e-12);
      CHECK(tail.value <= prev + 1e-15);
      prev = tail.value;
      CHECK(tail.value >= 0.0);
    }
    const auto t = gamma_tail(3, a, 1.0);
    const double fd = numerics::central_diff([&](double x) { return gamma_tail(3, x, 1.0).value; }, a);
    CHECK(std::abs(t.deriv - fd) < 1e-8);
  }
}

TEST_CASE("shifted_gamma") {
  const auto three = make_array({-2.0 * pi, 0.0, 2.0 * pi}, 2.0 * pi);
  for (int j = 0; j <= 4; ++j) {
    for (double a : {0.1, 0.77}) {
      CHECK(std::abs(shifted_gamma(j, 1, a, three) - gamma_j(j, a, 1.0)) < 1e-15);
      for (std::size_t mu = 0; mu < 3; ++mu) CHECK(std::abs(std::abs(shifted_gamma(j, mu, a, three)) - std::abs(gamma_j(j, a, 1.0))) < 1e-14);
    }
  }
  for (double r : {1.0, 2.5}) {
    const auto pair = ApertureArray::pair(r);
    for (int j = 0; j <= 3; ++j) {
      for (double x : {0.04, 0.35, 0.8}) {
        const cplx s0 = shifted_gamma(j, 0, x, pair);
        const cplx s1 = shifted_gamma(j, 1, x, pair);
        const double g2 = std::pow(gamma_j(j, x, 1.0), 2);
        CHECK(std::norm(s0 + s1) / 2.0 == doctest::Approx(2.0 * std::pow(std::cos(pi * r * x), 2) * g2).epsilon(1e-12));
        CHECK(std::norm(s0 - s1) / 2.0 == doctest::Approx(2.0 * std::pow(std::sin(pi * r * x), 2) * g2).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("local amplitudes derivatives") {
  const auto pair = ApertureArray::pair(2.0);
  const double x = 0.31;
  const auto amp = local_amplitudes(pair, 6, x);
  CHECK(amp.a.size() == 14);
  for (std::size_t i = 0; i < amp.a.size(); ++i) {
    auto re = [&](double y) { return local_amplitudes(pair, 6, y).a[i].real(); };
    auto im = [&](double y) { return local_amplitudes(pair, 6, y).a[i].imag(); };
    CHECK(std::abs(amp.da[i] - cplx(numerics::central_diff(re, x), numerics::central_diff(im, x))) < 1e-8);
    auto dre = [&](double y) { return local_amplitudes(pair, 6, y).da[i].real(); };
    auto dim = [&](double y) { return local_amplitudes(pair, 6, y).da[i].imag(); };
    CHECK(std::abs(amp.d2a[i] - cplx(numerics::central_diff(dre, x), numerics::central_diff(dim, x))) < 1e-7);
  }
  CHECK(label_index(3, 1, 2) == 7);
}

TEST_CASE("Gram-Schmidt compound basis") {
  for (const auto& array : {ApertureArray::pair(2.0), ApertureArray::pair(1.0), ApertureArray::single(),
                            make_array({-2.0 * pi, 0.0, 2.0 * pi}, 2.0 * pi)}) {
    const auto gs = gram_schmidt(array, 6);
    CHECK(gs.order() == 6);

    // Gram matrix by quadrature over the apertures
    for (int m = 0; m < 6; ++m) {
      for (int l = 0; l < 6; ++l) {
        cplx acc{};
        for (double al : array.positions()) {
          acc += integrate_k([&](double k) { return gs.value_k(m, k) * std::conj(gs.value_k(l, k)); },
                             al - 0.5 * array.delta(), al + 0.5 * array.delta(), 2);
        }
        CHECK(std::abs(acc - (m == l ? 1.0 : 0.0)) < 1e-8);
      }
    }
    for (double x : {-0.6, 0.0, 0.25, 1.4}) {
      CHECK(std::abs(gs.value(0, x) - psf_compound(array, x)) < 1e-12);
      const double norm = std::sqrt(-autocorr_derivs_real(array, 0.0).g2);
      const double dpsi = numerics::central_diff([&](double y) { return psf_compound(array, y).real(); }, x);
      CHECK(std::abs(gs.value(1, x) - dpsi / norm) < 1e-8);
      const auto amp = gs.amplitude(2, x);
      const double fd = numerics::central_diff([&](double y) { return gs.amplitude(2, y).a.real(); }, x);
      CHECK(std::abs(amp.da.real() - fd) < 1e-8);
    }
  }
  const auto skew = make_array({-2.0 * 2.0 * pi, 0.5 * 2.0 * pi, 1.5 * 2.0 * pi}, 2.0 * pi);
  CHECK_THROWS_AS(gram_schmidt(skew, 3), ValidationError);
}
