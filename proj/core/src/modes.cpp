#include "multiap/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "multiap/errors.hpp"
#include "multiap/numerics/special.hpp"

namespace multiap {

using std::numbers::pi;

namespace {

// Gamma_j' = (pi/sigma) (up_j Gamma_{j+1} - down_j Gamma_{j-1})
double up(int j) { return (j + 1.0) / std::sqrt((2.0 * j + 1.0) * (2.0 * j + 3.0)); }
double down(int j) { return j == 0 ? 0.0 : j / std::sqrt((2.0 * j - 1.0) * (2.0 * j + 1.0)); }

cplx i_pow(int j) {
  switch (j % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

void check_j(int j) {
  if (j < 0) throw ValidationError("mode index j must be >= 0");
}

// x-derivative on local-mode coefficient vectors (j-major labels).
std::vector<cplx> apply_derivative(const std::vector<cplx>& v, const ApertureArray& array, int j_max) {
  const std::size_t n = array.n();
  const double half = 0.5 * array.delta();
  std::vector<cplx> out(v.size());
  for (int j = 0; j <= j_max; ++j) {
    for (std::size_t mu = 0; mu < n; ++mu) {
      cplx acc = cplx{0.0, array.alpha(mu)} * v[label_index(j, mu, n)];
      if (j > 0) acc += half * up(j - 1) * v[label_index(j - 1, mu, n)];
      if (j < j_max) acc -= half * down(j + 1) * v[label_index(j + 1, mu, n)];
      out[label_index(j, mu, n)] = acc;
    }
  }
  return out;
}

cplx inner(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

}  // namespace

LocalModeBasis::LocalModeBasis(int j_max, double delta)
    : j_max_(j_max), delta_(delta), sigma_(2.0 * pi / delta) {
  if (j_max < 0) throw ValidationError("j_max must be >= 0");
  if (!(delta > 0.0)) throw ValidationError("aperture width delta must be > 0");
}

cplx mode_k(int j, double k, double delta) {
  check_j(j);
  if (!(delta > 0.0)) throw ValidationError("aperture width delta must be > 0");
  if (std::abs(k) > 0.5 * delta) return {0.0, 0.0};
  const double t = std::clamp(2.0 * k / delta, -1.0, 1.0);
  return i_pow(j) * std::sqrt((2.0 * j + 1.0) / delta) * numerics::legendre(j, t);
}

double mode_x(int j, double x, double sigma) {
  return gamma_j(j, x, sigma) / std::sqrt(sigma);
}

double gamma_j(int j, double a, double sigma) {
  check_j(j);
  const double b = numerics::sph_bessel(j, pi * a / sigma);
  return (j % 2 == 0 ? 1.0 : -1.0) * std::sqrt(2.0 * j + 1.0) * b;
}

double gamma_j_deriv(int j, double a, double sigma) {
  check_j(j);
  return gamma_table(j, a, sigma).g1.back();
}

GammaTable gamma_table(int j_max, double a, double sigma) {
  if (j_max < 0) throw ValidationError("j_max must be >= 0");
  if (!(sigma > 0.0)) throw ValidationError("sigma must be > 0");
  const double k = pi / sigma;
  const auto b = numerics::sph_bessel_sequence(j_max + 2, k * a);
  std::vector<double> g(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) {
    g[j] = (j % 2 == 0 ? 1.0 : -1.0) * std::sqrt(2.0 * j + 1.0) * b[j];
  }
  std::vector<double> g1(static_cast<std::size_t>(j_max) + 2);
  for (int j = 0; j <= j_max + 1; ++j) {
    g1[j] = k * (up(j) * g[j + 1] - (j > 0 ? down(j) * g[j - 1] : 0.0));
  }
  GammaTable t;
  t.g.assign(g.begin(), g.begin() + j_max + 1);
  t.g1.assign(g1.begin(), g1.begin() + j_max + 1);
  t.g2.resize(static_cast<std::size_t>(j_max) + 1);
  for (int j = 0; j <= j_max; ++j) {
    t.g2[j] = k * (up(j) * g1[j + 1] - (j > 0 ? down(j) * g1[j - 1] : 0.0));
  }
  return t;
}

TailSums gamma_tail(int j_max, double a, double sigma) {
  const double u = std::abs(pi * a / sigma);
  const int top = std::max(j_max + 1, static_cast<int>(std::ceil(u))) + 50;
  const auto t = gamma_table(top, a, sigma);
  TailSums s{0.0, 0.0, 0.0};
  for (int j = j_max + 1; j <= top; ++j) {
    s.value += t.g[j] * t.g[j];
    s.deriv += 2.0 * t.g[j] * t.g1[j];
    s.deriv2 += 2.0 * (t.g1[j] * t.g1[j] + t.g[j] * t.g2[j]);
  }
  return s;
}

cplx shifted_gamma(int j, std::size_t mu, double a, const ApertureArray& array) {
  if (mu >= array.n()) throw ValidationError("aperture index out of range");
  return std::polar(1.0, -array.alpha(mu) * a) * gamma_j(j, a, array.sigma());
}

LocalAmplitudes local_amplitudes(const ApertureArray& array, int j_max, double x) {
  const auto t = gamma_table(j_max, x, array.sigma());
  const std::size_t n = array.n();
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  LocalAmplitudes out;
  const std::size_t size = (static_cast<std::size_t>(j_max) + 1) * n;
  out.a.resize(size);
  out.da.resize(size);
  out.d2a.resize(size);
  for (std::size_t mu = 0; mu < n; ++mu) {
    const double al = array.alpha(mu);
    const cplx e = norm * std::polar(1.0, -al * x);
    const cplx f{0.0, -al};
    for (int j = 0; j <= j_max; ++j) {
      const std::size_t i = label_index(j, mu, n);
      out.a[i] = e * t.g[j];
      out.da[i] = e * (f * t.g[j] + t.g1[j]);
      out.d2a[i] = e * (f * f * t.g[j] + 2.0 * f * t.g1[j] + t.g2[j]);
    }
  }
  return out;
}

CompoundGramSchmidt::CompoundGramSchmidt(const ApertureArray& array, int order)
    : array_(array), order_(order) {
  array.require_symmetric("Gram-Schmidt compound basis");
  if (order < 1) throw ValidationError("Gram-Schmidt order must be >= 1");
  const std::size_t n = array.n();
  const int jm = order - 1;
  const std::size_t size = static_cast<std::size_t>(order) * n;

  std::vector<cplx> q(size, cplx{});
  for (std::size_t mu = 0; mu < n; ++mu) q[label_index(0, mu, n)] = 1.0 / std::sqrt(static_cast<double>(n));
  coeffs_.push_back(q);

  for (int m = 1; m < order; ++m) {
    std::vector<cplx> v = apply_derivative(coeffs_.back(), array, jm);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& prev : coeffs_) {
        const cplx c = inner(prev, v);
        for (std::size_t i = 0; i < size; ++i) v[i] -= c * prev[i];
      }
    }
    const double norm = std::sqrt(inner(v, v).real());
    if (!(norm > 1e-300)) throw NumericError("Gram-Schmidt derivative sequence became linearly dependent");
    for (auto& c : v) c /= norm;
    coeffs_.push_back(std::move(v));
  }
}

CompoundGramSchmidt::Amplitude CompoundGramSchmidt::amplitude(int m, double x) const {
  return amplitudes(x).at(static_cast<std::size_t>(m));
}

std::vector<CompoundGramSchmidt::Amplitude> CompoundGramSchmidt::amplitudes(double x) const {
  const auto loc = local_amplitudes(array_, label_j_max(), x);
  std::vector<Amplitude> out;
  out.reserve(coeffs_.size());
  for (const auto& c : coeffs_) {
    Amplitude amp{{}, {}, {}};
    for (std::size_t i = 0; i < c.size(); ++i) {
      const cplx cc = std::conj(c[i]);
      amp.a += cc * loc.a[i];
      amp.da += cc * loc.da[i];
      amp.d2a += cc * loc.d2a[i];
    }
    out.push_back(amp);
  }
  return out;
}

cplx CompoundGramSchmidt::value(int m, double x) const {
  const auto& c = coeffs_.at(static_cast<std::size_t>(m));
  const std::size_t n = array_.n();
  const auto t = gamma_table(label_j_max(), x, array_.sigma());
  const double rs = 1.0 / std::sqrt(array_.sigma());
  cplx sum{};
  for (int j = 0; j <= label_j_max(); ++j) {
    for (std::size_t mu = 0; mu < n; ++mu) {
      sum += c[label_index(j, mu, n)] * std::polar(1.0, array_.alpha(mu) * x) * t.g[j] * rs;
    }
  }
  return sum;
}

cplx CompoundGramSchmidt::value_k(int m, double k) const {
  const auto& c = coeffs_.at(static_cast<std::size_t>(m));
  const std::size_t n = array_.n();
  cplx sum{};
  for (int j = 0; j <= label_j_max(); ++j) {
    for (std::size_t mu = 0; mu < n; ++mu) {
      sum += c[label_index(j, mu, n)] * mode_k(j, k - array_.alpha(mu), array_.delta());
    }
  }
  return sum;
}

CompoundGramSchmidt gram_schmidt(const ApertureArray& array, int order) {
  return CompoundGramSchmidt(array, order);
}

}  // namespace multiap
