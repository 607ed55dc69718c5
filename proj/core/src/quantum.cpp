#include "multiap/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "multiap/errors.hpp"
#include "multiap/modes.hpp"
#include "multiap/numerics/quadrature.hpp"

namespace multiap {

using numerics::cplx;
using std::numbers::pi;

namespace {

std::vector<ModeLabel> make_labels(int j_max, std::size_t n) {
  std::vector<ModeLabel> labels;
  for (int j = 0; j <= j_max; ++j)
    for (std::size_t mu = 0; mu < n; ++mu) labels.push_back({j, mu});
  return labels;
}

void add_outer(ComplexMatrix& m, double w, const std::vector<cplx>& u, const std::vector<cplx>& v) {
  const std::size_t d = u.size();
  for (std::size_t r = 0; r < d; ++r) {
    if (u[r] == cplx{}) continue;
    const cplx ur = w * u[r];
    for (std::size_t c = 0; c < d; ++c) m(r, c) += ur * std::conj(v[c]);
  }
}

void check_tangent(const Scene& scene, const SceneTangent& tangent) {
  const std::size_t ns = scene.sources().size();
  if (tangent.d_position.size() != ns || tangent.d_brightness.size() != ns) {
    throw ValidationError("scene tangent does not match the number of sources");
  }
}

}  // namespace

DensityMatrix density_matrix(const ApertureArray& array, const Scene& scene, int j_max,
                             const TruncationPolicy& policy) {
  if (j_max < 0) throw ValidationError("j_max must be >= 0");
  const std::size_t dim = (static_cast<std::size_t>(j_max) + 1) * array.n();
  ComplexMatrix m(dim, dim);
  double captured = 0.0;
  for (const auto& src : scene.sources()) {
    const auto amp = local_amplitudes(array, j_max, src.position);
    add_outer(m, src.brightness, amp.a, amp.a);
    for (const auto& a : amp.a) captured += src.brightness * std::norm(a);
  }
  const double deficit = std::max(0.0, 1.0 - captured);
  if (deficit > policy.max_deficit && !policy.allow_bias) {
    std::ostringstream msg;
    msg << "mode truncation at j_max = " << j_max << " leaves trace deficit " << deficit
        << " above " << policy.max_deficit << "; raise j_max or allow biased results";
    throw TruncationError(msg.str(), deficit);
  }
  return {make_labels(j_max, array.n()), HermitianMatrix(std::move(m)), deficit};
}

HermitianMatrix density_matrix_derivative(const ApertureArray& array, const Scene& scene,
                                          const SceneTangent& tangent, int j_max) {
  if (j_max < 0) throw ValidationError("j_max must be >= 0");
  check_tangent(scene, tangent);
  const std::size_t dim = (static_cast<std::size_t>(j_max) + 1) * array.n();
  ComplexMatrix m(dim, dim);
  for (std::size_t s = 0; s < scene.sources().size(); ++s) {
    const auto& src = scene.sources()[s];
    const auto amp = local_amplitudes(array, j_max, src.position);
    if (tangent.d_brightness[s] != 0.0) add_outer(m, tangent.d_brightness[s], amp.a, amp.a);
    const double w = src.brightness * tangent.d_position[s];
    if (w != 0.0) {
      add_outer(m, w, amp.da, amp.a);
      add_outer(m, w, amp.a, amp.da);
    }
  }
  return HermitianMatrix(std::move(m));
}

Parametrization Parametrization::two_point(double n_photons) {
  Parametrization p;
  p.kind = Kind::TwoPoint;
  p.scene_at = [n_photons](double theta) { return TwoPointScene{theta, n_photons}.scene(); };
  p.tangent_at = [n_photons](double theta) { return TwoPointScene{theta, n_photons}.tangent(); };
  return p;
}

Parametrization Parametrization::brightness_only(double half_separation, double n_photons) {
  Parametrization p;
  p.kind = Kind::BrightnessOnly;
  p.scene_at = [=](double theta) {
    if (!(std::abs(theta) < 1.0)) throw ValidationError("brightness imbalance must lie in (-1, 1)");
    return Scene::make({{half_separation, 0.5 * (1.0 + theta)}, {-half_separation, 0.5 * (1.0 - theta)}},
                       n_photons);
  };
  p.tangent_at = [](double) {
    return SceneTangent{{0.0, 0.0}, {0.5, -0.5}, {0.0, 0.0}, {0.0, 0.0}};
  };
  return p;
}

Parametrization Parametrization::constant(const Scene& scene) {
  Parametrization p;
  p.kind = Kind::Constant;
  p.scene_at = [scene](double) { return scene; };
  p.tangent_at = [scene](double) {
    const std::size_t ns = scene.sources().size();
    return SceneTangent{std::vector<double>(ns, 0.0), std::vector<double>(ns, 0.0),
                        std::vector<double>(ns, 0.0), std::vector<double>(ns, 0.0)};
  };
  return p;
}

SldResult sld(const HermitianMatrix& rho, const HermitianMatrix& drho, double tau_rel) {
  if (rho.dim() != drho.dim()) throw ValidationError("rho and its derivative differ in dimension");
  auto eig = numerics::eig_hermitian(rho);
  const std::size_t d = rho.dim();
  const double lmax = std::max(eig.eigenvalues.front(), 0.0);
  const double tau = tau_rel * lmax;
  const ComplexMatrix& v = eig.eigenvectors;
  const ComplexMatrix dr_eig = v.adjoint() * drho.matrix() * v;
  ComplexMatrix l_eig(d, d);
  std::size_t skipped = 0;
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = 0; k < d; ++k) {
      const double s = eig.eigenvalues[j] + eig.eigenvalues[k];
      if (s > tau) {
        l_eig(j, k) = 2.0 * dr_eig(j, k) / s;
      } else {
        ++skipped;
      }
    }
  }
  ComplexMatrix l = v * l_eig * v.adjoint();
  return {HermitianMatrix(std::move(l), 1e-9), std::move(eig), skipped, tau};
}

double sld_residual(const HermitianMatrix& rho, const HermitianMatrix& drho, const SldResult& s) {
  const ComplexMatrix& v = s.eig.eigenvectors;
  const ComplexMatrix r = drho.matrix() - (rho.matrix() * s.sld.matrix() + s.sld.matrix() * rho.matrix()) * 0.5;
  const ComplexMatrix r_eig = v.adjoint() * r * v;
  const std::size_t d = rho.dim();
  double acc = 0.0;
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = 0; k < d; ++k)
      if (s.eig.eigenvalues[j] + s.eig.eigenvalues[k] > s.tau) acc += std::norm(r_eig(j, k));
  return std::sqrt(acc);
}

QfiResult qfi_numeric(const ApertureArray& array, const Parametrization& param, double theta,
                      int j_max, const TruncationPolicy& policy) {
  if (!param.scene_at || !param.tangent_at) throw ValidationError("parametrization is incomplete");
  const Scene scene = param.scene_at(theta);
  const SceneTangent tangent = param.tangent_at(theta);
  const DensityMatrix rho = density_matrix(array, scene, j_max, policy);
  const HermitianMatrix drho = density_matrix_derivative(array, scene, tangent, j_max);
  const SldResult s = sld(rho.matrix, drho);

  const ComplexMatrix& v = s.eig.eigenvectors;
  const ComplexMatrix l_eig = v.adjoint() * s.sld.matrix() * v;
  double total = 0.0;
  for (std::size_t j = 0; j < rho.matrix.dim(); ++j) {
    const double dj = s.eig.eigenvalues[j];
    if (dj <= 0.0) continue;
    for (std::size_t k = 0; k < rho.matrix.dim(); ++k) total += dj * std::norm(l_eig(j, k));
  }

  QfiResult out;
  out.total = scene.n_photons() * total;
  out.n_photons = scene.n_photons();
  out.trace_deficit = rho.trace_deficit;
  out.skipped_pairs = s.skipped_pairs;
  out.sld_residual = sld_residual(rho.matrix, drho, s);
  if (param.kind == Parametrization::Kind::TwoPoint && array.symmetric()) {
    const QfiResult a = qfi_two_point_analytic(array, scene.n_photons());
    out.k_1ap = a.k_1ap;
    out.k_lb = a.k_lb;
  }
  return out;
}

QfiResult qfi_two_point_analytic(const ApertureArray& array, double n_photons) {
  array.require_symmetric("analytic two-point QFI");
  if (!(n_photons > 0.0)) throw ValidationError("photon number N must be > 0");
  QfiResult out;
  const double s = array.sigma();
  out.k_1ap = 4.0 * pi * pi * n_photons / (3.0 * s * s);
  out.k_lb = 4.0 * n_photons * array.mean_alpha2();
  out.total = *out.k_1ap + *out.k_lb;
  out.n_photons = n_photons;
  return out;
}

TwoPointSldWorkspace two_point_sld_workspace(const ApertureArray& array, double theta,
                                             double n_photons) {
  array.require_symmetric("two-point SLD workspace");
  if (!(theta >= 0.0)) throw ValidationError("theta must be >= 0");
  const double delta = array.delta();
  const double weight = 1.0 / (static_cast<double>(array.n()) * delta);  // |psi~(k)|^2 on each aperture
  static const auto rule = numerics::gauss_legendre(48);
  const auto panels = static_cast<std::size_t>(1.0 + std::ceil(2.0 * theta * delta));

  auto moment = [&](auto&& f) {
    double acc = 0.0;
    for (double al : array.positions()) {
      acc += numerics::integrate_gauss_legendre(f, al - 0.5 * delta, al + 0.5 * delta, rule, panels);
    }
    return weight * acc;
  };

  TwoPointSldWorkspace w;
  w.theta = theta;
  const double t2 = 2.0 * theta;
  w.delta_overlap = moment([&](double k) { return std::cos(k * t2); });
  w.delta_k2 = moment([&](double k) { return k * k; });
  w.gamma = -moment([&](double k) { return k * std::sin(k * t2); });
  w.b2 = moment([&](double k) { return k * k * std::cos(k * t2); });
  w.d1 = 0.5 * (1.0 - w.delta_overlap);
  w.d2 = 0.5 * (1.0 + w.delta_overlap);
  w.qfi = 4.0 * n_photons * w.delta_k2;

  const double one_minus = 1.0 - w.delta_overlap;
  const double one_plus = 1.0 + w.delta_overlap;
  if (theta < 1e-6 * array.sigma() || one_minus <= 1e-12) {
    w.degenerate = true;
    w.c3 = 0.0;
    w.c4 = 0.0;
    w.l11 = std::numeric_limits<double>::quiet_NaN();
    w.l13 = std::numeric_limits<double>::quiet_NaN();
    w.l22 = 0.0;
    w.l24 = 0.0;
    return w;
  }
  const double c3sq = w.delta_k2 + w.b2 - w.gamma * w.gamma / one_minus;
  const double c4sq = w.delta_k2 - w.b2 - w.gamma * w.gamma / one_plus;
  w.c3 = std::sqrt(std::max(0.0, c3sq));
  w.c4 = std::sqrt(std::max(0.0, c4sq));
  w.l11 = -2.0 * w.gamma / one_minus;
  w.l13 = -2.0 * w.c3 / std::sqrt(one_minus);
  w.l22 = 2.0 * w.gamma / one_plus;
  w.l24 = -2.0 * w.c4 / std::sqrt(one_plus);
  return w;
}

}  // namespace multiap
