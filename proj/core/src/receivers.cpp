#include "multiap/receivers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <type_traits>

#include "multiap/errors.hpp"
#include "multiap/quantum.hpp"

namespace multiap {

using numerics::cplx;
using std::numbers::pi;

namespace {

constexpr double kSmallTheta = 1e-6;  // sigma units
constexpr double kZeroP = 1e-14;
constexpr double kZeroDp = 1e-12;

// Value of a per-source quantity and its first two derivatives in x.
struct Jet {
  double f = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
};

// Folds per-source jets into outcome probabilities and theta-derivatives.
template <class Fn>
std::vector<Outcome> accumulate(const Scene& scene, const SceneTangent& tangent,
                                const std::vector<std::string>& labels, Fn&& jets_at) {
  const auto& src = scene.sources();
  if (tangent.d_position.size() != src.size() || tangent.d_brightness.size() != src.size()) {
    throw ValidationError("scene tangent does not match the number of sources");
  }
  auto second = [](const std::vector<double>& v, std::size_t s) { return v.empty() ? 0.0 : v.at(s); };
  std::vector<Outcome> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[i].label = labels[i];
    out[i].d2p = 0.0;
  }
  for (std::size_t s = 0; s < src.size(); ++s) {
    const std::vector<Jet> jets = jets_at(src[s].position);
    const double b = src[s].brightness;
    const double db = tangent.d_brightness[s];
    const double dx = tangent.d_position[s];
    const double d2b = second(tangent.d2_brightness, s);
    const double d2x = second(tangent.d2_position, s);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const Jet& j = jets[i];
      out[i].p += b * j.f;
      out[i].dp += db * j.f + b * dx * j.f1;
      *out[i].d2p += d2b * j.f + 2.0 * db * dx * j.f1 + b * (d2x * j.f1 + dx * dx * j.f2);
    }
  }
  return out;
}

Jet abs2_jet(cplx a, cplx da, cplx d2a) {
  return {std::norm(a), 2.0 * std::real(std::conj(a) * da),
          2.0 * (std::norm(da) + std::real(std::conj(a) * d2a))};
}

Jet tail_jet(int j_max, double x, double sigma) {
  const auto t = gamma_tail(j_max, x, sigma);
  return {t.value, t.deriv, t.deriv2};
}

std::vector<std::string> bucket_label(std::vector<std::string> labels) {
  labels.push_back("bucket");
  return labels;
}

void require_n2(const ApertureArray& array, const char* what) {
  if (array.n() != 2) throw ValidationError(std::string(what) + " requires exactly two apertures");
  array.require_symmetric(what);
}

CfiResult finish(CfiResult r, const std::string& name, double theta) {
  r.receiver = name;
  r.theta = theta;
  return r;
}

}  // namespace

std::string receiver_name(const ReceiverSpec& spec) {
  struct Visitor {
    std::string operator()(const DirectImaging&) const { return "direct_imaging"; }
    std::string operator()(const FullSpade& s) const {
      return std::string(s.basis == SpadeBasis::LocalModes ? "spade_local_j" : "spade_gs_j") +
             std::to_string(s.j_max);
    }
    std::string operator()(const BinSpade0&) const { return "binspade0"; }
    std::string operator()(const BinSpade1&) const { return "binspade1"; }
    std::string operator()(const TrinarySpade&) const { return "trinary_spade"; }
    std::string operator()(const Sliver&) const { return "sliver"; }
    std::string operator()(const Groupwise& g) const {
      return "groupwise_j" + std::to_string(g.j_max) + (g.with_bucket ? "" : "_nobucket");
    }
    std::string operator()(const UniversalCoaxial& u) const {
      return "universal_coaxial_j" + std::to_string(u.j_max);
    }
    std::string operator()(const LightPipe&) const { return "lightpipe"; }
    std::string operator()(const LightPipeReflected&) const { return "lightpipe_reflected"; }
  };
  return std::visit(Visitor{}, spec);
}

ComplexMatrix pairwise_coeffs(const ApertureArray& array) {
  array.require_symmetric("pairwise combination");
  const std::size_t n = array.n();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return array.alpha(a) < array.alpha(b); });
  ComplexMatrix c(n, n);
  const double h = 1.0 / std::sqrt(2.0);
  std::size_t row = 0;
  for (std::size_t i = 0; i < n / 2; ++i) {
    const std::size_t lo = order[i];
    const std::size_t hi = order[n - 1 - i];
    c(row, lo) = h;
    c(row, hi) = h;
    ++row;
    c(row, lo) = h;
    c(row, hi) = -h;
    ++row;
  }
  if (n % 2 == 1) c(row, order[n / 2]) = 1.0;
  return c;
}

void require_unitary(const ComplexMatrix& c, const char* what, double tol) {
  if (c.rows() != c.cols() || c.rows() == 0) {
    throw ValidationError(std::string(what) + " coefficient matrix must be square and non-empty");
  }
  const double err = (c.adjoint() * c - ComplexMatrix::identity(c.rows())).frobenius_norm();
  if (err > tol) {
    std::ostringstream msg;
    msg << what << " coefficient matrix is not unitary (||c^dagger c - I|| = " << err << ")";
    throw ValidationError(msg.str());
  }
}

double OutcomeDistribution::total_probability() const {
  double s = 0.0;
  for (const auto& o : outcomes) s += o.p;
  return s;
}

double OutcomeDistribution::total_derivative() const {
  double s = 0.0;
  for (const auto& o : outcomes) s += o.dp;
  return s;
}

// Distributions ----------------------------------------------------------------

OutcomeDistribution direct_imaging_dist(const ApertureArray& array, const Scene& scene,
                                        const SceneTangent& tangent, const DirectImaging& spec) {
  if (tangent.d_position.size() != scene.sources().size() ||
      tangent.d_brightness.size() != scene.sources().size()) {
    throw ValidationError("scene tangent does not match the number of sources");
  }
  OutcomeDistribution d;
  d.continuous = true;
  d.quad = spec.quad;
  d.quad.scale = array.sigma();
  d.density = [array, scene](double x) {
    double p = 0.0;
    for (const auto& s : scene.sources()) p += s.brightness * intensity_compound(array, x - s.position).value;
    return p;
  };
  d.density_deriv = [array, scene, tangent](double x) {
    double dp = 0.0;
    const auto& src = scene.sources();
    for (std::size_t s = 0; s < src.size(); ++s) {
      const auto in = intensity_compound(array, x - src[s].position);
      dp += tangent.d_brightness[s] * in.value - src[s].brightness * tangent.d_position[s] * in.deriv;
    }
    return dp;
  };

  // (dP)^2/P <= sum_s (db_s I - b_s dx_s I')^2/(b_s I), with I <= n sigma/(pi^2 x^2)
  // and I'^2/I <= 4|psi'|^2 <= (4/n)(sum|alpha| + n pi/sigma (1 + 1/(pi L)))^2 sigma/(pi^2 x^2).
  double sum_alpha = 0.0;
  for (double a : array.positions()) sum_alpha += std::abs(a);
  const double n = static_cast<double>(array.n());
  const double slope = sum_alpha + n * pi / array.sigma() * (1.0 + 1.0 / (pi * spec.quad.domain_halfwidth));
  const double shift_c = 4.0 / n * slope * slope;
  bool mixed = false;
  double c_pos = 0.0;
  double c_bright = 0.0;
  for (std::size_t s = 0; s < scene.sources().size(); ++s) {
    const double b = scene.sources()[s].brightness;
    c_pos += b * tangent.d_position[s] * tangent.d_position[s] * shift_c;
    c_bright += tangent.d_brightness[s] * tangent.d_brightness[s] / b * n;
    if (tangent.d_brightness[s] != 0.0) mixed = true;
  }
  d.tail_coefficient = mixed ? 2.0 * (c_pos + c_bright) : c_pos;
  return d;
}

OutcomeDistribution local_spade_dist(const ApertureArray& array, const Scene& scene,
                                     const SceneTangent& tangent, int j_max) {
  if (j_max < 0) throw ValidationError("j_max must be >= 0");
  const std::size_t n = array.n();
  std::vector<std::string> labels;
  for (int j = 0; j <= j_max; ++j)
    for (std::size_t mu = 0; mu < n; ++mu) labels.push_back("j" + std::to_string(j) + "_a" + std::to_string(mu));
  labels = bucket_label(labels);
  const double inv_n = 1.0 / static_cast<double>(n);
  OutcomeDistribution d;
  d.outcomes = accumulate(scene, tangent, labels, [&](double x) {
    const auto t = gamma_table(j_max, x, array.sigma());
    std::vector<Jet> jets;
    for (int j = 0; j <= j_max; ++j) {
      const Jet g{t.g[j] * t.g[j] * inv_n, 2.0 * t.g[j] * t.g1[j] * inv_n,
                  2.0 * (t.g1[j] * t.g1[j] + t.g[j] * t.g2[j]) * inv_n};
      for (std::size_t mu = 0; mu < n; ++mu) jets.push_back(g);
    }
    jets.push_back(tail_jet(j_max, x, array.sigma()));
    return jets;
  });
  return d;
}

OutcomeDistribution gram_schmidt_spade_dist(const ApertureArray& array, const Scene& scene,
                                            const SceneTangent& tangent, int order) {
  const CompoundGramSchmidt gs(array, order);
  const int jm = gs.label_j_max();
  std::vector<std::string> labels;
  for (int m = 0; m < order; ++m) labels.push_back("gs" + std::to_string(m));
  labels = bucket_label(labels);
  const auto& coeffs = gs.coefficients();
  OutcomeDistribution d;
  d.outcomes = accumulate(scene, tangent, labels, [&](double x) {
    const auto loc = local_amplitudes(array, jm, x);
    std::vector<cplx> r = loc.a, dr = loc.da, d2r = loc.d2a;
    std::vector<Jet> jets;
    for (const auto& c : coeffs) {
      cplx a{}, da{}, d2a{};
      for (std::size_t i = 0; i < c.size(); ++i) {
        const cplx cc = std::conj(c[i]);
        a += cc * loc.a[i];
        da += cc * loc.da[i];
        d2a += cc * loc.d2a[i];
      }
      for (std::size_t i = 0; i < c.size(); ++i) {
        r[i] -= a * c[i];
        dr[i] -= da * c[i];
        d2r[i] -= d2a * c[i];
      }
      jets.push_back(abs2_jet(a, da, d2a));
    }
    // Complement inside the retained labels, plus everything above them.
    Jet rest = tail_jet(jm, x, array.sigma());
    for (std::size_t i = 0; i < r.size(); ++i) {
      const Jet e = abs2_jet(r[i], dr[i], d2r[i]);
      rest.f += e.f;
      rest.f1 += e.f1;
      rest.f2 += e.f2;
    }
    jets.push_back(rest);
    return jets;
  });
  return d;
}

OutcomeDistribution groupwise_dist(const ApertureArray& array, const Scene& scene,
                                   const SceneTangent& tangent, const Groupwise& spec) {
  if (spec.j_max < 0) throw ValidationError("j_max must be >= 0");
  if (spec.coeffs.rows() != array.n()) throw ValidationError("groupwise coefficients must be n x n");
  require_unitary(spec.coeffs, "groupwise");
  const std::size_t n = array.n();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<std::string> labels;
  for (int j = 0; j <= spec.j_max; ++j)
    for (std::size_t g = 0; g < n; ++g) labels.push_back("j" + std::to_string(j) + "_p" + std::to_string(g));
  labels = bucket_label(labels);
  OutcomeDistribution d;
  d.outcomes = accumulate(scene, tangent, labels, [&](double x) {
    std::vector<Jet> ports(n);
    for (std::size_t g = 0; g < n; ++g) {
      cplx h{}, h1{}, h2{};
      for (std::size_t mu = 0; mu < n; ++mu) {
        const double al = array.alpha(mu);
        const cplx e = std::conj(spec.coeffs(g, mu)) * std::polar(1.0, -al * x);
        h += e;
        h1 += cplx{0.0, -al} * e;
        h2 += -al * al * e;
      }
      ports[g] = abs2_jet(h, h1, h2);
    }
    const auto t = gamma_table(spec.j_max, x, array.sigma());
    std::vector<Jet> jets;
    for (int j = 0; j <= spec.j_max; ++j) {
      const double gg = t.g[j] * t.g[j];
      const double gg1 = 2.0 * t.g[j] * t.g1[j];
      const double gg2 = 2.0 * (t.g1[j] * t.g1[j] + t.g[j] * t.g2[j]);
      for (const Jet& b : ports) {
        jets.push_back({inv_n * b.f * gg, inv_n * (b.f1 * gg + b.f * gg1),
                        inv_n * (b.f2 * gg + 2.0 * b.f1 * gg1 + b.f * gg2)});
      }
    }
    jets.push_back(tail_jet(spec.j_max, x, array.sigma()));
    return jets;
  });
  d.outcomes.back().counted = spec.with_bucket;
  return d;
}

OutcomeDistribution universal_coaxial_dist(const ApertureArray& array, const Scene& scene,
                                           const SceneTangent& tangent, const UniversalCoaxial& spec) {
  if (spec.j_max < 0) throw ValidationError("j_max must be >= 0");
  const std::size_t dim = (static_cast<std::size_t>(spec.j_max) + 1) * array.n();
  if (spec.d.rows() != dim) throw ValidationError("universal co-axial matrix must cover all (j, mu) labels");
  require_unitary(spec.d, "universal co-axial");
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < dim; ++k) labels.push_back("xi" + std::to_string(k));
  labels = bucket_label(labels);
  OutcomeDistribution d;
  d.outcomes = accumulate(scene, tangent, labels, [&](double x) {
    const auto loc = local_amplitudes(array, spec.j_max, x);
    std::vector<Jet> jets;
    for (std::size_t k = 0; k < dim; ++k) {
      cplx a{}, da{}, d2a{};
      for (std::size_t l = 0; l < dim; ++l) {
        const cplx c = std::conj(spec.d(k, l));
        a += c * loc.a[l];
        da += c * loc.da[l];
        d2a += c * loc.d2a[l];
      }
      jets.push_back(abs2_jet(a, da, d2a));
    }
    jets.push_back(tail_jet(spec.j_max, x, array.sigma()));
    return jets;
  });
  return d;
}

OutcomeDistribution lightpipe_dist(const ApertureArray& array, const Scene& scene,
                                   const SceneTangent& tangent, const LightPipe& spec) {
  if (spec.coeffs.rows() != array.n()) throw ValidationError("light-pipe coefficients must be n x n");
  require_unitary(spec.coeffs, "light-pipe");
  const std::size_t n = array.n();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<std::string> labels;
  for (std::size_t g = 0; g < n; ++g) labels.push_back("p" + std::to_string(g));
  OutcomeDistribution d;
  d.outcomes = accumulate(scene, tangent, labels, [&](double x) {
    std::vector<Jet> jets;
    for (std::size_t g = 0; g < n; ++g) {
      cplx h{}, h1{}, h2{};
      for (std::size_t mu = 0; mu < n; ++mu) {
        const double al = array.alpha(mu);
        const cplx e = std::conj(spec.coeffs(g, mu)) * std::polar(1.0, -al * x);
        h += e;
        h1 += cplx{0.0, -al} * e;
        h2 += -al * al * e;
      }
      Jet b = abs2_jet(h, h1, h2);
      jets.push_back({inv_n * b.f, inv_n * b.f1, inv_n * b.f2});
    }
    return jets;
  });
  return d;
}

OutcomeDistribution lightpipe_reflected_dist(const ApertureArray& array, const Scene& scene,
                                             const SceneTangent& tangent) {
  array.require_symmetric("reflected light pipe");
  const double n = static_cast<double>(array.n());
  std::vector<double> pair_alphas;
  for (double a : array.positions())
    if (a > 0.0) pair_alphas.push_back(a);
  std::sort(pair_alphas.begin(), pair_alphas.end());
  const bool centre = array.n() % 2 == 1;
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < pair_alphas.size(); ++k) {
    labels.push_back("pair" + std::to_string(k) + "_plus");
    labels.push_back("pair" + std::to_string(k) + "_minus");
  }
  if (centre) {
    labels.push_back("centre_plus");
    labels.push_back("centre_minus");
  }
  OutcomeDistribution d;
  d.outcomes = accumulate(scene, tangent, labels, [&](double x) {
    const auto g = autocorr_single_derivs(2.0 * x, array.sigma());
    std::vector<Jet> jets;
    for (double al : pair_alphas) {
      const double c = std::cos(2.0 * al * x);
      const double s = std::sin(2.0 * al * x);
      const double v = c * g.g0;
      const double v1 = -2.0 * al * s * g.g0 + 2.0 * c * g.g1;
      const double v2 = -4.0 * al * al * c * g.g0 - 8.0 * al * s * g.g1 + 4.0 * c * g.g2;
      jets.push_back({(1.0 + v) / n, v1 / n, v2 / n});
      jets.push_back({(1.0 - v) / n, -v1 / n, -v2 / n});
    }
    if (centre) {
      const double h = 0.5 / n;
      jets.push_back({h * (1.0 + g.g0), h * 2.0 * g.g1, h * 4.0 * g.g2});
      jets.push_back({h * (1.0 - g.g0), -h * 2.0 * g.g1, -h * 4.0 * g.g2});
    }
    return jets;
  });
  return d;
}

OutcomeDistribution sliver_dist(const ApertureArray& array, const TwoPointScene& tp) {
  array.require_symmetric("SLIVER");
  tp.validate();
  const auto g = autocorr_derivs_real(array, 2.0 * tp.theta);
  OutcomeDistribution d;
  d.outcomes.push_back({"even", 0.5 * (1.0 + g.g0), g.g1, 2.0 * g.g2, true});
  d.outcomes.push_back({"odd", 0.5 * (1.0 - g.g0), -g.g1, -2.0 * g.g2, true});
  return d;
}

OutcomeDistribution binspade_dist(const ApertureArray& array, const TwoPointScene& tp, int which) {
  array.require_symmetric("BinSPADE");
  tp.validate();
  if (which != 0 && which != 1) throw ValidationError("BinSPADE mode must be 0 or 1");
  const auto g = autocorr_derivs_real(array, tp.theta);
  OutcomeDistribution d;
  if (which == 0) {
    const double p = g.g0 * g.g0;
    const double dp = 2.0 * g.g0 * g.g1;
    const double d2p = 2.0 * (g.g1 * g.g1 + g.g0 * g.g2);
    d.outcomes.push_back({"mode0", p, dp, d2p, true});
    d.outcomes.push_back({"rest", 1.0 - p, -dp, -d2p, true});
  } else {
    const double norm = -autocorr_derivs_real(array, 0.0).g2;
    const double p = g.g1 * g.g1 / norm;
    const double dp = 2.0 * g.g1 * g.g2 / norm;
    const double d2p = 2.0 * (g.g2 * g.g2 + g.g1 * g.g3) / norm;
    d.outcomes.push_back({"mode1", p, dp, d2p, true});
    d.outcomes.push_back({"rest", 1.0 - p, -dp, -d2p, true});
  }
  return d;
}

OutcomeDistribution outcome_distribution(const ApertureArray& array, const ReceiverSpec& spec,
                                         const TwoPointScene& tp) {
  tp.validate();
  const Scene scene = tp.scene();
  const SceneTangent tangent = tp.tangent();
  struct Visitor {
    const ApertureArray& array;
    const TwoPointScene& tp;
    const Scene& scene;
    const SceneTangent& tangent;
    OutcomeDistribution operator()(const DirectImaging& s) const {
      return direct_imaging_dist(array, scene, tangent, s);
    }
    OutcomeDistribution operator()(const FullSpade& s) const {
      if (s.basis == SpadeBasis::LocalModes) return local_spade_dist(array, scene, tangent, s.j_max);
      return gram_schmidt_spade_dist(array, scene, tangent, s.j_max + 1);
    }
    OutcomeDistribution operator()(const BinSpade0&) const { return binspade_dist(array, tp, 0); }
    OutcomeDistribution operator()(const BinSpade1&) const { return binspade_dist(array, tp, 1); }
    OutcomeDistribution operator()(const TrinarySpade&) const {
      require_n2(array, "trinary SPADE");
      return groupwise_dist(array, scene, tangent, Groupwise{pairwise_coeffs(array), 0, true});
    }
    OutcomeDistribution operator()(const Sliver&) const { return sliver_dist(array, tp); }
    OutcomeDistribution operator()(const Groupwise& g) const { return groupwise_dist(array, scene, tangent, g); }
    OutcomeDistribution operator()(const UniversalCoaxial& u) const {
      return universal_coaxial_dist(array, scene, tangent, u);
    }
    OutcomeDistribution operator()(const LightPipe& l) const { return lightpipe_dist(array, scene, tangent, l); }
    OutcomeDistribution operator()(const LightPipeReflected&) const {
      return lightpipe_reflected_dist(array, scene, tangent);
    }
  };
  return std::visit(Visitor{array, tp, scene, tangent}, spec);
}

// Fisher information ------------------------------------------------------------

CfiResult cfi_from_distribution(const OutcomeDistribution& dist, double n_photons) {
  if (!(n_photons > 0.0)) throw ValidationError("photon number N must be > 0");
  CfiResult r;
  if (dist.continuous) {
    if (!dist.density || !dist.density_deriv) throw ValidationError("continuous distribution lacks a density");
    numerics::QuadratureSpec q = dist.quad;
    q.tail_coefficient = dist.tail_coefficient;
    const auto& p = dist.density;
    const auto& dp = dist.density_deriv;
    const auto res = numerics::integrate(
        [&](double x) {
          const double px = p(x);
          if (!(px > 1e-300)) return 0.0;
          const double d = dp(x);
          return d * d / px;
        },
        q);
    r.value = n_photons * res.value;
    r.tail_bound = n_photons * res.tail_bound;
    r.per_outcome.push_back(r.value);
    return r;
  }
  for (const auto& o : dist.outcomes) {
    double term = 0.0;
    if (o.counted) {
      if (o.p < kZeroP && std::abs(o.dp) < kZeroDp) {
        if (o.d2p) term = std::max(0.0, 2.0 * *o.d2p);
      } else if (o.p < kZeroP) {
        term = o.p > 0.0 ? o.dp * o.dp / o.p : std::numeric_limits<double>::infinity();
        // near a double zero dp^2/p stays close to 2 d2p; anything far above is singular
        if (!o.d2p || !(term <= 4.0 * std::max(0.0, *o.d2p))) {
          r.warnings.push_back("outcome '" + o.label + "' has vanishing probability with non-zero derivative");
        }
      } else {
        term = o.dp * o.dp / o.p;
      }
    }
    r.per_outcome.push_back(n_photons * term);
    r.value += n_photons * term;
  }
  return r;
}

CfiResult direct_imaging_cfi(const ApertureArray& array, const TwoPointScene& tp,
                             const numerics::QuadratureSpec& quad) {
  tp.validate();
  DirectImaging spec{quad};
  const auto d = direct_imaging_dist(array, tp.scene(), tp.tangent(), spec);
  return finish(cfi_from_distribution(d, tp.n_photons), "direct_imaging", tp.theta);
}

CfiResult binspade_cfi(const ApertureArray& array, const TwoPointScene& tp, int which) {
  CfiResult r = cfi_from_distribution(binspade_dist(array, tp, which), tp.n_photons);
  const auto g = autocorr_derivs_real(array, tp.theta);
  const double g2_0 = autocorr_derivs_real(array, 0.0).g2;
  const double nn = tp.n_photons;
  if (which == 0) {
    r.value = tp.theta < kSmallTheta * array.sigma() ? -4.0 * nn * g2_0
                                                     : 4.0 * nn * g.g1 * g.g1 / (1.0 - g.g0 * g.g0);
  } else {
    r.value = -4.0 * nn * g.g2 * g.g2 / (g2_0 + g.g1 * g.g1);
  }
  return finish(std::move(r), which == 0 ? "binspade0" : "binspade1", tp.theta);
}

CfiResult sliver_cfi(const ApertureArray& array, const TwoPointScene& tp) {
  CfiResult r = cfi_from_distribution(sliver_dist(array, tp), tp.n_photons);
  const double nn = tp.n_photons;
  if (tp.theta < kSmallTheta * array.sigma()) {
    r.value = -4.0 * nn * autocorr_derivs_real(array, 0.0).g2;
  } else {
    const auto g = autocorr_derivs_real(array, 2.0 * tp.theta);
    r.value = 4.0 * nn * g.g1 * g.g1 / (1.0 - g.g0 * g.g0);
  }
  return finish(std::move(r), "sliver", tp.theta);
}

CfiResult trinary_spade_cfi(const ApertureArray& array, const TwoPointScene& tp) {
  require_n2(array, "trinary SPADE");
  tp.validate();
  const double s = array.sigma();
  const double nn = tp.n_photons;
  const double r2 = array.r() * array.r();
  const auto g = autocorr_single_derivs(tp.theta, s);
  const double single = tp.theta < kSmallTheta * s ? -4.0 * nn * autocorr_single_derivs(0.0, s).g2
                                                   : 4.0 * nn * g.g1 * g.g1 / (1.0 - g.g0 * g.g0);
  CfiResult r;
  r.value = single + 4.0 * pi * pi * nn * r2 / (s * s) * g.g0 * g.g0;
  r.per_outcome = {single, r.value - single};
  return finish(std::move(r), "trinary_spade", tp.theta);
}

CfiResult groupwise_cfi(const ApertureArray& array, const TwoPointScene& tp, const Groupwise& spec) {
  tp.validate();
  const auto d = groupwise_dist(array, tp.scene(), tp.tangent(), spec);
  return finish(cfi_from_distribution(d, tp.n_photons), receiver_name(spec), tp.theta);
}

CfiResult lightpipe_cfi(const ApertureArray& array, const TwoPointScene& tp, const LightPipe& spec) {
  tp.validate();
  const auto d = lightpipe_dist(array, tp.scene(), tp.tangent(), spec);
  return finish(cfi_from_distribution(d, tp.n_photons), "lightpipe", tp.theta);
}

double groupwise_truncated_closed_form(const ApertureArray& array, const TwoPointScene& tp, int j_max) {
  array.require_symmetric("truncated groupwise closed form");
  tp.validate();
  const double nn = tp.n_photons;
  const auto t = gamma_table(j_max, tp.theta, array.sigma());
  const auto tail = gamma_tail(j_max, tp.theta, array.sigma());
  double sum_d2 = 0.0;
  for (int j = 0; j <= j_max; ++j) sum_d2 += t.g1[j] * t.g1[j];
  // sum_{j<=J} Gamma_j Gamma_j' = -tail'/2 and 1 - sum Gamma_j^2 = tail
  const double bucket = tail.value > 1e-300 ? tail.deriv * tail.deriv / (4.0 * tail.value) : 0.0;
  const double k_lb = 4.0 * nn * array.mean_alpha2();
  return 4.0 * nn * sum_d2 + 4.0 * nn * bucket + k_lb * (1.0 - tail.value);
}

double pairwise_mode_contribution(const ApertureArray& array, const TwoPointScene& tp, int j) {
  tp.validate();
  const auto t = gamma_table(j, tp.theta, array.sigma());
  return 4.0 * tp.n_photons * (t.g1[j] * t.g1[j] + array.mean_alpha2() * t.g[j] * t.g[j]);
}

CfiResult compute_cfi(const ApertureArray& array, const ReceiverSpec& spec, const TwoPointScene& tp) {
  tp.validate();
  return std::visit(
      [&](const auto& s) -> CfiResult {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DirectImaging>) {
          return direct_imaging_cfi(array, tp, s.quad);
        } else if constexpr (std::is_same_v<T, BinSpade0>) {
          return binspade_cfi(array, tp, 0);
        } else if constexpr (std::is_same_v<T, BinSpade1>) {
          return binspade_cfi(array, tp, 1);
        } else if constexpr (std::is_same_v<T, TrinarySpade>) {
          return trinary_spade_cfi(array, tp);
        } else if constexpr (std::is_same_v<T, Sliver>) {
          return sliver_cfi(array, tp);
        } else {
          return finish(cfi_from_distribution(outcome_distribution(array, spec, tp), tp.n_photons),
                        receiver_name(spec), tp.theta);
        }
      },
      spec);
}

ThetaMax theta_max_vs_longbaseline(const ReceiverSpec& spec, double r, double lo, double hi,
                                   std::size_t scan_points) {
  if (!(lo > 0.0) || !(hi > lo)) throw ValidationError("theta bracket must satisfy 0 < lo < hi");
  if (scan_points < 2) throw ValidationError("theta scan needs at least two points");
  const ApertureArray array = ApertureArray::pair(r, 1.0);
  const double k_lb = *qfi_two_point_analytic(array, 1.0).k_lb;
  auto f = [&](double theta) { return compute_cfi(array, spec, TwoPointScene{theta, 1.0}).value - k_lb; };

  std::vector<double> grid(scan_points);
  std::vector<double> vals(scan_points);
  bool flat = true;
  for (std::size_t i = 0; i < scan_points; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(scan_points - 1);
    vals[i] = f(grid[i]);
    if (std::abs(vals[i]) > 1e-9 * k_lb) flat = false;
  }
  ThetaMax out;
  if (flat) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t i = 1; i < scan_points; ++i) {
    if (vals[i - 1] == 0.0) {
      out.theta = grid[i - 1];
      return out;
    }
    if ((vals[i - 1] > 0.0) != (vals[i] > 0.0)) {
      double a = grid[i - 1];
      double b = grid[i];
      double fa = vals[i - 1];
      while (b - a > 1e-6) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if ((fm > 0.0) == (fa > 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      out.theta = 0.5 * (a + b);
      return out;
    }
  }
  std::ostringstream msg;
  msg << receiver_name(spec) << " CFI does not cross the long-baseline QFI on [" << lo << ", " << hi
      << "] sigma at r = " << r;
  throw NumericError(msg.str());
}

}  // namespace multiap
