// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "multiap/estimation.hpp"
#include "multiap/modes.hpp"
#include "multiap/numerics.hpp"
#include "multiap/quantum.hpp"
#include "multiap/receivers.hpp"
#include "support.hpp"

using namespace multiap;
using std::numbers::pi;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

void analytic_qfi(Verdict& o) {
  double worst = 0.0;
  for (double sigma : {1.0, 0.7}) {
    for (double n : {1.0, 3.0}) {
      const double k1 = 4.0 * pi * pi * n / (3.0 * sigma * sigma);
      worst = std::max(worst, rel(qfi_two_point_analytic(ApertureArray::single(sigma), n).total, k1));
      for (double r : {1.0, 1.71, 2.0, 3.0}) {
        const double k2 = k1 * (3.0 * r * r + 1.0);
        worst = std::max(worst, rel(qfi_two_point_analytic(ApertureArray::pair(r, sigma), n).total, k2));
      }
    }
  }
  o.detail << "max relative error " << worst;
  o.require(worst <= 1e-12, "relative error above 1e-12");
}

void numeric_qfi(Verdict& o) {
  double worst = 0.0;
  for (double r : {1.0, 2.0, 3.0}) {
    const auto array = ApertureArray::pair(r);
    const double analytic = qfi_two_point_analytic(array, 1.0).total;
    for (double theta : {0.1, 0.5})
      worst = std::max(worst, rel(qfi_numeric(array, Parametrization::two_point(1.0), theta, 40).total, analytic));
  }
  o.detail << "j_max 40, max relative deviation " << worst;
  o.require(worst < 1e-3, "deviation above 0.1%");
}

void pairwise_optimality(Verdict& o) {
  double lowest = 1.0;
  bool monotone = true;
  for (double r : {1.0, 2.0, 3.0}) {
    const auto pair = ApertureArray::pair(r);
    const double q = qfi_two_point_analytic(pair, 1.0).total;
    for (double theta : {0.05, 0.2, 0.5, 0.9}) {
      double prev = 0.0;
      for (int j = 0; j <= 40; ++j) {
        const double v = groupwise_cfi(pair, TwoPointScene{theta, 1.0}, Groupwise{pairwise_coeffs(pair), j, false}).value;
        if (v < prev * (1.0 - 1e-12)) monotone = false;
        prev = v;
      }
      lowest = std::min(lowest, prev / q);
    }
  }
  o.detail << "lowest CFI/QFI at j_max 40: " << lowest << (monotone ? ", monotone" : ", not monotone");
  o.require(lowest >= 0.999, "below 99.9% of the QFI");
  o.require(monotone, "partial sums decrease");
}

void small_theta(Verdict& o) {
  double lo = 2.0;
  double hi = 0.0;
  const std::vector<ReceiverSpec> specs{BinSpade0{}, BinSpade1{}, Sliver{}, TrinarySpade{}};
  for (double r : {1.0, 2.0, 3.0}) {
    const auto pair = ApertureArray::pair(r);
    const double q = qfi_two_point_analytic(pair, 1.0).total;
    for (const auto& s : specs) {
      const double ratio = compute_cfi(pair, s, TwoPointScene{1e-3, 1.0}).value / q;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  o.detail << "CFI/QFI at theta = 1e-3 in [" << lo << ", " << hi << "]";
  o.require(lo >= 0.999, "ratio below 0.999");
  o.require(hi <= 1.0 + 1e-9, "ratio above 1");
}

void rayleigh_curse(Verdict& o) {
  bool decreasing = true;
  double at_001 = 0.0;
  for (double r : {1.0, 2.0, 3.0}) {
    const auto pair = ApertureArray::pair(r);
    const double q = qfi_two_point_analytic(pair, 1.0).total;
    double prev = 2.0;
    for (double theta : {0.1, 0.05, 0.02, 0.01, 0.005, 0.002}) {
      const double ratio = direct_imaging_cfi(pair, TwoPointScene{theta, 1.0}).value / q;
      if (!(ratio < prev)) decreasing = false;
      prev = ratio;
      if (theta == 0.01) at_001 = std::max(at_001, ratio);
    }
  }
  o.detail << "direct imaging CFI/QFI at theta = 0.01: " << at_001 << (decreasing ? ", decreasing" : ", not decreasing");
  o.require(at_001 < 0.05, "ratio not below 0.05");
  o.require(decreasing, "ratio does not fall as theta shrinks");
}

void lightpipe_flat(Verdict& o) {
  double worst = 0.0;
  for (double sigma : {1.0, 0.8}) {
    for (double r : {1.0, 2.0, 3.0}) {
      const auto pair = ApertureArray::pair(r, sigma);
      const double expect = 4.0 * pi * pi * r * r * 2.0 / (sigma * sigma);
      for (int i = 1; i <= 50; ++i) {
        const double theta = sigma * i / 50.0;
        const double v = lightpipe_cfi(pair, TwoPointScene{theta, 2.0}, LightPipe{pairwise_coeffs(pair)}).value;
        worst = std::max(worst, rel(v, expect));
      }
    }
  }
  o.detail << "max relative deviation from 4 pi^2 r^2 N/sigma^2: " << worst;
  o.require(worst < 1e-9, "deviation above 1e-9");
}

void lbt_case(Verdict& o) {
  const auto lbt = qfi_two_point_analytic(ApertureArray::pair(1.71), 1.0);
  const double fraction = *lbt.k_1ap / lbt.total;
  const auto tm = theta_max_vs_longbaseline(TrinarySpade{}, 1.71);
  const auto cfg = cli::parse_config(R"({"units": "physical"})");
  const double s_mas = cfg.physical.sigma_mas();
  o.detail << "single-aperture fraction " << 100.0 * fraction << "%, trinary theta_max "
           << (tm.theta ? *tm.theta : -1.0) << " sigma, sigma = " << s_mas << " mas";
  o.require(std::abs(100.0 * fraction - 10.23) <= 0.01, "fraction outside 10.23% +- 0.01%");
  o.require(tm.theta && std::abs(*tm.theta - 0.195) <= 0.005, "theta_max outside 0.195 +- 0.005");
  o.require(std::abs(s_mas - 254.3) <= 0.5, "sigma outside 254.3 +- 0.5 mas");
}

void invariance(Verdict& o) {
  const auto pair = ApertureArray::pair(2.0);
  const int j_max = 6;
  const auto pr = test::pairwise_real(pair, j_max);
  const TwoPointScene tp{0.35, 1.0};
  const double base = compute_cfi(pair, UniversalCoaxial{pr.d, j_max}, tp).value;
  numerics::RngStream rng(0x5eed, 8);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto u = test::sector_rotation(pr.sector, rng);
    worst = std::max(worst, rel(compute_cfi(pair, UniversalCoaxial{u * pr.d, j_max}, tp).value, base));
  }
  double complex_spread = 0.0;
  for (int t = 0; t < 10; ++t) {
    const auto u = test::random_unitary(pr.sector.size(), rng);
    complex_spread = std::max(complex_spread, rel(compute_cfi(pair, UniversalCoaxial{u * pr.d, j_max}, tp).value, base));
  }
  o.detail << "100 real rotations: max relative change " << worst << "; complex unitaries (control): "
           << complex_spread;
  o.require(worst < 1e-9, "real rotation changed the CFI");
}

void quantum_ordering(Verdict& o) {
  const auto cfg = cli::parse_config("{}");
  std::vector<ApertureArray> arrays;
  for (double r : cfg.figures.panels) arrays.push_back(ApertureArray::pair(r));
  auto names = cli::multi_axial_receivers();
  for (const auto& n : cli::co_axial_receivers()) names.push_back(n);
  const auto rows = cli::cfi_sweep(arrays, names, cfg.figures.theta.values, cfg.j_max, 1.0, cfg.quadrature, 1);
  double worst = 0.0;
  for (const auto& row : rows) worst = std::max(worst, row.ratio);
  o.detail << rows.size() << " grid points, max CFI/QFI " << worst;
  o.require(worst <= 1.0 + 1e-6, "CFI above QFI");
}

void sld_checks(Verdict& o) {
  numerics::RngStream rng(0x51d, 10);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto array = ApertureArray::pair(1.0 + 2.0 * rng.uniform());
    const double b = 0.2 + 0.6 * rng.uniform();
    const auto scene = Scene::make({{2.0 * rng.uniform() - 1.0, b}, {2.0 * rng.uniform() - 1.0, 1.0 - b}}, 1.0);
    const double db = 2.0 * rng.uniform() - 1.0;
    const SceneTangent tangent{{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0}, {db, -db}, {0.0, 0.0}, {0.0, 0.0}};
    const auto rho = density_matrix(array, scene, 40);
    const auto drho = density_matrix_derivative(array, scene, tangent, 40);
    worst = std::max(worst, sld_residual(rho.matrix, drho, sld(rho.matrix, drho)));
  }

  // closed-form entries in the basis built from the displaced PSFs and their derivatives
  using Vec = std::vector<cplx>;
  auto inner = [](const Vec& a, const Vec& b) {
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
  };
  auto combo = [](cplx x, const Vec& a, cplx y, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = x * a[i] + y * b[i];
    return r;
  };
  auto sandwich = [&](const Vec& a, const ComplexMatrix& m, const Vec& b) {
    Vec mb(b.size());
    for (std::size_t i = 0; i < b.size(); ++i)
      for (std::size_t k = 0; k < b.size(); ++k) mb[i] += m(i, k) * b[k];
    return inner(a, mb).real();
  };
  const auto single = ApertureArray::single();
  double entry_err = 0.0;
  for (double theta : {0.1, 0.3, 0.6}) {
    const auto w = two_point_sld_workspace(single, theta);
    const auto p = local_amplitudes(single, 40, theta);
    const auto m = local_amplitudes(single, 40, -theta);
    const double dk = std::sqrt(w.delta_k2);
    const double del = w.delta_overlap;
    Vec p11(p.da.size()), p22(m.da.size());
    for (std::size_t i = 0; i < p11.size(); ++i) {
      p11[i] = -p.da[i] / dk;
      p22[i] = -m.da[i] / dk;
    }
    const Vec e1 = combo(1.0 / std::sqrt(2.0 * (1.0 - del)), p.a, -1.0 / std::sqrt(2.0 * (1.0 - del)), m.a);
    const Vec e2 = combo(1.0 / std::sqrt(2.0 * (1.0 + del)), p.a, 1.0 / std::sqrt(2.0 * (1.0 + del)), m.a);
    const Vec e3 = combo(1.0 / w.c3, combo(dk / std::sqrt(2.0), p11, dk / std::sqrt(2.0), p22),
                         -w.gamma / std::sqrt(1.0 - del) / w.c3, e1);
    const Vec e4 = combo(1.0 / w.c4, combo(dk / std::sqrt(2.0), p11, -dk / std::sqrt(2.0), p22),
                         w.gamma / std::sqrt(1.0 + del) / w.c4, e2);
    const auto tp = TwoPointScene{theta, 1.0};
    const auto rho = density_matrix(single, tp.scene(), 40);
    const auto l = sld(rho.matrix, density_matrix_derivative(single, tp.scene(), tp.tangent(), 40)).sld.matrix();
    entry_err = std::max({entry_err, std::abs(sandwich(e1, l, e1) - w.l11), std::abs(sandwich(e1, l, e3) - w.l13),
                          std::abs(sandwich(e2, l, e2) - w.l22), std::abs(sandwich(e2, l, e4) - w.l24)});
  }
  o.detail << "max residual over 20 random configurations " << worst << "; closed-form entry mismatch " << entry_err;
  o.require(worst < 1e-8, "residual above 1e-8");
  o.require(entry_err < 1e-8, "closed-form entries differ");
}

void crb_saturation(Verdict& o) {
  TrialConfig cfg;
  cfg.array = ApertureArray::pair(2.0);
  cfg.receiver = TrinarySpade{};
  cfg.theta_true = 0.1;
  cfg.n_photons = 100000;
  cfg.n_trials = 500;
  const auto rec = crb_report(cfg);
  const double ratio = rec.sample_variance / rec.crb;
  o.detail << "variance / (1/CFI) = " << ratio << " over " << rec.theta_hat.size() << " trials (" << rec.failures
           << " failed), efficiency 95% CI [" << rec.efficiency_lo << ", " << rec.efficiency_hi << "]";
  o.require(std::abs(ratio - 1.0) <= 0.15, "outside +-15%");
}

void two_stage_protocol(Verdict& o) {
  TrialConfig cfg;
  cfg.array = ApertureArray::pair(2.0);
  cfg.theta_true = 0.1;
  cfg.n_photons = 1000000;
  cfg.n_trials = 500;
  cfg.alpha = 0.5;
  const auto rec = two_stage(cfg);
  const double ratio = rec.sample_variance / rec.crb;
  o.detail << "variance / (1/QFI) = " << ratio << " over " << rec.theta_hat.size() << " trials (" << rec.failures
           << " failed)";
  o.require(std::abs(ratio - 1.0) <= 0.15, "outside +-15%");
}

void gamma_identity(Verdict& o) {
  const auto rule = numerics::gauss_legendre(64);
  double closed = 0.0;
  double quad = 0.0;
  for (double sigma : {1.0, 0.6}) {
    const double delta = 2.0 * pi / sigma;
    for (int j = 0; j <= 10; ++j) {
      for (int i = 0; i <= 100; ++i) {
        const double a = 2.0 * sigma * i / 100.0;
        const double g = gamma_j(j, a, sigma);
        closed = std::max(closed, std::abs(g - std::sqrt(sigma) * mode_x(j, a, sigma)));
        const auto panels = static_cast<std::size_t>(4 + a * delta / 2.0);
        const double re = numerics::integrate_gauss_legendre(
            [&](double k) { return (std::exp(cplx(0.0, -k * a)) * std::conj(mode_k(j, k, delta))).real(); },
            -0.5 * delta, 0.5 * delta, rule, panels);
        quad = std::max(quad, std::abs(re / std::sqrt(delta) - g));
      }
    }
  }
  o.detail << "closed form vs sqrt(sigma) phi_j: " << closed << "; quadrature vs closed form: " << quad;
  o.require(closed < 1e-8, "closed form mismatch");
  o.require(quad < 1e-8, "quadrature mismatch");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Verdict&)>>> criteria{
      {"analytic QFI anchors", analytic_qfi},
      {"numeric vs analytic QFI", numeric_qfi},
      {"pairwise SPADE optimality", pairwise_optimality},
      {"small-theta optimality limits", small_theta},
      {"Rayleigh's curse", rayleigh_curse},
      {"light-pipe flatness", lightpipe_flat},
      {"LBT case study", lbt_case},
      {"rotation invariance", invariance},
      {"quantum ordering", quantum_ordering},
      {"SLD residual and closed form", sld_checks},
      {"Monte Carlo CRB saturation", crb_saturation},
      {"two-stage protocol", two_stage_protocol},
      {"Gamma_j identity", gamma_identity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.str().c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
