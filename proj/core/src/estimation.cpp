#include "multiap/estimation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>
#include <type_traits>

#include "multiap/errors.hpp"
#include "multiap/quantum.hpp"

namespace multiap {

using std::numbers::pi;

namespace {

constexpr std::uint64_t kBootstrapStream = 0xB0075712A9ull;

double intensity_value(const ApertureArray& array, double x) {
  const auto& pos = array.positions();
  double amp = static_cast<double>(pos.size());
  for (std::size_t mu = 0; mu < pos.size(); ++mu)
    for (std::size_t nu = 0; nu < mu; ++nu) amp += 2.0 * std::cos((pos[mu] - pos[nu]) * x);
  const double p = psf_single(x, array.sigma());
  return p * p * amp / static_cast<double>(pos.size());
}

double direct_density(const ApertureArray& array, double x, double theta) {
  return 0.5 * (intensity_value(array, x - theta) + intensity_value(array, x + theta));
}

// Runs body(i) for i in [0, count) on `jobs` threads.
template <class Body>
void parallel_for(std::size_t count, unsigned jobs, Body&& body) {
  jobs = std::max(1u, jobs);
  if (jobs == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(jobs, count); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<std::uint64_t> sample_outcomes(const OutcomeDistribution& dist, std::uint64_t n, RngStream& rng) {
  if (dist.continuous) throw ValidationError("continuous distributions are sampled with sample_direct_imaging");
  std::vector<double> p;
  p.reserve(dist.outcomes.size());
  for (const auto& o : dist.outcomes) p.push_back(std::max(0.0, o.p));
  return rng.multinomial(n, p);
}

std::vector<double> sample_direct_imaging(const ApertureArray& array, const Scene& scene, std::uint64_t n,
                                          RngStream& rng, std::optional<double> halfwidth) {
  const double sigma = array.sigma();
  const double nn = static_cast<double>(array.n());
  const double knee = sigma / pi;
  auto h = [&](double y) { return std::min(1.0 / sigma, sigma / (pi * pi * y * y)); };
  double inflate = 1.0;
  const auto& src = scene.sources();
  std::vector<double> cum;
  double acc = 0.0;
  for (const auto& s : src) cum.push_back(acc += s.brightness);

  std::vector<double> out;
  out.reserve(n);
  while (out.size() < n) {
    // Pick a source, then a displacement from min(1/sigma, sigma/(pi^2 y^2)):
    // half the mass is flat on |y| < sigma/pi, half in the 1/y^2 tails.
    const double us = rng.uniform() * acc;
    const std::size_t k = static_cast<std::size_t>(std::lower_bound(cum.begin(), cum.end(), us) - cum.begin());
    const double centre = src[std::min(k, src.size() - 1)].position;
    double y;
    if (rng.uniform() < 0.5) {
      y = knee * (2.0 * rng.uniform() - 1.0);
    } else {
      y = knee / rng.uniform_open();
      if (rng.uniform() < 0.5) y = -y;
    }
    const double x = centre + y;
    if (halfwidth && std::abs(x) > *halfwidth * sigma) continue;
    double envelope = 0.0;
    double p = 0.0;
    for (const auto& s : src) {
      envelope += s.brightness * h(x - s.position);
      p += s.brightness * intensity_compound(array, x - s.position).value;
    }
    envelope *= nn * inflate;
    if (p > envelope * (1.0 + 1e-12)) {
      inflate *= 2.0;
      std::clog << "multiap: direct-imaging envelope violated at x = " << x << "; inflating to " << inflate
                << " and resampling\n";
      out.clear();
      continue;
    }
    if (rng.uniform() * envelope <= p) out.push_back(x);
  }
  return out;
}

Observations sample_observations(const ApertureArray& array, const ReceiverSpec& receiver, double theta,
                                 std::uint64_t n, RngStream& rng) {
  const TwoPointScene tp{theta, static_cast<double>(n)};
  Observations obs;
  if (std::holds_alternative<DirectImaging>(receiver)) {
    obs.positions = sample_direct_imaging(array, tp.scene(), n, rng);
  } else {
    obs.counts = sample_outcomes(outcome_distribution(array, receiver, tp), n, rng);
  }
  return obs;
}

double log_likelihood(const ApertureArray& array, const ReceiverSpec& receiver, const Observations& obs,
                      double theta) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (std::holds_alternative<DirectImaging>(receiver)) {
    double ll = 0.0;
    for (double x : obs.positions) {
      const double p = direct_density(array, x, theta);
      if (!(p > 0.0)) return kNegInf;
      ll += std::log(p);
    }
    return ll;
  }
  const auto dist = outcome_distribution(array, receiver, TwoPointScene{theta, 1.0});
  if (obs.counts.size() != dist.outcomes.size()) throw ValidationError("counts do not match receiver outcomes");
  double ll = 0.0;
  for (std::size_t i = 0; i < obs.counts.size(); ++i) {
    if (obs.counts[i] == 0 || !dist.outcomes[i].counted) continue;
    const double p = dist.outcomes[i].p;
    if (!(p > 0.0)) return kNegInf;
    ll += static_cast<double>(obs.counts[i]) * std::log(p);
  }
  return ll;
}

double maximize_likelihood(const std::function<double(double)>& f, double lo, double hi, double tol,
                           int starts) {
  if (!(hi > lo)) throw ValidationError("likelihood bracket must satisfy lo < hi");
  starts = std::max(1, starts);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;

  double fmin = std::numeric_limits<double>::infinity();
  double fmax = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 4 * starts; ++i) {
    const double v = f(lo + (hi - lo) * i / (4.0 * starts));
    if (std::isfinite(v)) {
      fmin = std::min(fmin, v);
      fmax = std::max(fmax, v);
    }
  }
  if (!std::isfinite(fmax) || fmax - fmin <= 1e-12 * std::max(1.0, std::abs(fmax))) {
    throw EstimationError("likelihood is flat in theta; the estimate is undefined");
  }

  double best_x = lo;
  double best_f = -std::numeric_limits<double>::infinity();
  const double width = (hi - lo) / starts;
  for (int s = 0; s < starts; ++s) {
    double a = lo + width * s;
    double b = a + width;
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = f(d);
      }
    }
    const double x = 0.5 * (a + b);
    const double fx = f(x);
    if (fx > best_f) {
      best_f = fx;
      best_x = x;
    }
  }

  // One parabolic step through neighbouring points.
  const double h = std::max(tol, 1e-6 * (hi - lo));
  if (best_x - h > lo && best_x + h < hi) {
    const double f0 = f(best_x - h);
    const double f2 = f(best_x + h);
    const double denom = f0 - 2.0 * best_f + f2;
    if (denom < 0.0) {
      const double x = best_x + 0.5 * h * (f0 - f2) / denom;
      if (std::abs(x - best_x) < h) {
        const double fx = f(x);
        if (fx > best_f) best_x = x;
      }
    }
  }
  return best_x;
}

double mle_theta(const Observations& obs, const ReceiverSpec& receiver, const ApertureArray& array,
                 const Bracket& bracket) {
  if (!(bracket.lo > 0.0) || !(bracket.hi > bracket.lo)) throw ValidationError("bracket must satisfy 0 < lo < hi");
  if (std::holds_alternative<DirectImaging>(receiver)) {
    if (obs.positions.empty()) throw EstimationError("no detected photons");
  } else {
    const auto dist = outcome_distribution(array, receiver, TwoPointScene{bracket.lo, 1.0});
    std::size_t occupied = 0;
    for (std::size_t i = 0; i < obs.counts.size() && i < dist.outcomes.size(); ++i) {
      if (dist.outcomes[i].counted && obs.counts[i] > 0) ++occupied;
    }
    if (occupied < 2) throw EstimationError("all counted photons fall in a single outcome; the estimate is undefined");
  }
  const double s = array.sigma();
  return maximize_likelihood([&](double t) { return log_likelihood(array, receiver, obs, t); }, bracket.lo * s,
                             bracket.hi * s, 1e-7 * s);
}

void TrialConfig::validate() const {
  if (!(theta_true >= 0.0)) throw ValidationError("theta_true must be >= 0");
  if (n_photons < 1) throw ValidationError("photon number N must be >= 1");
  if (n_trials < 1) throw ValidationError("n_trials must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("two-stage exponent alpha must lie in (0, 1)");
  if (!(bracket.lo > 0.0) || !(bracket.hi > bracket.lo)) throw ValidationError("bracket must satisfy 0 < lo < hi");
}

ReceiverSpec default_stage_two(const ApertureArray& array) {
  return Groupwise{pairwise_coeffs(array), kDefaultJMax, true};
}

void summarize(EstimateRecord& rec, std::uint64_t seed) {
  const auto& v = rec.theta_hat;
  const std::size_t m = v.size();
  if (m < 2) return;
  auto moments = [](const std::vector<double>& xs, double& mean, double& var) {
    mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size() - 1);
  };
  moments(v, rec.sample_mean, rec.sample_variance);
  rec.efficiency = rec.sample_variance > 0.0 ? rec.crb / rec.sample_variance : 0.0;

  RngStream rng(seed, kBootstrapStream);
  const int resamples = 1000;
  std::vector<double> eff;
  eff.reserve(resamples);
  std::vector<double> draw(m);
  for (int b = 0; b < resamples; ++b) {
    for (std::size_t i = 0; i < m; ++i) {
      draw[i] = v[std::min(m - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(m)))];
    }
    double mean = 0.0;
    double var = 0.0;
    moments(draw, mean, var);
    if (var > 0.0) eff.push_back(rec.crb / var);
  }
  if (eff.empty()) return;
  std::sort(eff.begin(), eff.end());
  rec.efficiency_lo = eff[static_cast<std::size_t>(0.025 * static_cast<double>(eff.size() - 1))];
  rec.efficiency_hi = eff[static_cast<std::size_t>(0.975 * static_cast<double>(eff.size() - 1))];
}

EstimateRecord two_stage(const TrialConfig& config) {
  config.validate();
  const std::uint64_t n1 = static_cast<std::uint64_t>(
      std::floor(std::pow(static_cast<double>(config.n_photons), config.alpha)));
  if (n1 < 1) throw ValidationError("stage one receives no photons; increase N or alpha");
  if (n1 >= config.n_photons) throw ValidationError("stage two receives no photons; decrease alpha");
  const std::uint64_t n2 = config.n_photons - n1;
  const ApertureArray& array = config.array;
  const DirectImaging stage_one{};
  const double s = array.sigma();

  std::vector<double> hat(config.n_trials, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> hat1(config.n_trials, std::numeric_limits<double>::quiet_NaN());
  std::atomic<std::size_t> failures{0};

  parallel_for(config.n_trials, config.jobs, [&](std::size_t trial) {
    RngStream rng(config.seed, trial);
    try {
      const Observations first = sample_observations(array, stage_one, config.theta_true * s, n1, rng);
      const double theta1 = mle_theta(first, stage_one, array, config.bracket);
      const ReceiverSpec second_rx = config.stage_two ? config.stage_two(theta1) : default_stage_two(array);
      const Observations second = sample_observations(array, second_rx, config.theta_true * s, n2, rng);
      auto joint = [&](double t) {
        return log_likelihood(array, stage_one, first, t) + log_likelihood(array, second_rx, second, t);
      };
      hat[trial] = maximize_likelihood(joint, config.bracket.lo * s, config.bracket.hi * s, 1e-7 * s);
      hat1[trial] = theta1;
    } catch (const EstimationError&) {
      ++failures;
    }
  });

  EstimateRecord rec;
  for (std::size_t i = 0; i < config.n_trials; ++i) {
    if (std::isnan(hat[i])) continue;
    rec.theta_hat.push_back(hat[i]);
    rec.stage_one.push_back(hat1[i]);
  }
  rec.failures = failures;
  rec.fisher = qfi_two_point_analytic(array, static_cast<double>(config.n_photons)).total;
  rec.crb = 1.0 / rec.fisher;
  summarize(rec, config.seed);
  return rec;
}

EstimateRecord crb_report(const TrialConfig& config) {
  config.validate();
  if (config.n_trials < 100) throw ValidationError("crb_report needs at least 100 trials");
  const ApertureArray& array = config.array;
  const double s = array.sigma();
  std::vector<double> hat(config.n_trials, std::numeric_limits<double>::quiet_NaN());
  std::atomic<std::size_t> failures{0};

  parallel_for(config.n_trials, config.jobs, [&](std::size_t trial) {
    RngStream rng(config.seed, trial);
    try {
      const Observations obs = sample_observations(array, config.receiver, config.theta_true * s, config.n_photons, rng);
      hat[trial] = mle_theta(obs, config.receiver, array, config.bracket);
    } catch (const EstimationError&) {
      ++failures;
    }
  });

  EstimateRecord rec;
  for (double h : hat)
    if (!std::isnan(h)) rec.theta_hat.push_back(h);
  rec.failures = failures;
  rec.fisher = compute_cfi(array, config.receiver,
                           TwoPointScene{config.theta_true * s, static_cast<double>(config.n_photons)})
                   .value;
  rec.crb = rec.fisher > 0.0 ? 1.0 / rec.fisher : std::numeric_limits<double>::infinity();
  summarize(rec, config.seed);
  return rec;
}

}  // namespace multiap
