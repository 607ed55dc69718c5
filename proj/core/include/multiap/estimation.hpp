#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "multiap/apertures.hpp"
#include "multiap/numerics/rng.hpp"
#include "multiap/receivers.hpp"

namespace multiap {

using numerics::RngStream;

/// Photon records from one receiver: counts per outcome for sorting
/// receivers, detected positions for direct imaging.
struct Observations {
  std::vector<std::uint64_t> counts;
  std::vector<double> positions;
};

/// Multinomial draw of N photons over every outcome (negative round-off
/// probabilities are clamped to zero).
std::vector<std::uint64_t> sample_outcomes(const OutcomeDistribution& dist, std::uint64_t n,
                                           RngStream& rng);

/// Rejection sampling of direct-imaging positions against the envelope
/// n sum_s b_s min(1/sigma, sigma/(pi^2 y^2)). With a half-width L the draws
/// are confined to [-L sigma, L sigma]; by default the whole line is used.
std::vector<double> sample_direct_imaging(const ApertureArray& array, const Scene& scene, std::uint64_t n,
                                          RngStream& rng, std::optional<double> halfwidth = std::nullopt);

Observations sample_observations(const ApertureArray& array, const ReceiverSpec& receiver, double theta,
                                 std::uint64_t n, RngStream& rng);

/// log L(theta) = sum_i n_i log P_i(theta) over counted outcomes, or
/// sum_k log P(x_k; theta) for direct imaging.
double log_likelihood(const ApertureArray& array, const ReceiverSpec& receiver, const Observations& obs,
                      double theta);

struct Bracket {
  double lo = 1e-4;  // sigma units
  double hi = 1.5;
};

/// Maximizes f on [lo, hi]: golden section from `starts` equal sub-intervals,
/// then a local parabolic step. Throws EstimationError if f is flat.
double maximize_likelihood(const std::function<double(double)>& f, double lo, double hi, double tol,
                           int starts = 5);

/// Throws EstimationError when every counted photon sits in one outcome or
/// the likelihood does not depend on theta.
double mle_theta(const Observations& obs, const ReceiverSpec& receiver, const ApertureArray& array,
                 const Bracket& bracket = {});

struct TrialConfig {
  ApertureArray array = ApertureArray::pair(2.0);
  ReceiverSpec receiver = TrinarySpade{};
  double theta_true = 0.1;  // sigma units
  std::uint64_t n_photons = 100000;
  std::size_t n_trials = 500;
  std::uint64_t seed = 1;
  double alpha = 0.5;
  Bracket bracket{};
  unsigned jobs = 1;
  /// Stage-two receiver as a function of the stage-one estimate.
  std::function<ReceiverSpec(double)> stage_two = {};

  void validate() const;
};

struct EstimateRecord {
  std::vector<double> theta_hat;
  std::vector<double> stage_one;  // two-stage runs only
  std::size_t failures = 0;
  double sample_mean = 0.0;
  double sample_variance = 0.0;
  double fisher = 0.0;  // CFI (crb_report) or QFI (two_stage), for N photons
  double crb = 0.0;
  double efficiency = 0.0;
  double efficiency_lo = 0.0;  // 95% bootstrap interval
  double efficiency_hi = 0.0;
};

/// Default stage two: pairwise SPADE over j <= 40 with a bucket.
ReceiverSpec default_stage_two(const ApertureArray& array);

/// Runs n_trials independent two-stage estimates. Stage one spends
/// floor(N^alpha) photons on direct imaging; the rest go to the stage-two
/// receiver; theta is the joint MLE of both records.
EstimateRecord two_stage(const TrialConfig& config);

/// Empirical MLE variance against 1/CFI of the configured receiver.
/// Requires n_trials >= 100.
EstimateRecord crb_report(const TrialConfig& config);

/// Fills mean, variance, efficiency and its bootstrap interval.
void summarize(EstimateRecord& rec, std::uint64_t seed);

}  // namespace multiap
