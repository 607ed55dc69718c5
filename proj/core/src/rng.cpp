#include "multiap/numerics/rng.hpp"

#include <algorithm>
#include <cmath>

#include "multiap/errors.hpp"

namespace multiap::numerics {
namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32), 0x6d756c74u};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RngStream::uniform() { return std::generate_canonical<double, 53>(engine_); }

double RngStream::uniform_open() {
  double u = 0.0;
  do {
    u = uniform();
  } while (u <= 0.0);
  return u;
}

std::uint64_t RngStream::binomial(std::uint64_t trials, double p) {
  if (trials == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  std::binomial_distribution<std::uint64_t> dist(trials, p);
  return dist(engine_);
}

std::vector<std::uint64_t> RngStream::multinomial(std::uint64_t trials,
                                                  const std::vector<double>& probs) {
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("multinomial probabilities must be finite and >= 0");
    total += p;
  }
  if (!(total > 0.0)) throw ValidationError("multinomial probabilities sum to zero");
  std::vector<std::uint64_t> counts(probs.size(), 0);
  std::size_t last = probs.size() - 1;
  while (probs[last] <= 0.0) --last;
  std::uint64_t remaining = trials;
  double mass_left = total;
  for (std::size_t i = 0; i <= last && remaining > 0; ++i) {
    if (i == last) {
      counts[i] = remaining;
      break;
    }
    const double p = std::clamp(probs[i] / mass_left, 0.0, 1.0);
    counts[i] = binomial(remaining, p);
    remaining -= counts[i];
    mass_left -= probs[i];
  }
  return counts;
}

}  // namespace multiap::numerics
