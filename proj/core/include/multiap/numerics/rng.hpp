#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace multiap::numerics {

/// Reproducible random stream: the pair (seed, stream_id) fixes every draw.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  double uniform();  // [0, 1)
  double uniform_open();  // (0, 1)
  std::uint64_t binomial(std::uint64_t trials, double p);
  std::vector<std::uint64_t> multinomial(std::uint64_t trials, const std::vector<double>& probs);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace multiap::numerics
