#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "multiap/numerics/linalg.hpp"
#include "multiap/numerics/rng.hpp"
#include "multiap/modes.hpp"
#include "multiap/receivers.hpp"

namespace multiap::test {

// Columns orthonormalized by modified Gram-Schmidt from a random draw.
inline numerics::ComplexMatrix orthonormalize(numerics::ComplexMatrix m) {
  const std::size_t n = m.rows();
  for (std::size_t c = 0; c < m.cols(); ++c) {
    for (std::size_t p = 0; p < c; ++p) {
      std::complex<double> d{};
      for (std::size_t i = 0; i < n; ++i) d += std::conj(m(i, p)) * m(i, c);
      for (std::size_t i = 0; i < n; ++i) m(i, c) -= d * m(i, p);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += std::norm(m(i, c));
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) m(i, c) /= norm;
  }
  return m;
}

inline double gaussian(numerics::RngStream& rng) {
  return std::normal_distribution<double>{}(rng.engine());
}

inline numerics::ComplexMatrix random_unitary(std::size_t n, numerics::RngStream& rng) {
  numerics::ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = {gaussian(rng), gaussian(rng)};
  return orthonormalize(m);
}

inline numerics::ComplexMatrix random_orthogonal(std::size_t n, numerics::RngStream& rng) {
  numerics::ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = gaussian(rng);
  return orthonormalize(m);
}

// Pairwise outputs with the antisymmetric ports multiplied by -i, so both
// sources have real amplitudes; sector(k) is the parity shared by the two
// sources' amplitudes in output k.
struct PairwiseReal {
  numerics::ComplexMatrix d;
  std::vector<int> sector;
};

inline PairwiseReal pairwise_real(const ApertureArray& pair, int j_max) {
  const std::size_t dim = static_cast<std::size_t>(j_max + 1) * 2;
  const auto c = pairwise_coeffs(pair);
  PairwiseReal out{numerics::ComplexMatrix(dim, dim), std::vector<int>(dim)};
  for (int j = 0; j <= j_max; ++j)
    for (std::size_t g = 0; g < 2; ++g) {
      const std::size_t row = label_index(j, g, 2);
      const cplx phase = g == 0 ? cplx(1.0) : cplx(0.0, -1.0);
      for (std::size_t mu = 0; mu < 2; ++mu) out.d(row, label_index(j, mu, 2)) = phase * c(g, mu);
      out.sector[row] = ((j % 2) ^ static_cast<int>(g)) == 0 ? 0 : 1;
    }
  return out;
}

// Random real orthogonal map acting within each sector.
inline numerics::ComplexMatrix sector_rotation(const std::vector<int>& sector, numerics::RngStream& rng) {
  const std::size_t dim = sector.size();
  numerics::ComplexMatrix u(dim, dim);
  for (int s = 0; s < 2; ++s) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < dim; ++k)
      if (sector[k] == s) idx.push_back(k);
    const auto block = random_orthogonal(idx.size(), rng);
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) u(idx[a], idx[b]) = block(a, b);
  }
  return u;
}

}  // namespace multiap::test
