#include <benchmark/benchmark.h>

#include <cmath>

#include "multiap/numerics.hpp"
#include "multiap/quantum.hpp"
#include "multiap/receivers.hpp"

namespace {

using namespace multiap;

numerics::HermitianMatrix random_hermitian(std::size_t d) {
  numerics::RngStream rng(42, d);
  numerics::ComplexMatrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const cplx v{rng.uniform() - 0.5, i == j ? 0.0 : rng.uniform() - 0.5};
      m(i, j) = v;
      m(j, i) = std::conj(v);
    }
  return numerics::HermitianMatrix(m);
}

void BM_EigHermitian(benchmark::State& state) {
  const auto h = random_hermitian(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(numerics::eig_hermitian(h));
}
BENCHMARK(BM_EigHermitian)->Arg(8)->Arg(42)->Arg(82);

void BM_QfiNumeric(benchmark::State& state) {
  const auto array = ApertureArray::pair(2.0);
  const auto param = Parametrization::two_point(1.0);
  const int j_max = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(qfi_numeric(array, param, 0.3, j_max));
}
BENCHMARK(BM_QfiNumeric)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_DirectImagingCfi(benchmark::State& state) {
  const auto array = ApertureArray::pair(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(direct_imaging_cfi(array, TwoPointScene{0.3, 1.0}));
}
BENCHMARK(BM_DirectImagingCfi)->Unit(benchmark::kMillisecond);

void BM_GroupwiseCfi(benchmark::State& state) {
  const auto array = ApertureArray::pair(2.0);
  const Groupwise spec{pairwise_coeffs(array), static_cast<int>(state.range(0)), true};
  for (auto _ : state) benchmark::DoNotOptimize(groupwise_cfi(array, TwoPointScene{0.3, 1.0}, spec));
}
BENCHMARK(BM_GroupwiseCfi)->Arg(0)->Arg(40);

void BM_SphBesselSequence(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  double u = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(numerics::sph_bessel_sequence(n, u));
    u = std::fmod(u + 0.37, 20.0);
  }
}
BENCHMARK(BM_SphBesselSequence)->Arg(10)->Arg(41)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
