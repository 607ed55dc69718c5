#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace multiap::numerics {

/// Integration over a truncated infinite line [-L*scale, L*scale].
///
/// Integrands built from sinc-type PSFs decay like 1/x^2. When the caller
/// states a constant C with |f(x)| <= C*scale/(pi^2 x^2) beyond the cut, the
/// discarded tails are bounded by 2C/(pi^2 L), which is reported as
/// `tail_bound` next to the quadrature error.
struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double domain_halfwidth = 50.0;   // L, in units of `scale`
  double scale = 1.0;               // sigma
  std::size_t max_subdivisions = 200000;
  std::size_t initial_panels = 0;   // 0: four panels per unit of scale
  double tail_coefficient = 0.0;    // C above; 0 for compactly decaying f

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  double tail_bound = 0.0;
  std::size_t subdivisions = 0;
};

using RealFunction = std::function<double(double)>;

/// Globally adaptive 15-point Gauss-Kronrod on [a, b], starting from `panels`
/// equal subintervals. Throws QuadratureError (with the best estimate) when
/// `max_subdivisions` is exhausted before max(abs_tol, rel_tol*|I|) is met.
QuadratureResult integrate_interval(const RealFunction& f, double a, double b,
                                    double rel_tol, double abs_tol,
                                    std::size_t max_subdivisions,
                                    std::size_t panels = 1);

/// Integral of f over [-L*scale, L*scale] with the tail bound attached.
QuadratureResult integrate(const RealFunction& f, const QuadratureSpec& spec);

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendreRule gauss_legendre(std::size_t n);

/// Fixed-order Gauss-Legendre on [a, b] split into `panels` pieces.
double integrate_gauss_legendre(const RealFunction& f, double a, double b,
                                const GaussLegendreRule& rule,
                                std::size_t panels = 1);

/// Richardson-extrapolated central difference. Level 0 is the plain O(h^2)
/// stencil; each level halves h and removes the next even power.
double central_diff(const RealFunction& f, double x, double h = 1e-5,
                    int richardson_levels = 1);

}  // namespace multiap::numerics
