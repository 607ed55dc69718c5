#include "multiap/numerics/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>

#include "multiap/errors.hpp"

namespace multiap::numerics {
namespace {

// Kronrod abscissae (positive half, descending) and weights; every other
// abscissa is a 7-point Gauss node.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gauss_kronrod(const RealFunction& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kXgk[i];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    kronrod += kWgk[i] * (f1 + f2);
    if (i % 2 == 1) gauss += kWg[i / 2] * (f1 + f2);
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0.0)) throw ValidationError("quadrature rel_tol must be > 0");
  if (!(abs_tol >= 0.0)) throw ValidationError("quadrature abs_tol must be >= 0");
  if (!(domain_halfwidth > 0.0)) throw ValidationError("quadrature domain half-width L must be > 0");
  if (!(scale > 0.0)) throw ValidationError("quadrature scale must be > 0");
  if (max_subdivisions == 0) throw ValidationError("quadrature max_subdivisions must be >= 1");
  if (tail_coefficient < 0.0) throw ValidationError("quadrature tail coefficient must be >= 0");
}

QuadratureResult integrate_interval(const RealFunction& f, double a, double b,
                                    double rel_tol, double abs_tol,
                                    std::size_t max_subdivisions,
                                    std::size_t panels) {
  panels = std::max<std::size_t>(panels, 1);
  std::priority_queue<Segment> queue;
  double total = 0.0;
  double total_error = 0.0;
  const double width = (b - a) / static_cast<double>(panels);
  for (std::size_t i = 0; i < panels; ++i) {
    const double lo = a + width * static_cast<double>(i);
    const double hi = (i + 1 == panels) ? b : lo + width;
    Segment s = gauss_kronrod(f, lo, hi);
    total += s.value;
    total_error += s.error;
    queue.push(s);
  }

  std::size_t subdivisions = panels;
  auto tolerance = [&] { return std::max(abs_tol, rel_tol * std::abs(total)); };
  while (total_error > tolerance()) {
    if (subdivisions >= max_subdivisions) {
      std::ostringstream msg;
      msg << "adaptive quadrature did not converge after " << subdivisions
          << " subdivisions (estimate " << total << ", error " << total_error << ")";
      throw QuadratureError(msg.str(), total, total_error);
    }
    Segment worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = gauss_kronrod(f, worst.a, mid);
    Segment right = gauss_kronrod(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++subdivisions;
    // Recompute the running sums now and then to stop drift from the
    // incremental updates.
    if (subdivisions % 4096 == 0) {
      auto copy = queue;
      total = 0.0;
      total_error = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        total_error += copy.top().error;
        copy.pop();
      }
    }
  }
  return {total, total_error, 0.0, subdivisions};
}

QuadratureResult integrate(const RealFunction& f, const QuadratureSpec& spec) {
  spec.validate();
  const double half = spec.domain_halfwidth * spec.scale;
  const std::size_t panels =
      spec.initial_panels > 0
          ? spec.initial_panels
          : static_cast<std::size_t>(std::ceil(8.0 * spec.domain_halfwidth));
  QuadratureResult result = integrate_interval(f, -half, half, spec.rel_tol, spec.abs_tol,
                                               spec.max_subdivisions, panels);
  result.tail_bound = 2.0 * spec.tail_coefficient /
                      (std::numbers::pi * std::numbers::pi * spec.domain_halfwidth);
  return result;
}

GaussLegendreRule gauss_legendre(std::size_t n) {
  if (n == 0) throw ValidationError("Gauss-Legendre rule needs at least one node");
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t m = (n + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * z * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = z;
        p0 = 1.0;
      }
      dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 2.0;
  }
  return rule;
}

double integrate_gauss_legendre(const RealFunction& f, double a, double b,
                                const GaussLegendreRule& rule, std::size_t panels) {
  panels = std::max<std::size_t>(panels, 1);
  const double width = (b - a) / static_cast<double>(panels);
  double sum = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + width * static_cast<double>(p);
    const double center = lo + 0.5 * width;
    double part = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      part += rule.weights[i] * f(center + 0.5 * width * rule.nodes[i]);
    }
    sum += 0.5 * width * part;
  }
  return sum;
}

double central_diff(const RealFunction& f, double x, double h, int richardson_levels) {
  if (!(h > 0.0)) throw ValidationError("central_diff step h must be > 0");
  if (richardson_levels < 0) throw ValidationError("richardson_levels must be >= 0");
  const int levels = richardson_levels + 1;
  std::vector<double> table(static_cast<std::size_t>(levels));
  double step = h;
  for (int i = 0; i < levels; ++i) {
    table[static_cast<std::size_t>(i)] = (f(x + step) - f(x - step)) / (2.0 * step);
    step *= 0.5;
  }
  // Neville-style elimination of h^2, h^4, ... error terms.
  double factor = 4.0;
  for (int k = 1; k < levels; ++k) {
    for (int i = levels - 1; i >= k; --i) {
      auto& cur = table[static_cast<std::size_t>(i)];
      const auto prev = table[static_cast<std::size_t>(i - 1)];
      cur = (factor * cur - prev) / (factor - 1.0);
    }
    factor *= 4.0;
  }
  return table.back();
}

}  // namespace multiap::numerics
