#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "multiap/apertures.hpp"
#include "multiap/numerics/linalg.hpp"

namespace multiap {

using numerics::ComplexMatrix;
using numerics::EigenDecomposition;
using numerics::HermitianMatrix;

struct ModeLabel {
  int j;
  std::size_t mu;
};

struct TruncationPolicy {
  double max_deficit = 1e-4;
  bool allow_bias = false;  // record the deficit instead of throwing
};

/// Single-photon state over local-mode labels (j, mu), j-major.
struct DensityMatrix {
  std::vector<ModeLabel> labels;
  HermitianMatrix matrix;
  double trace_deficit;
};

DensityMatrix density_matrix(const ApertureArray& array, const Scene& scene, int j_max,
                             const TruncationPolicy& policy = {});

HermitianMatrix density_matrix_derivative(const ApertureArray& array, const Scene& scene,
                                          const SceneTangent& tangent, int j_max);

/// How a scene depends on a scalar parameter theta.
struct Parametrization {
  enum class Kind { TwoPoint, BrightnessOnly, Constant, Custom };
  Kind kind = Kind::Custom;
  std::function<Scene(double)> scene_at;
  std::function<SceneTangent(double)> tangent_at;

  /// Sources at +-theta, equal brightness.
  static Parametrization two_point(double n_photons);
  /// Sources fixed at +-half_separation with brightnesses (1 +- theta)/2,
  /// theta in (-1, 1).
  static Parametrization brightness_only(double half_separation, double n_photons);
  static Parametrization constant(const Scene& scene);
};

struct SldResult {
  HermitianMatrix sld;
  EigenDecomposition eig;
  std::size_t skipped_pairs;
  double tau;
};

/// Symmetric logarithmic derivative from the eigendecomposition of rho;
/// pairs with D_j + D_k <= tau_rel * max(D) are dropped and counted.
SldResult sld(const HermitianMatrix& rho, const HermitianMatrix& drho, double tau_rel = 1e-12);

/// || drho - (rho L + L rho)/2 || restricted to eigenpairs kept by `sld`.
double sld_residual(const HermitianMatrix& rho, const HermitianMatrix& drho, const SldResult& s);

struct QfiResult {
  double total = 0.0;
  std::optional<double> k_1ap;
  std::optional<double> k_lb;
  double n_photons = 0.0;
  double trace_deficit = 0.0;
  std::size_t skipped_pairs = 0;
  double sld_residual = 0.0;
};

QfiResult qfi_numeric(const ApertureArray& array, const Parametrization& param, double theta,
                      int j_max, const TruncationPolicy& policy = {});

/// K_1ap = 4 pi^2 N/(3 sigma^2), K_lb = (4N/n) sum alpha^2. Symmetric arrays only.
QfiResult qfi_two_point_analytic(const ApertureArray& array, double n_photons);

/// Inner products and SLD entries in the four-dimensional basis spanned by
/// the two displaced PSFs and their derivatives, from aperture-plane
/// quadrature. At theta = 0 the basis degenerates: `degenerate` is set,
/// L11 and L13 are left NaN, and the QFI is still 4 N Delta_k^2.
struct TwoPointSldWorkspace {
  double theta = 0.0;
  double delta_overlap = 0.0;
  double delta_k2 = 0.0;
  double gamma = 0.0;
  double b2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
  double l11 = 0.0;
  double l13 = 0.0;
  double l22 = 0.0;
  double l24 = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double qfi = 0.0;
  bool degenerate = false;
};

TwoPointSldWorkspace two_point_sld_workspace(const ApertureArray& array, double theta,
                                             double n_photons = 1.0);

}  // namespace multiap
