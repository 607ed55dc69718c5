#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "multiap/apertures.hpp"
#include "multiap/modes.hpp"
#include "multiap/numerics/linalg.hpp"
#include "multiap/numerics/quadrature.hpp"

namespace multiap {

using numerics::ComplexMatrix;

// Receiver specifications ----------------------------------------------------

/// Image-plane intensity detection on the common focal plane.
struct DirectImaging {
  numerics::QuadratureSpec quad{};
};

enum class SpadeBasis { LocalModes, GramSchmidt };

/// Sort into j_max+1 modes per basis element plus a bucket for the rest.
struct FullSpade {
  SpadeBasis basis = SpadeBasis::LocalModes;
  int j_max = kDefaultJMax;
};

/// {zeroth Gram-Schmidt mode, complement}
struct BinSpade0 {};
/// {first Gram-Schmidt mode, complement}
struct BinSpade1 {};
/// Pairwise zero-mode combinations plus complement; two apertures only.
struct TrinarySpade {};
/// Image inversion: even and odd parts of the field.
struct Sliver {};

/// Local modes j <= j_max from every aperture, mixed across apertures by the
/// unitary coeffs (rows: output ports gamma, cols: apertures mu).
struct Groupwise {
  ComplexMatrix coeffs;
  int j_max = 0;
  bool with_bucket = true;
};

/// Arbitrary unitary d over all labels (j, mu), j <= j_max.
struct UniversalCoaxial {
  ComplexMatrix d;
  int j_max = 0;
};

/// Multimode light pipes into a beam-splitter network: no mode sorting.
struct LightPipe {
  ComplexMatrix coeffs;
};

/// Light pipes with one arm of every mirror pair reflected.
struct LightPipeReflected {};

using ReceiverSpec = std::variant<DirectImaging, FullSpade, BinSpade0, BinSpade1, TrinarySpade, Sliver,
                                  Groupwise, UniversalCoaxial, LightPipe, LightPipeReflected>;

std::string receiver_name(const ReceiverSpec& spec);

/// 50-50 combinations of mirror-image apertures; a centre aperture passes
/// through unmixed. Requires a symmetric array.
ComplexMatrix pairwise_coeffs(const ApertureArray& array);

/// Throws ValidationError when ||c^dagger c - I|| exceeds tol.
void require_unitary(const ComplexMatrix& c, const char* what, double tol = 1e-10);

// Outcome distributions -------------------------------------------------------

struct Outcome {
  std::string label;
  double p = 0.0;
  double dp = 0.0;
  std::optional<double> d2p;
  bool counted = true;  // false: photons not registered by the receiver
};

struct OutcomeDistribution {
  std::vector<Outcome> outcomes;
  bool continuous = false;
  std::function<double(double)> density;        // P(x)
  std::function<double(double)> density_deriv;  // dP(x)/dtheta
  numerics::QuadratureSpec quad{};
  double tail_coefficient = 0.0;

  double total_probability() const;
  double total_derivative() const;
};

OutcomeDistribution direct_imaging_dist(const ApertureArray& array, const Scene& scene,
                                        const SceneTangent& tangent, const DirectImaging& spec = {});
OutcomeDistribution local_spade_dist(const ApertureArray& array, const Scene& scene,
                                     const SceneTangent& tangent, int j_max);
OutcomeDistribution gram_schmidt_spade_dist(const ApertureArray& array, const Scene& scene,
                                            const SceneTangent& tangent, int order);
OutcomeDistribution groupwise_dist(const ApertureArray& array, const Scene& scene,
                                   const SceneTangent& tangent, const Groupwise& spec);
OutcomeDistribution universal_coaxial_dist(const ApertureArray& array, const Scene& scene,
                                           const SceneTangent& tangent, const UniversalCoaxial& spec);
OutcomeDistribution lightpipe_dist(const ApertureArray& array, const Scene& scene,
                                   const SceneTangent& tangent, const LightPipe& spec);
OutcomeDistribution lightpipe_reflected_dist(const ApertureArray& array, const Scene& scene,
                                             const SceneTangent& tangent);
OutcomeDistribution sliver_dist(const ApertureArray& array, const TwoPointScene& tp);
OutcomeDistribution binspade_dist(const ApertureArray& array, const TwoPointScene& tp, int which);

/// Distribution of any receiver for the two-point problem.
OutcomeDistribution outcome_distribution(const ApertureArray& array, const ReceiverSpec& spec,
                                         const TwoPointScene& tp);

// Fisher information ----------------------------------------------------------

struct CfiResult {
  double value = 0.0;
  std::vector<double> per_outcome;
  std::string receiver;
  double theta = 0.0;
  double tail_bound = 0.0;
  std::vector<std::string> warnings;
};

/// N sum_i (dP_i)^2 / P_i over counted outcomes. Terms with P < 1e-14 and
/// |dP| < 1e-12 use the double-zero limit 2 d2P when d2P is known and are
/// skipped otherwise; a near-zero P with non-vanishing dP adds a warning.
CfiResult cfi_from_distribution(const OutcomeDistribution& dist, double n_photons);

CfiResult direct_imaging_cfi(const ApertureArray& array, const TwoPointScene& tp,
                             const numerics::QuadratureSpec& quad = {});
/// 4N G'^2/(1-G^2) for which = 0; -4N G''^2/(G''(0) + G'^2) for which = 1.
CfiResult binspade_cfi(const ApertureArray& array, const TwoPointScene& tp, int which);
/// 4N G'(2 theta)^2 / (1 - G(2 theta)^2)
CfiResult sliver_cfi(const ApertureArray& array, const TwoPointScene& tp);
/// 4N G0'^2/(1-G0^2) + (4 pi^2 N r^2/sigma^2) G0^2
CfiResult trinary_spade_cfi(const ApertureArray& array, const TwoPointScene& tp);
CfiResult groupwise_cfi(const ApertureArray& array, const TwoPointScene& tp, const Groupwise& spec);
CfiResult lightpipe_cfi(const ApertureArray& array, const TwoPointScene& tp, const LightPipe& spec);

/// Truncated pairwise groupwise CFI with bucket in closed form.
double groupwise_truncated_closed_form(const ApertureArray& array, const TwoPointScene& tp, int j_max);
/// 4N Gamma_j'^2 + (4N/n) sum alpha^2 Gamma_j^2
double pairwise_mode_contribution(const ApertureArray& array, const TwoPointScene& tp, int j);

/// Dispatches to the closed form where one exists, otherwise to the
/// distribution.
CfiResult compute_cfi(const ApertureArray& array, const ReceiverSpec& spec, const TwoPointScene& tp);

struct ThetaMax {
  std::optional<double> theta;  // sigma units
  bool degenerate = false;      // CFI identical to K_lb on the bracket
};

/// Smallest theta in the bracket where CFI(theta) crosses K_lb, located by a
/// scan then bisection to 1e-6 sigma. Throws NumericError without a crossing.
ThetaMax theta_max_vs_longbaseline(const ReceiverSpec& spec, double r, double lo = 1e-3,
                                   double hi = 1.0, std::size_t scan_points = 400);

}  // namespace multiap
