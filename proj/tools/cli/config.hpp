#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "multiap/apertures.hpp"
#include "multiap/numerics/quadrature.hpp"

namespace multiap::cli {

inline constexpr double kMasPerRadian = 206264806.247096;

enum class Units { Sigma, Physical };

struct PhysicalSetup {
  double diameter_m = 8.408;
  double wavelength_um = 1.65;
  double sigma_mas() const;
};

struct ArraySetup {
  std::string kind = "pair";         // pair | single | positions
  std::vector<double> positions;     // kind == positions: centres in units of the width
  std::vector<double> positions_m;   // physical alternative to positions
};

struct GridSpec {
  std::vector<double> values;
};

struct SimulateSetup {
  std::string mode = "crb";  // crb | two_stage
  std::string receiver = "trinary_spade";
  int j_max = 40;
  double theta_true = 0.1;
  double n_photons = 1e5;
  std::size_t n_trials = 500;
  double alpha = 0.5;
  double bracket_lo = 1e-4;
  double bracket_hi = 1.5;
};

struct ThetaMaxSetup {
  double lo = 1e-3;
  double hi = 1.0;
  std::size_t scan_points = 400;
};

struct FiguresSetup {
  std::vector<double> panels{1.0, 2.0, 3.0};
  GridSpec r_grid;
  GridSpec theta;
};

struct RunConfig {
  Units units = Units::Sigma;
  PhysicalSetup physical;
  ArraySetup array;
  GridSpec r;
  GridSpec baseline_m;  // physical pair baselines, converted into r
  GridSpec theta;       // sigma units after conversion
  std::vector<std::string> receivers;
  std::vector<int> j_max{40};
  double n_photons = 1.0;
  numerics::QuadratureSpec quadrature;
  std::uint64_t seed = 1;
  std::string output_dir = "multiap_out";
  SimulateSetup simulate;
  ThetaMaxSetup theta_max;
  FiguresSetup figures;

  std::string canonical;  // normalized document used for hashing
  std::string conversion_note;

  /// Arrays for every r on the grid (one entry for non-pair geometries).
  std::vector<ApertureArray> arrays() const;
  std::uint64_t hash() const;
};

/// Parses a JSON config document; unknown keys and malformed values throw
/// ValidationError naming the offending key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

std::uint64_t fnv1a64(const std::string& bytes);

std::vector<std::string> default_receivers();
std::vector<std::string> known_receivers();

}  // namespace multiap::cli
