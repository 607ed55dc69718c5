#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "multiap/receivers.hpp"

namespace multiap::cli {

inline constexpr int kSchemaVersion = 1;

struct SweepRow {
  double r = 0.0;
  double theta = 0.0;
  std::string receiver;
  double cfi = 0.0;
  double qfi = 0.0;
  double ratio = 0.0;
  double k_1ap = 0.0;
  double k_lb = 0.0;
};

/// A CSV table with metadata lines ahead of the header.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::string format_number(double v);  // 12 significant digits

struct NamedReceiver {
  std::string name;
  ReceiverSpec spec;
};

/// Maps a config receiver name onto specs for one array; names that take a
/// j_max expand over the j_max grid.
std::vector<NamedReceiver> build_receivers(const std::string& name, const ApertureArray& array,
                                           const std::vector<int>& j_max,
                                           const numerics::QuadratureSpec& quad);

std::vector<std::string> multi_axial_receivers();
std::vector<std::string> co_axial_receivers();

/// Every (receiver, r, theta) point, sorted by receiver, then r, then theta.
std::vector<SweepRow> cfi_sweep(const std::vector<ApertureArray>& arrays, const std::vector<std::string>& receivers,
                                const std::vector<double>& thetas, const std::vector<int>& j_max, double n_photons,
                                const numerics::QuadratureSpec& quad, unsigned jobs);

Table qfi_table(const RunConfig& cfg);
Table sweep_table(const std::vector<SweepRow>& rows);
Table theta_max_table(const RunConfig& cfg, unsigned jobs);

struct SimulateOutput {
  Table trials;
  std::string summary_json;
};
SimulateOutput simulate(const RunConfig& cfg, unsigned jobs);

/// Writes `name` under dir with version, command, seed and config hash as
/// leading comment lines.
void write_csv(const std::string& dir, const std::string& name, const std::string& command, const RunConfig& cfg,
               const Table& table);
void write_text(const std::string& dir, const std::string& name, const std::string& body);

int run_qfi(const RunConfig& cfg, unsigned jobs);
int run_cfi(const RunConfig& cfg, unsigned jobs);
int run_theta_max(const RunConfig& cfg, unsigned jobs);
int run_simulate(const RunConfig& cfg, unsigned jobs);
int run_figures(const RunConfig& cfg, unsigned jobs);

}  // namespace multiap::cli
