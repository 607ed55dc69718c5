#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "multiap/errors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "JSON run configuration (defaults apply when omitted)");
  sub->add_option("--out", o.out, "output directory (overrides output_dir)");
  sub->add_option("--seed", o.seed, "RNG seed (overrides seed)");
  sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace multiap;
  CLI::App app{"multiap: Fisher information of multi-aperture receivers for two-point separation"};
  app.require_subcommand(1);
  Options o;
  int (*run)(const cli::RunConfig&, unsigned) = nullptr;

  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(const cli::RunConfig&, unsigned);
  };
  const Entry entries[] = {
      {"qfi", "analytic QFI and its single-aperture / long-baseline split over the r grid", cli::run_qfi},
      {"cfi", "CFI of every configured receiver over the r and theta grids", cli::run_cfi},
      {"theta-max", "largest theta where each receiver still beats the long-baseline QFI", cli::run_theta_max},
      {"simulate", "Monte Carlo MLE campaign (CRB check or two-stage protocol)", cli::run_simulate},
      {"figures", "CSV data and gnuplot scripts for the figure set", cli::run_figures},
  };
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    add_common(sub, o);
    sub->callback([&run, fn = e.fn] { run = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    cli::RunConfig cfg = o.config.empty() ? cli::parse_config("{}") : cli::load_config(o.config);
    if (!o.out.empty()) cfg.output_dir = o.out;
    if (o.seed) cfg.seed = *o.seed;
    return run(cfg, o.jobs);
  } catch (const ValidationError& e) {
    std::cerr << "multiap: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "multiap: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "multiap: numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "multiap: " << e.what() << "\n";
    return kExitNumeric;
  }
}
