#include "cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"

#include "multiap/errors.hpp"
#include "multiap/estimation.hpp"
#include "multiap/quantum.hpp"

#ifndef MULTIAP_VERSION
#define MULTIAP_VERSION "0.0.0"
#endif

namespace multiap::cli {

namespace {

template <class Body>
void parallel_for(std::size_t count, unsigned jobs, Body&& body) {
  jobs = std::max(1u, jobs);
  if (jobs == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(jobs, count); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

double outer_ratio(const ApertureArray& a) {
  const auto& p = a.positions();
  const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
  return (*hi - *lo) / a.delta();
}

std::string hex_hash(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string panel_tag(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", r);
  return buf;
}

QfiResult reference_qfi(const ApertureArray& array, double theta, double n_photons) {
  if (array.symmetric()) return qfi_two_point_analytic(array, n_photons);
  return qfi_numeric(array, Parametrization::two_point(n_photons), theta * array.sigma(), kDefaultJMax);
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<std::string> multi_axial_receivers() { return {"direct_imaging", "binspade0", "binspade1", "sliver"}; }

std::vector<std::string> co_axial_receivers() {
  return {"trinary_spade", "pairwise_spade", "lightpipe", "lightpipe_reflected"};
}

std::vector<NamedReceiver> build_receivers(const std::string& name, const ApertureArray& array,
                                           const std::vector<int>& j_max,
                                           const numerics::QuadratureSpec& quad) {
  std::vector<ReceiverSpec> specs;
  if (name == "direct_imaging") {
    specs.push_back(DirectImaging{quad});
  } else if (name == "binspade0") {
    specs.push_back(BinSpade0{});
  } else if (name == "binspade1") {
    specs.push_back(BinSpade1{});
  } else if (name == "sliver") {
    specs.push_back(Sliver{});
  } else if (name == "trinary_spade") {
    specs.push_back(TrinarySpade{});
  } else if (name == "lightpipe") {
    specs.push_back(LightPipe{pairwise_coeffs(array)});
  } else if (name == "lightpipe_reflected") {
    specs.push_back(LightPipeReflected{});
  } else if (name == "pairwise_spade" || name == "pairwise_spade_nobucket") {
    for (int j : j_max) specs.push_back(Groupwise{pairwise_coeffs(array), j, name == "pairwise_spade"});
  } else if (name == "spade_gs") {
    for (int j : j_max) specs.push_back(FullSpade{SpadeBasis::GramSchmidt, j});
  } else if (name == "spade_local") {
    for (int j : j_max) specs.push_back(FullSpade{SpadeBasis::LocalModes, j});
  } else {
    throw ValidationError("unknown receiver '" + name + "'");
  }
  std::vector<NamedReceiver> out;
  for (auto& s : specs) out.push_back({receiver_name(s), std::move(s)});
  return out;
}

std::vector<SweepRow> cfi_sweep(const std::vector<ApertureArray>& arrays, const std::vector<std::string>& receivers,
                                const std::vector<double>& thetas, const std::vector<int>& j_max, double n_photons,
                                const numerics::QuadratureSpec& quad, unsigned jobs) {
  struct Task {
    const ApertureArray* array;
    NamedReceiver rx;
    double theta;
  };
  std::vector<Task> tasks;
  for (const auto& a : arrays)
    for (const auto& name : receivers)
      for (auto& rx : build_receivers(name, a, j_max, quad))
        for (double t : thetas) tasks.push_back({&a, rx, t});

  std::vector<SweepRow> rows(tasks.size());
  parallel_for(tasks.size(), jobs, [&](std::size_t i) {
    const Task& t = tasks[i];
    const double s = t.array->sigma();
    const QfiResult q = reference_qfi(*t.array, t.theta, n_photons);
    const CfiResult c = compute_cfi(*t.array, t.rx.spec, TwoPointScene{t.theta * s, n_photons});
    SweepRow& row = rows[i];
    row.r = outer_ratio(*t.array);
    row.theta = t.theta;
    row.receiver = t.rx.name;
    row.cfi = c.value;
    row.qfi = q.total;
    row.ratio = q.total > 0.0 ? c.value / q.total : 0.0;
    row.k_1ap = q.k_1ap.value_or(std::nan(""));
    row.k_lb = q.k_lb.value_or(std::nan(""));
    for (const auto& w : c.warnings) std::clog << "multiap: " << t.rx.name << " at theta = " << t.theta << ": " << w << "\n";
  });
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.receiver, a.r, a.theta) < std::tie(b.receiver, b.r, b.theta);
  });
  return rows;
}

Table sweep_table(const std::vector<SweepRow>& rows) {
  Table t;
  t.columns = {"r", "theta", "receiver", "cfi", "qfi", "cfi_over_qfi", "k_1ap", "k_lb"};
  for (const auto& r : rows) {
    t.rows.push_back({format_number(r.r), format_number(r.theta), r.receiver, format_number(r.cfi),
                      format_number(r.qfi), format_number(r.ratio), format_number(r.k_1ap), format_number(r.k_lb)});
  }
  return t;
}

Table qfi_table(const RunConfig& cfg) {
  Table t;
  t.columns = {"r", "k_total", "k_1ap", "k_lb", "k_1ap_fraction"};
  std::vector<std::tuple<double, QfiResult>> rows;
  for (const auto& a : cfg.arrays()) {
    const QfiResult q = reference_qfi(a, cfg.theta.values.front(), cfg.n_photons);
    rows.emplace_back(outer_ratio(a), q);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return std::get<0>(x) < std::get<0>(y); });
  for (const auto& [r, q] : rows) {
    const double k1 = q.k_1ap.value_or(std::nan(""));
    const double klb = q.k_lb.value_or(std::nan(""));
    t.rows.push_back({format_number(r), format_number(q.total), format_number(k1), format_number(klb),
                      format_number(k1 / q.total)});
  }
  return t;
}

Table theta_max_table(const RunConfig& cfg, unsigned jobs) {
  if (cfg.array.kind != "pair") throw ValidationError("theta-max needs array.kind = 'pair'");
  struct Task {
    std::string name;
    ReceiverSpec spec;
    double r;
  };
  std::vector<Task> tasks;
  for (double r : cfg.r.values) {
    const ApertureArray a = ApertureArray::pair(r, 1.0);
    for (const auto& name : cfg.receivers)
      for (auto& rx : build_receivers(name, a, cfg.j_max, cfg.quadrature)) tasks.push_back({rx.name, rx.spec, r});
  }
  std::vector<std::vector<std::string>> rows(tasks.size());
  parallel_for(tasks.size(), jobs, [&](std::size_t i) {
    const Task& t = tasks[i];
    std::string value;
    std::string status;
    try {
      const ThetaMax m =
          theta_max_vs_longbaseline(t.spec, t.r, cfg.theta_max.lo, cfg.theta_max.hi, cfg.theta_max.scan_points);
      if (m.degenerate) {
        status = "degenerate";
      } else {
        value = format_number(*m.theta);
        status = "root";
      }
    } catch (const NumericError&) {
      status = "no_crossing";
    }
    rows[i] = {t.name, format_number(t.r), value, status};
  });
  std::vector<std::size_t> order(tasks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(tasks[a].name, tasks[a].r) < std::tie(tasks[b].name, tasks[b].r);
  });
  Table t;
  t.columns = {"receiver", "r", "theta_max", "status"};
  for (std::size_t i : order) t.rows.push_back(rows[i]);
  return t;
}

SimulateOutput simulate(const RunConfig& cfg, unsigned jobs) {
  const auto& s = cfg.simulate;
  const ApertureArray array = cfg.arrays().front();
  const auto rx = build_receivers(s.receiver, array, {s.j_max}, cfg.quadrature);
  if (rx.size() != 1) throw ValidationError("simulate needs exactly one receiver");
  if (!(s.n_photons >= 1.0)) throw ValidationError("simulate.n_photons must be >= 1");

  TrialConfig tc;
  tc.array = array;
  tc.receiver = rx.front().spec;
  tc.theta_true = s.theta_true;
  tc.n_photons = static_cast<std::uint64_t>(std::llround(s.n_photons));
  tc.n_trials = s.n_trials;
  tc.seed = cfg.seed;
  tc.alpha = s.alpha;
  tc.bracket = {s.bracket_lo, s.bracket_hi};
  tc.jobs = jobs;
  const bool two = s.mode == "two_stage";
  const EstimateRecord rec = two ? two_stage(tc) : crb_report(tc);

  SimulateOutput out;
  out.trials.columns = two ? std::vector<std::string>{"index", "theta_hat", "theta_hat_stage_one"}
                           : std::vector<std::string>{"index", "theta_hat"};
  for (std::size_t i = 0; i < rec.theta_hat.size(); ++i) {
    std::vector<std::string> row{std::to_string(i), format_number(rec.theta_hat[i])};
    if (two) row.push_back(format_number(rec.stage_one[i]));
    out.trials.rows.push_back(std::move(row));
  }

  nlohmann::ordered_json j;
  j["version"] = MULTIAP_VERSION;
  j["seed"] = cfg.seed;
  j["config_hash"] = hex_hash(cfg.hash());
  j["mode"] = s.mode;
  j["receiver"] = two ? std::string("direct_imaging+") + receiver_name(default_stage_two(array)) : rx.front().name;
  j["r"] = outer_ratio(array);
  j["theta_true"] = s.theta_true;
  j["n_photons"] = tc.n_photons;
  j["n_trials"] = tc.n_trials;
  if (two) j["alpha"] = tc.alpha;
  j["failures"] = rec.failures;
  j["sample_mean"] = rec.sample_mean;
  j["sample_variance"] = rec.sample_variance;
  j[two ? "qfi" : "cfi"] = rec.fisher;
  j["crb"] = rec.crb;
  j["efficiency"] = rec.efficiency;
  j["efficiency_ci95"] = {rec.efficiency_lo, rec.efficiency_hi};
  j["units"] = cfg.conversion_note;
  out.summary_json = j.dump(2) + "\n";
  return out;
}

void write_text(const std::string& dir, const std::string& name, const std::string& body) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path.string());
  f << body;
}

void write_csv(const std::string& dir, const std::string& name, const std::string& command, const RunConfig& cfg,
               const Table& table) {
  std::ostringstream os;
  os << "# multiap " << MULTIAP_VERSION << " csv_schema " << kSchemaVersion << "\n";
  os << "# command: " << command << "\n";
  os << "# seed: " << cfg.seed << "\n";
  os << "# config_hash: fnv1a64:" << hex_hash(cfg.hash()) << "\n";
  os << "# units: " << cfg.conversion_note << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
  os << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  write_text(dir, name, os.str());
}

int run_qfi(const RunConfig& cfg, unsigned) {
  write_csv(cfg.output_dir, "qfi.csv", "qfi", cfg, qfi_table(cfg));
  return 0;
}

int run_cfi(const RunConfig& cfg, unsigned jobs) {
  const auto rows = cfi_sweep(cfg.arrays(), cfg.receivers, cfg.theta.values, cfg.j_max, cfg.n_photons,
                              cfg.quadrature, jobs);
  write_csv(cfg.output_dir, "cfi.csv", "cfi", cfg, sweep_table(rows));
  return 0;
}

int run_theta_max(const RunConfig& cfg, unsigned jobs) {
  write_csv(cfg.output_dir, "theta_max.csv", "theta-max", cfg, theta_max_table(cfg, jobs));
  return 0;
}

int run_simulate(const RunConfig& cfg, unsigned jobs) {
  const SimulateOutput out = simulate(cfg, jobs);
  write_csv(cfg.output_dir, "simulate_trials.csv", "simulate", cfg, out.trials);
  write_text(cfg.output_dir, "simulate_summary.json", out.summary_json);
  return 0;
}

namespace {

std::string sweep_script(const std::string& stem, const std::vector<double>& panels,
                         const std::vector<std::string>& names, const std::string& title) {
  std::ostringstream gp;
  gp << "set datafile separator ','\n"
     << "set terminal pngcairo size 1500,450\n"
     << "set output '" << stem << ".png'\n"
     << "set multiplot layout 1," << panels.size() << " title '" << title << "'\n"
     << "set xlabel 'theta / sigma'\nset ylabel 'CFI / QFI'\nset yrange [0:1.05]\nset key bottom left\n";
  for (double r : panels) {
    const std::string file = stem + "_r" + panel_tag(r) + ".csv";
    gp << "set title 'r = " << panel_tag(r) << "'\nplot ";
    for (std::size_t i = 0; i < names.size(); ++i) {
      gp << (i ? ", \\\n     " : "") << "'" << file << "' using 2:(strcol(3) eq '" << names[i]
         << "' ? $6 : NaN) with lines title '" << names[i] << "'";
    }
    gp << "\n";
  }
  gp << "unset multiplot\n";
  return gp.str();
}

}  // namespace

int run_figures(const RunConfig& cfg, unsigned jobs) {
  const auto& f = cfg.figures;
  const std::string& dir = cfg.output_dir;

  Table fig4;
  fig4.columns = {"r", "k_total", "k_1ap", "k_lb"};
  Table fig7a;
  fig7a.columns = {"r", "percent_reduction"};
  for (double r : f.r_grid.values) {
    const QfiResult q = qfi_two_point_analytic(ApertureArray::pair(r, 1.0), cfg.n_photons);
    fig4.rows.push_back({format_number(r), format_number(q.total), format_number(*q.k_1ap), format_number(*q.k_lb)});
    fig7a.rows.push_back({format_number(r), format_number(100.0 * *q.k_1ap / q.total)});
  }
  write_csv(dir, "fig4.csv", "figures", cfg, fig4);
  write_csv(dir, "fig7a.csv", "figures", cfg, fig7a);

  std::vector<std::string> coax_names;
  for (const auto& name : co_axial_receivers())
    for (const auto& rx : build_receivers(name, ApertureArray::pair(1.0), cfg.j_max, cfg.quadrature))
      coax_names.push_back(rx.name);
  for (double r : f.panels) {
    const std::vector<ApertureArray> arr{ApertureArray::pair(r, 1.0)};
    write_csv(dir, "fig5_r" + panel_tag(r) + ".csv", "figures", cfg,
              sweep_table(cfi_sweep(arr, multi_axial_receivers(), f.theta.values, cfg.j_max, cfg.n_photons,
                                    cfg.quadrature, jobs)));
    write_csv(dir, "fig6_r" + panel_tag(r) + ".csv", "figures", cfg,
              sweep_table(cfi_sweep(arr, co_axial_receivers(), f.theta.values, cfg.j_max, cfg.n_photons,
                                    cfg.quadrature, jobs)));
  }

  RunConfig tm = cfg;
  tm.array.kind = "pair";
  tm.r = f.r_grid;
  tm.receivers = {"trinary_spade", "binspade0", "binspade1", "sliver"};
  write_csv(dir, "fig7b.csv", "figures", cfg, theta_max_table(tm, jobs));

  write_text(dir, "fig4.gp",
             "set datafile separator ','\nset terminal pngcairo size 700,500\nset output 'fig4.png'\n"
             "set xlabel 'r'\nset ylabel 'QFI (sigma^{-2} per photon)'\nset key top left\n"
             "plot 'fig4.csv' using 1:2 with lines title 'total', \\\n"
             "     'fig4.csv' using 1:3 with lines title 'single aperture', \\\n"
             "     'fig4.csv' using 1:4 with lines title 'long baseline'\n");
  write_text(dir, "fig5.gp", sweep_script("fig5", f.panels, multi_axial_receivers(), "multi-axial receivers"));
  write_text(dir, "fig6.gp", sweep_script("fig6", f.panels, coax_names, "co-axial receivers"));
  std::ostringstream fig7;
  fig7 << "set datafile separator ','\nset terminal pngcairo size 1200,450\nset output 'fig7.png'\n"
       << "set multiplot layout 1,2\n"
       << "set xlabel 'r'\nset ylabel 'MSE reduction (%)'\nset arrow from 1.71, graph 0 to 1.71, graph 1 nohead dt 2\n"
       << "plot 'fig7a.csv' using 1:2 with lines notitle\n"
       << "set ylabel 'theta_max / sigma'\nset key top right\nplot ";
  const std::vector<std::string> tm_names{"trinary_spade", "binspade0", "binspade1", "sliver"};
  for (std::size_t i = 0; i < tm_names.size(); ++i) {
    fig7 << (i ? ", \\\n     " : "") << "'fig7b.csv' using 2:(strcol(1) eq '" << tm_names[i]
         << "' ? $3 : NaN) with lines title '" << tm_names[i] << "'";
  }
  fig7 << "\nunset multiplot\n";
  write_text(dir, "fig7.gp", fig7.str());
  return 0;
}

}  // namespace multiap::cli
