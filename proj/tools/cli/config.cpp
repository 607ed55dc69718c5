#include "cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

#include "multiap/errors.hpp"

namespace multiap::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ValidationError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!ok.count(it.key())) {
      throw ValidationError("unknown config key '" + (where.empty() ? "" : where + ".") + it.key() + "'");
    }
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config key '" + where + key + "' has the wrong type");
  }
}

GridSpec read_grid(const json& v, const std::string& name) {
  GridSpec g;
  if (v.is_number()) {
    g.values = {v.get<double>()};
  } else if (v.is_array()) {
    for (const auto& x : v) {
      if (!x.is_number()) throw ValidationError("grid '" + name + "' must contain numbers");
      g.values.push_back(x.get<double>());
    }
  } else if (v.is_object()) {
    reject_unknown(v, name, {"start", "stop", "count", "step"});
    if (!v.contains("start") || !v.contains("stop")) throw ValidationError("grid '" + name + "' needs start and stop");
    const double a = v.at("start").get<double>();
    const double b = v.at("stop").get<double>();
    std::size_t count = 0;
    if (v.contains("count")) {
      count = v.at("count").get<std::size_t>();
    } else if (v.contains("step")) {
      const double step = v.at("step").get<double>();
      if (!(step > 0.0)) throw ValidationError("grid '" + name + "' step must be > 0");
      count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    } else {
      throw ValidationError("grid '" + name + "' needs count or step");
    }
    if (count < 1) throw ValidationError("grid '" + name + "' is empty");
    for (std::size_t i = 0; i < count; ++i) {
      g.values.push_back(count == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
  } else {
    throw ValidationError("grid '" + name + "' must be a number, a list or {start, stop, count|step}");
  }
  if (g.values.empty()) throw ValidationError("grid '" + name + "' is empty");
  return g;
}

GridSpec default_grid(double a, double b, std::size_t count) {
  GridSpec g;
  for (std::size_t i = 0; i < count; ++i) g.values.push_back(a + (b - a) * i / static_cast<double>(count - 1));
  return g;
}

}  // namespace

double PhysicalSetup::sigma_mas() const {
  return 2.0 * std::numbers::pi * wavelength_um * 1e-6 / diameter_m * kMasPerRadian;
}

std::vector<std::string> default_receivers() {
  return {"direct_imaging", "binspade0", "binspade1", "sliver", "trinary_spade", "pairwise_spade", "lightpipe"};
}

std::vector<std::string> known_receivers() {
  return {"direct_imaging", "binspade0", "binspade1", "sliver", "trinary_spade", "pairwise_spade",
          "pairwise_spade_nobucket", "lightpipe", "lightpipe_reflected", "spade_gs", "spade_local"};
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical + "|seed=" + std::to_string(seed)); }

std::vector<ApertureArray> RunConfig::arrays() const {
  if (array.kind == "single") return {ApertureArray::single(1.0)};
  if (array.kind == "positions") {
    const double delta = 2.0 * std::numbers::pi;
    std::vector<double> alpha;
    for (double p : array.positions) alpha.push_back(p * delta);
    return {ApertureArray::make(alpha, delta)};
  }
  std::vector<ApertureArray> out;
  for (double rv : r.values) out.push_back(ApertureArray::pair(rv, 1.0));
  return out;
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");
  reject_unknown(doc, "",
                 {"units", "physical", "array", "r", "baseline_m", "theta", "receivers", "j_max", "n_photons",
                  "quadrature", "seed", "output_dir", "simulate", "theta_max", "figures"});

  RunConfig c;
  std::string units = "sigma";
  read(doc, "units", units, "");
  if (units == "sigma") {
    c.units = Units::Sigma;
  } else if (units == "physical") {
    c.units = Units::Physical;
  } else {
    throw ValidationError("units must be 'sigma' or 'physical'");
  }

  if (doc.contains("physical")) {
    const auto& p = doc.at("physical");
    reject_unknown(p, "physical", {"diameter_m", "wavelength_um"});
    read(p, "diameter_m", c.physical.diameter_m, "physical.");
    read(p, "wavelength_um", c.physical.wavelength_um, "physical.");
  }
  if (!(c.physical.diameter_m > 0.0) || !(c.physical.wavelength_um > 0.0)) {
    throw ValidationError("physical diameter and wavelength must be > 0");
  }

  if (doc.contains("array")) {
    const auto& a = doc.at("array");
    reject_unknown(a, "array", {"kind", "positions", "positions_m"});
    read(a, "kind", c.array.kind, "array.");
    read(a, "positions", c.array.positions, "array.");
    read(a, "positions_m", c.array.positions_m, "array.");
  }
  if (c.array.kind != "pair" && c.array.kind != "single" && c.array.kind != "positions") {
    throw ValidationError("array.kind must be 'pair', 'single' or 'positions'");
  }

  c.r = doc.contains("r") ? read_grid(doc.at("r"), "r") : GridSpec{{1.0, 2.0, 3.0}};
  c.theta = doc.contains("theta") ? read_grid(doc.at("theta"), "theta") : default_grid(0.01, 1.0, 100);

  std::ostringstream note;
  if (c.units == Units::Physical) {
    const double s_mas = c.physical.sigma_mas();
    note << "sigma = 2*pi*lambda/d = " << s_mas << " mas (d = " << c.physical.diameter_m
         << " m, lambda = " << c.physical.wavelength_um << " um); theta[sigma] = theta[mas]/sigma; r = baseline/d";
    for (double& t : c.theta.values) t /= s_mas;
    if (doc.contains("baseline_m")) {
      c.baseline_m = read_grid(doc.at("baseline_m"), "baseline_m");
      c.r.values.clear();
      for (double b : c.baseline_m.values) c.r.values.push_back(b / c.physical.diameter_m);
    }
    if (!c.array.positions_m.empty()) {
      c.array.positions.clear();
      for (double p : c.array.positions_m) c.array.positions.push_back(p / c.physical.diameter_m);
    }
  } else {
    note << "sigma units";
    if (doc.contains("baseline_m") || !c.array.positions_m.empty()) {
      throw ValidationError("baseline_m and array.positions_m need units = 'physical'");
    }
  }
  c.conversion_note = note.str();
  if (c.array.kind == "positions" && c.array.positions.empty()) {
    throw ValidationError("array.kind = 'positions' needs array.positions or array.positions_m");
  }
  for (double t : c.theta.values)
    if (!(t >= 0.0)) throw ValidationError("theta values must be >= 0");

  c.receivers = default_receivers();
  read(doc, "receivers", c.receivers, "");
  const auto known = known_receivers();
  for (const auto& name : c.receivers)
    if (std::find(known.begin(), known.end(), name) == known.end())
      throw ValidationError("receivers: unknown receiver '" + name + "'");
  if (doc.contains("j_max")) {
    const auto& j = doc.at("j_max");
    c.j_max.clear();
    if (j.is_number_integer()) {
      c.j_max.push_back(j.get<int>());
    } else if (j.is_array()) {
      for (const auto& v : j) {
        if (!v.is_number_integer()) throw ValidationError("j_max must hold integers");
        c.j_max.push_back(v.get<int>());
      }
    } else {
      throw ValidationError("j_max must be an integer or a list of integers");
    }
  }
  for (int j : c.j_max)
    if (j < 0) throw ValidationError("j_max values must be >= 0");
  read(doc, "n_photons", c.n_photons, "");
  if (!(c.n_photons > 0.0)) throw ValidationError("n_photons must be > 0");

  if (doc.contains("quadrature")) {
    const auto& q = doc.at("quadrature");
    reject_unknown(q, "quadrature", {"rel_tol", "abs_tol", "domain_halfwidth", "max_subdivisions"});
    read(q, "rel_tol", c.quadrature.rel_tol, "quadrature.");
    read(q, "abs_tol", c.quadrature.abs_tol, "quadrature.");
    read(q, "domain_halfwidth", c.quadrature.domain_halfwidth, "quadrature.");
    read(q, "max_subdivisions", c.quadrature.max_subdivisions, "quadrature.");
  }
  c.quadrature.validate();

  read(doc, "seed", c.seed, "");
  read(doc, "output_dir", c.output_dir, "");

  if (doc.contains("simulate")) {
    const auto& s = doc.at("simulate");
    reject_unknown(s, "simulate",
                   {"mode", "receiver", "j_max", "theta_true", "n_photons", "n_trials", "alpha", "bracket"});
    auto& m = c.simulate;
    read(s, "mode", m.mode, "simulate.");
    read(s, "receiver", m.receiver, "simulate.");
    if (std::find(known.begin(), known.end(), m.receiver) == known.end())
      throw ValidationError("simulate.receiver: unknown receiver '" + m.receiver + "'");
    read(s, "j_max", m.j_max, "simulate.");
    read(s, "theta_true", m.theta_true, "simulate.");
    read(s, "n_photons", m.n_photons, "simulate.");
    read(s, "n_trials", m.n_trials, "simulate.");
    read(s, "alpha", m.alpha, "simulate.");
    if (s.contains("bracket")) {
      std::vector<double> b;
      read(s, "bracket", b, "simulate.");
      if (b.size() != 2) throw ValidationError("simulate.bracket must be [lo, hi]");
      m.bracket_lo = b[0];
      m.bracket_hi = b[1];
    }
    if (c.units == Units::Physical) m.theta_true /= c.physical.sigma_mas();
  }
  if (c.simulate.mode != "crb" && c.simulate.mode != "two_stage") {
    throw ValidationError("simulate.mode must be 'crb' or 'two_stage'");
  }

  if (doc.contains("theta_max")) {
    const auto& t = doc.at("theta_max");
    reject_unknown(t, "theta_max", {"lo", "hi", "scan_points"});
    read(t, "lo", c.theta_max.lo, "theta_max.");
    read(t, "hi", c.theta_max.hi, "theta_max.");
    read(t, "scan_points", c.theta_max.scan_points, "theta_max.");
  }
  if (!(c.theta_max.lo > 0.0 && c.theta_max.hi > c.theta_max.lo) || c.theta_max.scan_points < 2) {
    throw ValidationError("theta_max needs 0 < lo < hi and scan_points >= 2");
  }

  c.figures.r_grid = default_grid(1.0, 3.0, 41);
  c.figures.theta = default_grid(0.01, 1.0, 100);
  if (doc.contains("figures")) {
    const auto& f = doc.at("figures");
    reject_unknown(f, "figures", {"panels", "r_grid", "theta"});
    read(f, "panels", c.figures.panels, "figures.");
    if (f.contains("r_grid")) c.figures.r_grid = read_grid(f.at("r_grid"), "figures.r_grid");
    if (f.contains("theta")) c.figures.theta = read_grid(f.at("theta"), "figures.theta");
  }

  c.arrays();
  for (double r : c.figures.panels) ApertureArray::pair(r, 1.0);
  for (double r : c.figures.r_grid.values) ApertureArray::pair(r, 1.0);

  json canon = doc;
  canon.erase("seed");
  canon.erase("output_dir");
  c.canonical = canon.dump();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace multiap::cli
