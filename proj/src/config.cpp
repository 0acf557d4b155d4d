#include "pdc/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pdc/errors.hpp"
#include "pdc/units.hpp"

namespace pdc {

using nlohmann::json;

DispersionModel DispersionSection::model() const {
  return DispersionModel(formula, coefficients, temperature_k, valid_um.first, valid_um.second);
}

RunConfig::RunConfig() {
  const double p0 = 15.0 * 5.0 / 18.0, p1 = 15.0;
  for (int k = 0; k < 10; ++k) gain.powers_mw.push_back(p0 + (p1 - p0) * k / 9.0);
}

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Reads fields from one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string at(const std::string& key) const { return join(path_, key); }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) out = as_number(*v, at(key));
  }
  void optional_number(const std::string& key, std::optional<double>& out) {
    if (const json* v = find(key)) out = v->is_null() ? std::nullopt : std::optional<double>(as_number(*v, at(key)));
  }
  void count(const std::string& key, std::size_t& out) {
    if (const json* v = find(key)) out = as_count(*v, at(key));
  }
  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void pair(const std::string& key, std::pair<double, double>& out) {
    if (const json* v = find(key)) out = as_pair(*v, at(key));
  }
  void optional_pair(const std::string& key, std::optional<std::pair<double, double>>& out) {
    if (const json* v = find(key)) out = v->is_null() ? std::nullopt : std::optional(as_pair(*v, at(key)));
  }
  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(at(key), "expected an array of numbers");
      out.clear();
      for (std::size_t k = 0; k < v->size(); ++k) out.push_back(as_number((*v)[k], at(key) + "[" + std::to_string(k) + "]"));
    }
  }
  template <class Parse, class T>
  void named(const std::string& key, T& out, Parse parse) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(at(key), "expected a string");
      try {
        out = parse(v->get<std::string>());
      } catch (const Error& e) {
        throw ConfigError(at(key), e.what());
      }
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(at(key), "unknown key");
    }
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
    return x;
  }
  static std::size_t as_count(const json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(path, "expected a non-negative integer");
    return v.get<std::size_t>();
  }
  static std::pair<double, double> as_pair(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) throw ConfigError(path, "expected [low, high]");
    const double lo = as_number(v[0], path + "[0]"), hi = as_number(v[1], path + "[1]");
    if (!(lo < hi)) throw ConfigError(path, "low must be below high");
    return {lo, hi};
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
void section(Section& parent, const std::string& key, F&& body) {
  if (const json* v = parent.find(key)) {
    Section s(*v, parent.at(key));
    body(s);
    s.finish();
  }
}

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path, what);
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  Section root(j, "");
  section(root, "dispersion", [&](Section& s) {
    s.string("formula", c.dispersion.formula);
    s.string("citation", c.dispersion.citation);
    s.numbers("coefficients", c.dispersion.coefficients);
    s.number("temperature_K", c.dispersion.temperature_k);
    s.pair("valid_wavelength_um", c.dispersion.valid_um);
  });
  section(root, "pump", [&](Section& s) { s.number("wavelength_nm", c.pump_wavelength_nm); });
  section(root, "grating", [&](Section& s) {
    s.named("kind", c.grating.kind, grating_kind_from_string);
    s.number("alpha", c.grating.alpha);
    s.number("beta", c.grating.beta);
    s.number("constant_k", c.grating.constant_k);
    s.number("length_mm", c.grating.length);
  });
  section(root, "solver", [&](Section& s) {
    const bool has_nu0 = s.find("nu0") != nullptr, has_g = s.find("coupling_g") != nullptr;
    if (has_g && !has_nu0) c.solver.nu0.reset();
    s.optional_number("nu0", c.solver.nu0);
    s.optional_number("coupling_g", c.solver.coupling_g);
    s.number("coupling_phase_rad", c.solver.coupling_phase);
    section(s, "grid", [&](Section& g) {
      g.number("min_THz", c.solver.min_thz);
      g.number("max_THz", c.solver.max_thz);
      g.count("count", c.solver.count);
      g.boolean("mirrored", c.solver.mirrored);
    });
    s.named("integrator", c.solver.integrator, integrator_from_string);
    s.number("rtol", c.solver.rtol);
    s.number("atol", c.solver.atol);
    s.optional_number("max_step_mm", c.solver.max_step_mm);
  });
  section(root, "observables", [&](Section& s) {
    s.number("bin_width_THz", c.observables.bin_width_thz);
    s.optional_pair("band_THz", c.observables.band_thz);
    s.number("efficiency", c.observables.efficiency);
    s.count("ensemble_size", c.observables.ensemble_size);
    std::size_t seed = c.observables.seed;
    s.count("seed", seed);
    c.observables.seed = seed;
    s.named("ensemble_model", c.observables.model, ensemble_model_from_string);
    s.number("tau_min_fs", c.observables.tau_min_fs);
    s.number("tau_max_fs", c.observables.tau_max_fs);
    s.count("tau_count", c.observables.tau_count);
    s.number("pulse_fwhm_ps", c.observables.pulse_fwhm_ps);
    s.count("fft_padding", c.observables.fft_padding);
  });
  section(root, "gain", [&](Section& s) {
    s.numbers("powers_mW", c.gain.powers_mw);
    s.pair("band_nm", c.gain.band_nm);
    s.number("calibration_mm2_per_mW", c.gain.calibration);
    s.number("target_exponent", c.gain.target_exponent);
    s.number("target_power_mW", c.gain.target_power_mw);
    s.count("fit_points", c.gain.fit_points);
  });
  if (const json* v = root.find("output_dir")) {
    if (v->is_null()) {
      c.output_dir.reset();
    } else {
      require(v->is_string(), "output_dir", "expected a string");
      c.output_dir = v->get<std::string>();
    }
  }
  root.count("workers", c.workers);
  root.finish();
  c.validate();
  return c;
}

void RunConfig::validate() const {
  try {
    dispersion.model();
  } catch (const Error& e) {
    throw ConfigError("dispersion", e.what());
  }
  require(pump_wavelength_nm > 0.0, "pump.wavelength_nm", "must be > 0");
  try {
    grating.validate();
  } catch (const Error& e) {
    throw ConfigError("grating", e.what());
  }

  require(solver.nu0.has_value() != solver.coupling_g.has_value(), "solver",
          "set exactly one of nu0 and coupling_g");
  if (solver.nu0) {
    require(*solver.nu0 >= 0.0, "solver.nu0", "must be >= 0");
    require(grating.kind == GratingKind::hyperbolic, "solver.nu0",
            "nu0 needs a chirped grating; set coupling_g for a constant profile");
  }
  if (solver.coupling_g) require(*solver.coupling_g >= 0.0, "solver.coupling_g", "must be >= 0");
  require(solver.min_thz >= 0.0 && solver.min_thz < solver.max_thz, "solver.grid", "need 0 <= min_THz < max_THz");
  require(solver.count > 0, "solver.grid.count", "must be > 0");
  require(solver.rtol > 0.0 && solver.atol > 0.0, "solver", "rtol and atol must be > 0");
  if (solver.max_step_mm) require(*solver.max_step_mm > 0.0, "solver.max_step_mm", "must be > 0");

  // Every detuning must keep both sidebands inside the dispersion window.
  const DispersionModel model = dispersion.model();
  const InteractionFrequencies f = frequencies();
  try {
    mismatch(thz_to_omega(solver.max_thz), model, f);
  } catch (const Error& e) {
    throw ConfigError("solver.grid.max_THz", e.what());
  }

  const auto& o = observables;
  require(o.bin_width_thz > 0.0, "observables.bin_width_THz", "must be > 0");
  const double dnu = (solver.max_thz - solver.min_thz) / static_cast<double>(solver.count);
  const double ratio = o.bin_width_thz / dnu;
  require(std::llround(ratio) >= 1 && std::abs(ratio - std::round(ratio)) <= 1e-6 * ratio, "observables.bin_width_THz",
          "must be a whole multiple of the grid spacing " + std::to_string(dnu) + " THz");
  require(o.efficiency >= 0.0 && o.efficiency <= 1.0, "observables.efficiency", "must lie in [0, 1]");
  require(o.ensemble_size >= 2, "observables.ensemble_size", "must be >= 2");
  require(o.tau_count >= 1, "observables.tau_count", "must be >= 1");
  require(o.tau_min_fs <= o.tau_max_fs, "observables", "tau_min_fs must not exceed tau_max_fs");
  require(o.pulse_fwhm_ps >= 0.0, "observables.pulse_fwhm_ps", "must be >= 0");
  require(o.fft_padding >= 1, "observables.fft_padding", "must be >= 1");

  require(gain.powers_mw.size() >= 4, "gain.powers_mW", "need at least 4 powers");
  for (std::size_t k = 0; k < gain.powers_mw.size(); ++k) {
    require(gain.powers_mw[k] >= 0.0 && (k == 0 || gain.powers_mw[k] > gain.powers_mw[k - 1]), "gain.powers_mW",
            "powers must be >= 0 and strictly increasing");
  }
  require(gain.calibration > 0.0, "gain.calibration_mm2_per_mW", "must be > 0");
  require(gain.target_exponent > 0.0, "gain.target_exponent", "must be > 0");
  require(gain.target_power_mw > 0.0, "gain.target_power_mW", "must be > 0");
  require(gain.fit_points >= 2, "gain.fit_points", "must be >= 2");
  try {
    band_detunings(grid(), f, gain.band_nm);
  } catch (const Error& e) {
    throw ConfigError("gain.band_nm", e.what());
  }
}

json RunConfig::to_json() const {
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["dispersion"] = {{"formula", dispersion.formula},
                     {"citation", dispersion.citation},
                     {"coefficients", dispersion.coefficients},
                     {"temperature_K", dispersion.temperature_k},
                     {"valid_wavelength_um", {dispersion.valid_um.first, dispersion.valid_um.second}}};
  j["pump"] = {{"wavelength_nm", pump_wavelength_nm}};
  j["grating"] = {{"kind", std::string(to_string(grating.kind))},
                  {"alpha", grating.alpha},
                  {"beta", grating.beta},
                  {"constant_k", grating.constant_k},
                  {"length_mm", grating.length}};
  j["solver"] = {{"nu0", opt(solver.nu0)},
                 {"coupling_g", opt(solver.coupling_g)},
                 {"coupling_phase_rad", solver.coupling_phase},
                 {"grid", {{"min_THz", solver.min_thz}, {"max_THz", solver.max_thz}, {"count", solver.count},
                           {"mirrored", solver.mirrored}}},
                 {"integrator", std::string(to_string(solver.integrator))},
                 {"rtol", solver.rtol},
                 {"atol", solver.atol},
                 {"max_step_mm", opt(solver.max_step_mm)}};
  const auto& o = observables;
  j["observables"] = {{"bin_width_THz", o.bin_width_thz},
                      {"band_THz", o.band_thz ? json{o.band_thz->first, o.band_thz->second} : json(nullptr)},
                      {"efficiency", o.efficiency},
                      {"ensemble_size", o.ensemble_size},
                      {"seed", o.seed},
                      {"ensemble_model", std::string(to_string(o.model))},
                      {"tau_min_fs", o.tau_min_fs},
                      {"tau_max_fs", o.tau_max_fs},
                      {"tau_count", o.tau_count},
                      {"pulse_fwhm_ps", o.pulse_fwhm_ps},
                      {"fft_padding", o.fft_padding}};
  j["gain"] = {{"powers_mW", gain.powers_mw},
               {"band_nm", {gain.band_nm.first, gain.band_nm.second}},
               {"calibration_mm2_per_mW", gain.calibration},
               {"target_exponent", gain.target_exponent},
               {"target_power_mW", gain.target_power_mw},
               {"fit_points", gain.fit_points}};
  j["output_dir"] = opt(output_dir);
  j["workers"] = workers;
  return j;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like key.path=value");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &j;
  std::stringstream ss(key);
  std::string part, path;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError(key, "empty path component");
    parts.push_back(part);
  }
  for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
    path = join(path, parts[k]);
    if (!node->is_object()) throw ConfigError(path, "not an object");
    node = &(*node)[parts[k]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw ConfigError(path, "not an object");
  (*node)[parts.back()] = value;
}

RunConfig RunConfig::load(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "'" + path.string() + "' is not valid JSON: " + e.what());
  }
  for (const auto& o : overrides) apply_override(j, o);
  return from_json(j);
}

RunConfig RunConfig::defaults_with(const std::vector<std::string>& overrides) {
  json j = json::object();
  for (const auto& o : overrides) apply_override(j, o);
  return from_json(j);
}

InteractionFrequencies RunConfig::frequencies() const {
  return InteractionFrequencies::from_pump_wavelength(pump_wavelength_nm);
}

SpectralGrid RunConfig::grid() const {
  return SpectralGrid::from_thz(solver.min_thz, solver.max_thz, solver.count, solver.mirrored);
}

SolverConfig RunConfig::solver_config() const {
  SolverConfig s;
  s.nu0 = solver.nu0;
  if (solver.coupling_g) s.coupling_g = std::polar(*solver.coupling_g, solver.coupling_phase);
  s.grid = grid();
  s.integration.method = solver.integrator;
  s.integration.tol = {solver.rtol, solver.atol};
  s.integration.max_step = solver.max_step_mm;
  s.workers = workers;
  return s;
}

GainSetup RunConfig::gain_setup() const {
  GainSetup g;
  g.solver = solver_config();
  g.solver.nu0.reset();
  g.solver.coupling_g.reset();
  g.profile = grating;
  g.dispersion = dispersion.model();
  g.freqs = frequencies();
  g.calibration = gain.calibration;
  g.coupling_phase = solver.coupling_phase;
  return g;
}

EnsembleOptions RunConfig::ensemble_options() const {
  EnsembleOptions e;
  e.n_pulses = observables.ensemble_size;
  e.efficiency = observables.efficiency;
  e.seed = observables.seed;
  e.bin_width_thz = observables.bin_width_thz;
  e.band_thz = observables.band_thz;
  e.model = observables.model;
  e.workers = workers;
  return e;
}

// Checked here rather than in validate(): only the delay scan depends on it.
std::vector<double> RunConfig::delays_fs() const {
  const auto& o = observables;
  const double dnu = (solver.max_thz - solver.min_thz) / static_cast<double>(solver.count);
  const double alias_fs = 0.5 / (dnu * 1e12) * 1e15;  // pi / dOmega
  require(std::max(std::abs(o.tau_min_fs), std::abs(o.tau_max_fs)) <= alias_fs * (1.0 + 1e-12), "observables.tau_max_fs",
          "delay range exceeds the grid alias limit of " + std::to_string(alias_fs) + " fs");
  if (o.tau_count == 1) return {o.tau_min_fs};
  std::vector<double> t(o.tau_count);
  for (std::size_t k = 0; k < o.tau_count; ++k) {
    t[k] = o.tau_min_fs + (o.tau_max_fs - o.tau_min_fs) * static_cast<double>(k) / static_cast<double>(o.tau_count - 1);
  }
  return t;
}

}  // namespace pdc
