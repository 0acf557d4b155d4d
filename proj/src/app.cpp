#include "pdc/app.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <ostream>

#include "pdc/config.hpp"
#include "pdc/covariance.hpp"
#include "pdc/errors.hpp"
#include "pdc/gainfit.hpp"
#include "pdc/io.hpp"
#include "pdc/sfg.hpp"
#include "pdc/spectrum.hpp"
#include "pdc/units.hpp"

namespace pdc {

using nlohmann::json;

namespace {

struct Artifact {
  std::string name;  // file stem
  CsvTable table;
};

struct Outcome {
  std::vector<Artifact> artifacts;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
};

struct Options {
  std::optional<std::string> config_path;
  std::vector<std::string> overrides;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> workers;
  std::optional<double> power_mw;
  std::optional<double> trajectory_thz;
  std::size_t design_points = 501;
  bool calibrate = false;
  std::string fit_input;
};

std::string format_value(const nlohmann::ordered_json& v) {
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string summary_line(const std::string& command, const nlohmann::ordered_json& summary) {
  std::string line = "command=" + command;
  for (const auto& [k, v] : summary.items()) line += " " + k + "=" + format_value(v);
  return line;
}

std::filesystem::path output_dir(const Options& opt, const RunConfig& cfg) {
  if (opt.out_dir) return *opt.out_dir;
  if (cfg.output_dir) return *cfg.output_dir;
  if (const char* env = std::getenv("PDC_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

SolverConfig solver_for(const RunConfig& cfg, const Options& opt) {
  SolverConfig s = cfg.solver_config();
  if (opt.power_mw) {
    s.nu0.reset();
    s.coupling_g = cfg.gain_setup().coupling(*opt.power_mw);
  }
  return s;
}

BogoliubovField solve_field(const RunConfig& cfg, const Options& opt) {
  return solve_grid(solver_for(cfg, opt), cfg.grating, cfg.dispersion.model(), cfg.frequencies());
}

void describe_coupling(nlohmann::ordered_json& s, const BogoliubovField& field, const RunConfig& cfg, const Options& opt) {
  s["coupling_g"] = std::abs(field.coupling);
  if (opt.power_mw) s["power_mW"] = *opt.power_mw;
  if (field.profile.kind == GratingKind::hyperbolic) {
    s["nu0"] = std::norm(field.coupling) * cfg.grating.length / cfg.grating.k_span();
  }
}

Outcome run_design(const RunConfig& cfg, const Options& opt) {
  if (opt.design_points < 2) throw ConfigError("--points", "need at least 2 points");
  const GratingProfile& g = cfg.grating;
  Artifact a{"design", {{"z_mm", "K_rad_per_mm", "phi_rad"}, {}}};
  for (std::size_t k = 0; k < opt.design_points; ++k) {
    const double z =
        k + 1 == opt.design_points ? g.length : g.length * static_cast<double>(k) / static_cast<double>(opt.design_points - 1);
    a.table.add_row({z, g.k_profile(z), g.phase_integral(z)});
  }
  Outcome o;
  o.summary["K0_rad_per_mm"] = g.k_profile(0.0);
  o.summary["KL_rad_per_mm"] = g.k_profile(g.length);
  o.summary["phiL_rad"] = g.phase_integral(g.length);
  o.summary["span_rad_per_mm"] = g.k_span();
  o.artifacts.push_back(std::move(a));
  return o;
}

Outcome run_spectrum(const RunConfig& cfg, const Options& opt) {
  Outcome o;
  if (opt.trajectory_thz) {
    const SolverConfig s = solver_for(cfg, opt);
    Artifact t{"trajectory", {{"z_mm", "re_A", "im_A", "re_B", "im_B"}, {}}};
    TrajectoryObserver observer = [&](double z, Complex a, Complex b) {
      t.table.add_row({z, a.real(), a.imag(), b.real(), b.imag()});
    };
    solve_one(thz_to_omega(*opt.trajectory_thz), s, cfg.grating, cfg.dispersion.model(), cfg.frequencies(), &observer);
    o.artifacts.push_back(std::move(t));
  }
  const BogoliubovField field = solve_field(cfg, opt);
  const Spectrum spec = spectrum(field);
  Artifact a{"spectrum", {{"detuning_THz", "wavelength_nm", "photons_per_mode"}, {}}};
  const auto thz = spec.detunings_thz();
  const auto nm = spec.wavelengths_nm();
  for (std::size_t k = 0; k < spec.size(); ++k) a.table.add_row({thz[k], nm[k], spec.values[k]});
  const auto peak = static_cast<std::size_t>(std::max_element(spec.values.begin(), spec.values.end()) - spec.values.begin());

  const Spectrum half = spec.signal_half();
  describe_coupling(o.summary, field, cfg, opt);
  o.summary["bandwidth_fwhm_THz"] = bandwidth(half, BandwidthMethod::fwhm_outer);
  o.summary["bandwidth_rms_THz"] = bandwidth(half, BandwidthMethod::rms);
  o.summary["peak_photons_per_mode"] = spec.values[peak];
  o.summary["peak_detuning_THz"] = std::abs(thz[peak]);
  o.summary["max_invariant_deviation"] = field.max_invariant_deviation();
  o.summary["points"] = spec.size();
  o.artifacts.insert(o.artifacts.begin(), std::move(a));
  return o;
}

double log_linear_r2(const GainCurve& c) {
  std::vector<double> x, y;
  for (std::size_t k = 0; k < c.flux.size(); ++k) {
    if (c.flux[k] > 0.0) {
      x.push_back(c.powers_mw[k]);
      y.push_back(std::log(c.flux[k]));
    }
  }
  const auto n = static_cast<double>(x.size());
  if (x.size() < 3) throw NumericalError("too few positive flux values for a log-linear regression");
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) mx += x[k] / n, my += y[k] / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  return syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
}

void add_fits(Outcome& o, const GainCurve& curve, std::size_t fine_points, double target_power) {
  const FitResult ros = fit_model(curve, FitModel::rosenbluth);
  const FitResult hom = fit_model(curve, FitModel::homogeneous);
  Artifact f{"gain_fits", {{"power_mW", "rosenbluth", "homogeneous"}, {}}};
  const double p0 = curve.powers_mw.front(), p1 = curve.powers_mw.back();
  for (std::size_t k = 0; k < fine_points; ++k) {
    const double p = p0 + (p1 - p0) * static_cast<double>(k) / static_cast<double>(fine_points - 1);
    f.table.add_row({p, model_flux(FitModel::rosenbluth, ros.a, ros.b, p), model_flux(FitModel::homogeneous, hom.a, hom.b, p)});
  }
  o.summary["rosenbluth_A"] = ros.a;
  o.summary["rosenbluth_B_per_mW"] = ros.b;
  o.summary["rosenbluth_residual"] = ros.residual_norm;
  o.summary["rosenbluth_physical"] = ros.physical;
  o.summary["homogeneous_A"] = hom.a;
  o.summary["homogeneous_B_per_sqrt_mW"] = hom.b;
  o.summary["homogeneous_residual"] = hom.residual_norm;
  o.summary["homogeneous_physical"] = hom.physical;
  o.summary["G_at_target"] = gain_exponent(ros, target_power);
  o.summary["r2_log_linear"] = log_linear_r2(curve);
  o.artifacts.push_back(std::move(f));
}

Outcome run_gain_scan(RunConfig cfg, const Options& opt) {
  Outcome o;
  if (opt.calibrate) {
    const Calibration cal = calibrate_power_scale(cfg.gain_setup(), cfg.gain.target_exponent, cfg.gain.target_power_mw,
                                                  cfg.gain.powers_mw);
    cfg.gain.calibration = cal.calibration;
    o.summary["calibration_iterations"] = cal.iterations;
    o.summary["mode_THz"] = omega_to_thz(cal.mode_detuning);
    o.summary["mode_fit_A"] = cal.fit.a;
    o.summary["mode_fit_G"] = cal.fitted_exponent;
  }
  o.summary["calibration_mm2_per_mW"] = cfg.gain.calibration;
  const GainCurve curve = simulate_gain_curve(cfg.gain.powers_mw, cfg.gain.band_nm, cfg.gain_setup());
  Artifact a{"gain_curve", {{"power_mW", "flux"}, {}}};
  for (std::size_t k = 0; k < curve.flux.size(); ++k) a.table.add_row({curve.powers_mw[k], curve.flux[k]});
  o.artifacts.push_back(std::move(a));
  add_fits(o, curve, cfg.gain.fit_points, cfg.gain.target_power_mw);
  return o;
}

Outcome run_fit(const RunConfig& cfg, const Options& opt) {
  const CsvTable in = read_csv(opt.fit_input);
  std::size_t pc = 0, fc = 1;
  for (std::size_t k = 0; k < in.header.size(); ++k) {
    if (in.header[k].rfind("power", 0) == 0) pc = k;
    if (in.header[k].rfind("flux", 0) == 0) fc = k;
  }
  if (in.header.size() < 2) throw ConfigError("--input", "need power and flux columns");
  GainCurve curve;
  for (const auto& row : in.rows) {
    curve.powers_mw.push_back(row[pc]);
    curve.flux.push_back(row[fc]);
  }
  try {
    curve.validate();
  } catch (const DomainError& e) {
    throw ConfigError("--input", e.what());
  }
  Outcome o;
  o.summary["points"] = curve.flux.size();
  add_fits(o, curve, cfg.gain.fit_points, cfg.gain.target_power_mw);
  o.artifacts.front().name = "fit";
  return o;
}

Outcome run_covariance(const RunConfig& cfg, const Options& opt) {
  const BogoliubovField field = solve_field(cfg, opt);
  const PulseEnsemble samples = sample_pulse_ensemble(field, cfg.ensemble_options());
  const CovarianceMap map = covariance_map(samples);
  Artifact a{"covariance", {{"signal_THz", "idler_THz", "cov", "mean_s", "mean_i"}, {}}};
  for (std::size_t s = 0; s < map.signal_thz.size(); ++s) {
    for (std::size_t i = 0; i < map.idler_thz.size(); ++i) {
      a.table.add_row({map.signal_thz[s], map.idler_thz[i],
                       map.cov(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)), map.mean_signal[s],
                       map.mean_idler[i]});
    }
  }
  Outcome o;
  describe_coupling(o.summary, field, cfg, opt);
  const ModeRatio r = mode_ratio(map);
  o.summary["R"] = r.value;
  o.summary["R_lower_bound"] = r.lower_bound;
  o.summary["spectral_width_THz"] = r.spectral_width_thz;
  o.summary["correlation_width_THz"] = r.correlation_width_thz;
  o.summary["stripe_fraction"] = stripe_fraction(map);
  o.summary["bins"] = samples.n_bins();
  o.summary["modes_per_bin"] = samples.modes_per_bin;
  o.summary["pulses"] = samples.n_pulses();
  o.summary["seed"] = samples.seed;
  o.artifacts.push_back(std::move(a));
  return o;
}

Outcome run_sfg(const RunConfig& cfg, const Options& opt) {
  const BogoliubovField field = solve_field(cfg, opt);
  const auto delays = cfg.delays_fs();
  const SfgTrace trace = sfg_trace(field, delays, cfg.observables.pulse_fwhm_ps, cfg.workers);
  Artifact a{"sfg", {{"tau_fs", "intensity", "background"}, {}}};
  for (std::size_t k = 0; k < trace.size(); ++k) a.table.add_row({trace.delays_fs[k], trace.intensity[k], trace.background[k]});

  Outcome o;
  describe_coupling(o.summary, field, cfg, opt);
  const PeakMetrics m = peak_metrics(trace);
  o.summary["fwhm_fs"] = m.fwhm_fs;
  o.summary["asymmetry"] = m.asymmetry;
  o.summary["peak_delay_fs"] = m.peak_delay_fs;
  o.summary["peak_to_background"] = m.peak_to_background;
  const double edge = std::max(trace.coherent.front(), trace.coherent.back());
  o.summary["edge_fraction"] = edge / m.peak_value;
  o.artifacts.push_back(std::move(a));
  return o;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"High-gain parametric down-conversion simulator for chirped-poled crystals", "pdcsim"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  std::string config_path;
  std::size_t workers = 0;
  app.add_option("-c,--config", config_path, "JSON run config (comments allowed); built-in defaults when omitted");
  app.add_option("--set", opt.overrides, "override a config value, e.g. --set solver.nu0=1.0")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("-o,--out", opt.out_dir, "output directory");
  auto* workers_opt = app.add_option("-j,--workers", workers, "worker threads (0: all cores)");

  auto* design = app.add_subcommand("design", "dump K(z) and phi(z)");
  design->add_option("--points", opt.design_points, "number of z samples");
  auto* spec = app.add_subcommand("spectrum", "photons per mode |B|^2 over the detuning grid");
  spec->add_option("--trajectory-THz", opt.trajectory_thz, "also dump A(z), B(z) at this detuning");
  auto* gain = app.add_subcommand("gain-scan", "band flux vs pump power with both fits");
  gain->add_flag("--calibrate", opt.calibrate, "fit the power calibration to the target exponent first");
  auto* cov = app.add_subcommand("covariance", "Monte-Carlo photon-number covariance map");
  auto* sfg = app.add_subcommand("sfg", "sum-frequency cross-correlation trace");
  auto* fit = app.add_subcommand("fit", "fit both gain models to a (power, flux) CSV");
  fit->add_option("-i,--input", opt.fit_input, "CSV with power_mW and flux columns")->required();
  for (auto* sub : {spec, cov, sfg}) {
    sub->add_option("--power", opt.power_mw, "pump power in mW; sets |g|^2 = c P from the gain calibration");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (!config_path.empty()) opt.config_path = config_path;
  if (workers_opt->count() > 0) opt.workers = workers;

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  try {
    RunConfig cfg = opt.config_path ? RunConfig::load(*opt.config_path, opt.overrides)
                                    : RunConfig::defaults_with(opt.overrides);
    if (opt.workers) cfg.workers = *opt.workers;
    if (opt.power_mw && *opt.power_mw < 0.0) throw ConfigError("--power", "must be >= 0");

    Outcome result;
    if (command == "design") result = run_design(cfg, opt);
    if (command == "spectrum") result = run_spectrum(cfg, opt);
    if (command == "gain-scan") result = run_gain_scan(cfg, opt);
    if (command == "covariance") result = run_covariance(cfg, opt);
    if (command == "sfg") result = run_sfg(cfg, opt);
    if (command == "fit") result = run_fit(cfg, opt);

    // Everything is computed before the first byte is written.
    const std::filesystem::path dir = output_dir(opt, cfg);
    json config = cfg.to_json();
    for (const auto& a : result.artifacts) {
      json side = make_sidecar(command, config, json::parse(result.summary.dump()));
      side["seed"] = cfg.observables.seed;
      side["ensemble_size"] = cfg.observables.ensemble_size;
      side["artifact"] = a.name + ".csv";
      side["columns"] = a.table.header;
      write_file_atomic(dir / (a.name + ".csv"), a.table.render());
      write_file_atomic(dir / (a.name + ".json"), side.dump(2) + "\n");
    }
    out << summary_line(command, result.summary) << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const RangeError& e) {
    err << "range error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace pdc
