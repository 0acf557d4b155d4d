#ifndef PDC_CONFIG_HPP
#define PDC_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pdc/bogoliubov.hpp"
#include "pdc/covariance.hpp"
#include "pdc/dispersion.hpp"
#include "pdc/gainfit.hpp"
#include "pdc/grating.hpp"

namespace pdc {

struct DispersionSection {
  std::string formula = DispersionModel::kGayerMgoCln;
  std::string citation = "O. Gayer et al., Appl. Phys. B 91, 343 (2008)";
  std::vector<double> coefficients = DispersionModel::gayer_coefficients();
  double temperature_k = 298.15;
  std::pair<double, double> valid_um{0.5, 4.0};

  DispersionModel model() const;
};

struct SolverSection {
  std::optional<double> nu0 = 0.1;
  std::optional<double> coupling_g;  // |g| in mm^-1
  double coupling_phase = 0.0;       // rad
  double min_thz = 60.0;
  double max_thz = 160.0;
  std::size_t count = 2000;
  bool mirrored = true;
  Integrator integrator = Integrator::magnus6;
  double rtol = 1e-7;
  double atol = 1e-9;
  std::optional<double> max_step_mm;
};

struct ObservablesSection {
  double bin_width_thz = 0.15;
  std::optional<std::pair<double, double>> band_thz;
  double efficiency = 1.0;
  std::size_t ensemble_size = 3000;
  std::uint64_t seed = 1;
  EnsembleModel model = EnsembleModel::photon_counting;
  double tau_min_fs = -3000.0;
  double tau_max_fs = 3000.0;
  std::size_t tau_count = 1201;
  double pulse_fwhm_ps = 18.0;
  std::size_t fft_padding = 4;
};

struct GainSection {
  std::vector<double> powers_mw;  // default: 10 points over the G in [5, 18] window
  std::pair<double, double> band_nm{1597.5, 1602.5};
  double calibration = 2.30474;  // mm^-2 per mW; G = 18 at 15 mW
  double target_exponent = 18.0;
  double target_power_mw = 15.0;
  std::size_t fit_points = 200;
};

// Fully validated run configuration.
struct RunConfig {
  DispersionSection dispersion;
  double pump_wavelength_nm = 532.0;
  GratingProfile grating;
  SolverSection solver;
  ObservablesSection observables;
  GainSection gain;
  std::optional<std::string> output_dir;
  std::size_t workers = 0;

  RunConfig();

  // Parses a config object; unknown keys and bad values raise ConfigError
  // carrying the field path (e.g. "solver.grid.count").
  static RunConfig from_json(const nlohmann::json& j);
  // Reads a JSON file (comments allowed) and applies "a.b.c=value" overrides.
  static RunConfig load(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
  static RunConfig defaults_with(const std::vector<std::string>& overrides);

  nlohmann::json to_json() const;
  void validate() const;

  InteractionFrequencies frequencies() const;
  SpectralGrid grid() const;
  SolverConfig solver_config() const;
  GainSetup gain_setup() const;
  EnsembleOptions ensemble_options() const;
  std::vector<double> delays_fs() const;
};

// Sets the value at a dotted path; the value is parsed as JSON when
// possible and kept as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

}  // namespace pdc

#endif  // PDC_CONFIG_HPP
