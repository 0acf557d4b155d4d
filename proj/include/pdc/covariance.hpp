#ifndef PDC_COVARIANCE_HPP
#define PDC_COVARIANCE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "pdc/bogoliubov.hpp"

namespace pdc {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class EnsembleModel {
  // Each conjugate pair (Omega, -Omega) is a two-mode squeezed vacuum with
  // mean occupation |B|^2: equal signal/idler counts drawn from the thermal
  // (geometric) distribution, then binomially thinned per detector.
  photon_counting,
  // Symmetric-ordering phase-space sampling: vacuum amplitudes a1, a2 with
  // <|a|^2> = 1/2 mapped through b1 = A a1 + B a2*, b2 = A a2 + B a1*,
  // loss mixed in with fresh vacuum, N = |b|^2 - 1/2. Reproduces means and
  // cross-covariances exactly; single-mode variances carry a +1/4 bias.
  phase_space,
};

std::string_view to_string(EnsembleModel model);
EnsembleModel ensemble_model_from_string(std::string_view name);

struct EnsembleOptions {
  std::size_t n_pulses = 3000;
  double efficiency = 1.0;
  std::uint64_t seed = 1;
  double bin_width_thz = 0.15;  // multiple of the grid spacing
  std::optional<std::pair<double, double>> band_thz;  // detuning band for the bins
  EnsembleModel model = EnsembleModel::photon_counting;
  std::size_t workers = 0;
};

// Per-pulse photon numbers summed into spectrometer bins. Signal bin k holds
// detunings Omega in [lo_k, hi_k); idler bin k holds the conjugate band
// -Omega, so bin k of each arm is the partner of the other.
struct PulseEnsemble {
  RowMatrix signal;  // n_pulses x n_bins
  RowMatrix idler;
  std::vector<double> signal_thz;  // optical frequency of bin centres
  std::vector<double> idler_thz;
  std::vector<double> detuning_edges_thz;  // n_bins + 1 edges on the Omega > 0 side
  double bin_width_thz = 0.0;
  std::size_t modes_per_bin = 0;
  double efficiency = 1.0;
  std::uint64_t seed = 0;
  EnsembleModel model = EnsembleModel::photon_counting;

  std::size_t n_pulses() const { return static_cast<std::size_t>(signal.rows()); }
  std::size_t n_bins() const { return static_cast<std::size_t>(signal.cols()); }
};

// Draws n_pulses independent single-pulse spectra. Pulse p uses an RNG
// stream derived from (seed, p) only, so the result is independent of the
// worker count.
PulseEnsemble sample_pulse_ensemble(const BogoliubovField& field, const EnsembleOptions& options);

// Cov(w_s, w_i) = <N(w_s) N(w_i)> - <N(w_s)><N(w_i)> over the ensemble.
struct CovarianceMap {
  std::vector<double> signal_thz;
  std::vector<double> idler_thz;
  Eigen::MatrixXd cov;  // signal bins x idler bins
  std::vector<double> mean_signal;
  std::vector<double> mean_idler;
  std::vector<double> signal_variance;  // diagonal of the signal-signal block
  std::size_t ensemble_size = 0;
  double detection_efficiency = 1.0;
  double bin_width_thz = 0.0;
};

CovarianceMap covariance_map(const PulseEnsemble& samples);

struct ModeRatio {
  double value = 0.0;               // R = spectral width / correlation width
  double spectral_width_thz = 0.0;  // outer FWHM of the mean signal spectrum
  double correlation_width_thz = 0.0;
  bool lower_bound = false;  // correlation width saturated at one bin
  std::size_t peak_signal_bin = 0;
};

// The correlation width is read along the idler axis at the signal bin with
// the largest mean photon number.
ModeRatio mode_ratio(const CovarianceMap& map);

// Share of the summed covariance lying within `half_width` bins of the
// conjugate diagonal w_s + w_i = w_p.
double stripe_fraction(const CovarianceMap& map, std::size_t half_width = 1);

// Bootstrap standard error of Cov(signal bin, idler bin).
double bootstrap_covariance_se(const PulseEnsemble& samples, std::size_t signal_bin,
                               std::size_t idler_bin, std::size_t resamples, std::uint64_t seed);

// Pearson correlation between a signal bin and an idler bin.
double pearson_correlation(const PulseEnsemble& samples, std::size_t signal_bin, std::size_t idler_bin);

}  // namespace pdc

#endif  // PDC_COVARIANCE_HPP
