#include "pdc/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "pdc/errors.hpp"
#include "pdc/parallel.hpp"
#include "pdc/spectrum.hpp"
#include "pdc/units.hpp"

namespace pdc {

std::string_view to_string(EnsembleModel model) {
  return model == EnsembleModel::photon_counting ? "photon_counting" : "phase_space";
}

EnsembleModel ensemble_model_from_string(std::string_view name) {
  if (name == "photon_counting") return EnsembleModel::photon_counting;
  if (name == "phase_space") return EnsembleModel::phase_space;
  throw DomainError("unknown ensemble model '" + std::string(name) + "'");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

struct ConjugatePair {
  std::size_t signal;  // index of +Omega in the field
  std::size_t idler;   // index of -Omega
};

struct BinLayout {
  std::vector<std::vector<ConjugatePair>> bins;
  std::vector<double> edges_thz;
  std::size_t modes_per_bin = 0;
};

BinLayout layout_bins(const BogoliubovField& field, const EnsembleOptions& opt) {
  std::vector<std::size_t> positive;
  for (std::size_t j = 0; j < field.size(); ++j) {
    if (field.detunings[j] > 0.0) positive.push_back(j);
  }
  if (positive.empty()) throw DomainError("ensemble sampling needs positive detunings");
  std::sort(positive.begin(), positive.end(),
            [&](std::size_t a, std::size_t b) { return field.detunings[a] < field.detunings[b]; });

  const double spacing = positive.size() > 1
                             ? field.detunings[positive[1]] - field.detunings[positive[0]]
                             : 2.0 * field.detunings[positive[0]];
  for (std::size_t k = 1; k < positive.size(); ++k) {
    const double d = field.detunings[positive[k]] - field.detunings[positive[k - 1]];
    if (std::abs(d - spacing) > 1e-6 * spacing) throw DomainError("ensemble sampling needs a uniform grid");
  }

  // Conjugate partners.
  std::vector<ConjugatePair> pairs;
  pairs.reserve(positive.size());
  for (std::size_t j : positive) {
    const double target = -field.detunings[j];
    std::size_t best = field.size();
    for (std::size_t k = 0; k < field.size(); ++k) {
      if (std::abs(field.detunings[k] - target) <= 1e-9 * std::abs(target)) {
        best = k;
        break;
      }
    }
    if (best == field.size()) {
      throw DomainError("asymmetric grid: no conjugate for Omega/2pi = " +
                        std::to_string(omega_to_thz(field.detunings[j])) + " THz");
    }
    const double bs = std::abs(field.B[j]), bi = std::abs(field.B[best]);
    if (std::abs(bs - bi) > 1e-6 * std::max({bs, bi, 1e-3})) {
      throw NumericalError("|B(Omega)| and |B(-Omega)| disagree at Omega/2pi = " +
                           std::to_string(omega_to_thz(field.detunings[j])) + " THz");
    }
    pairs.push_back({j, best});
  }

  const double spacing_thz = omega_to_thz(spacing);
  const double ratio = opt.bin_width_thz / spacing_thz;
  const auto modes = static_cast<std::size_t>(std::llround(ratio));
  if (modes == 0 || std::abs(ratio - static_cast<double>(modes)) > 1e-6 * ratio) {
    throw DomainError("bin width " + std::to_string(opt.bin_width_thz) +
                      " THz is not a whole multiple of the grid spacing " + std::to_string(spacing_thz) + " THz");
  }

  const double half_cell = 0.5 * spacing_thz;
  const double band_lo = opt.band_thz ? opt.band_thz->first : -1.0;
  const double band_hi = opt.band_thz ? opt.band_thz->second : 1e300;
  const double eps = 1e-9 * spacing_thz;

  BinLayout layout;
  layout.modes_per_bin = modes;
  std::size_t k = 0;
  while (k < pairs.size() && omega_to_thz(field.detunings[pairs[k].signal]) - half_cell < band_lo - eps) ++k;
  for (; k + modes <= pairs.size(); k += modes) {
    const double lo = omega_to_thz(field.detunings[pairs[k].signal]) - half_cell;
    const double hi = omega_to_thz(field.detunings[pairs[k + modes - 1].signal]) + half_cell;
    if (hi > band_hi + eps) break;
    if (layout.edges_thz.empty()) layout.edges_thz.push_back(lo);
    layout.edges_thz.push_back(hi);
    layout.bins.emplace_back(pairs.begin() + static_cast<std::ptrdiff_t>(k),
                             pairs.begin() + static_cast<std::ptrdiff_t>(k + modes));
  }
  if (layout.bins.empty()) throw DomainError("no complete spectrometer bin inside the requested band");
  return layout;
}

std::uint64_t thin(std::uint64_t n, double efficiency, std::mt19937_64& rng) {
  if (efficiency >= 1.0 || n == 0) return n;
  if (efficiency <= 0.0) return 0;
  std::binomial_distribution<std::uint64_t> dist(n, efficiency);
  return dist(rng);
}

// Thermal photon number with mean nbar via inversion of P(n >= k) = q^k.
std::uint64_t thermal_count(double nbar, std::mt19937_64& rng) {
  if (!(nbar > 0.0)) return 0;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double u = 1.0 - uni(rng);  // (0, 1]
  const double log_q = -std::log1p(1.0 / nbar);
  return static_cast<std::uint64_t>(std::floor(std::log(u) / log_q));
}

}  // namespace

PulseEnsemble sample_pulse_ensemble(const BogoliubovField& field, const EnsembleOptions& opt) {
  if (opt.n_pulses < 2) throw DomainError("at least 2 pulses are needed for a covariance");
  if (!(opt.efficiency >= 0.0 && opt.efficiency <= 1.0)) throw DomainError("efficiency must lie in [0, 1]");
  const BinLayout layout = layout_bins(field, opt);
  const std::size_t n_bins = layout.bins.size();

  PulseEnsemble out;
  out.signal = RowMatrix::Zero(static_cast<Eigen::Index>(opt.n_pulses), static_cast<Eigen::Index>(n_bins));
  out.idler = out.signal;
  out.detuning_edges_thz = layout.edges_thz;
  out.bin_width_thz = opt.bin_width_thz;
  out.modes_per_bin = layout.modes_per_bin;
  out.efficiency = opt.efficiency;
  out.seed = opt.seed;
  out.model = opt.model;
  const double f0 = omega_to_thz(field.freqs.omega0);
  for (std::size_t b = 0; b < n_bins; ++b) {
    const double centre = 0.5 * (layout.edges_thz[b] + layout.edges_thz[b + 1]);
    out.signal_thz.push_back(f0 + centre);
    out.idler_thz.push_back(f0 - centre);
  }

  const double eta = opt.efficiency;
  parallel_for(opt.n_pulses, opt.workers, [&](std::size_t p) {
    auto rng = stream(opt.seed, p);
    const auto row = static_cast<Eigen::Index>(p);
    if (opt.model == EnsembleModel::photon_counting) {
      for (std::size_t b = 0; b < n_bins; ++b) {
        double ns = 0.0, ni = 0.0;
        for (const auto& pair : layout.bins[b]) {
          const std::uint64_t n = thermal_count(std::norm(field.B[pair.signal]), rng);
          ns += static_cast<double>(thin(n, eta, rng));
          ni += static_cast<double>(thin(n, eta, rng));
        }
        out.signal(row, static_cast<Eigen::Index>(b)) = ns;
        out.idler(row, static_cast<Eigen::Index>(b)) = ni;
      }
    } else {
      std::normal_distribution<double> quad(0.0, 0.5);  // <|a|^2> = 1/2
      auto vacuum = [&] { return Complex(quad(rng), quad(rng)); };
      const double keep = std::sqrt(eta), lose = std::sqrt(1.0 - eta);
      for (std::size_t b = 0; b < n_bins; ++b) {
        double ns = 0.0, ni = 0.0;
        for (const auto& pair : layout.bins[b]) {
          const Complex a1 = vacuum(), a2 = vacuum();
          const Complex b1 = field.A[pair.signal] * a1 + field.B[pair.signal] * std::conj(a2);
          const Complex b2 = field.A[pair.idler] * a2 + field.B[pair.idler] * std::conj(a1);
          const Complex d1 = keep * b1 + lose * vacuum();
          const Complex d2 = keep * b2 + lose * vacuum();
          ns += std::norm(d1) - 0.5;
          ni += std::norm(d2) - 0.5;
        }
        out.signal(row, static_cast<Eigen::Index>(b)) = ns;
        out.idler(row, static_cast<Eigen::Index>(b)) = ni;
      }
    }
  });
  return out;
}

CovarianceMap covariance_map(const PulseEnsemble& samples) {
  const auto n = static_cast<double>(samples.n_pulses());
  if (samples.n_pulses() < 2) throw DomainError("at least 2 pulses are needed for a covariance");
  const Eigen::RowVectorXd mean_s = samples.signal.colwise().mean();
  const Eigen::RowVectorXd mean_i = samples.idler.colwise().mean();
  const Eigen::MatrixXd cs = samples.signal.rowwise() - mean_s;
  const Eigen::MatrixXd ci = samples.idler.rowwise() - mean_i;

  CovarianceMap map;
  map.cov = cs.transpose() * ci / (n - 1.0);
  map.signal_thz = samples.signal_thz;
  map.idler_thz = samples.idler_thz;
  map.mean_signal.assign(mean_s.data(), mean_s.data() + mean_s.size());
  map.mean_idler.assign(mean_i.data(), mean_i.data() + mean_i.size());
  const Eigen::RowVectorXd var_s = cs.array().square().colwise().sum() / (n - 1.0);
  map.signal_variance.assign(var_s.data(), var_s.data() + var_s.size());
  map.ensemble_size = samples.n_pulses();
  map.detection_efficiency = samples.efficiency;
  map.bin_width_thz = samples.bin_width_thz;
  return map;
}

ModeRatio mode_ratio(const CovarianceMap& map) {
  const std::size_t n = map.mean_signal.size();
  if (n == 0) throw DomainError("empty covariance map");
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = static_cast<double>(k) * map.bin_width_thz;

  ModeRatio r;
  r.spectral_width_thz = outer_half_max_width(x, map.mean_signal);
  r.peak_signal_bin = static_cast<std::size_t>(
      std::max_element(map.mean_signal.begin(), map.mean_signal.end()) - map.mean_signal.begin());

  std::vector<double> section(n);
  for (std::size_t k = 0; k < n; ++k) {
    section[k] = map.cov(static_cast<Eigen::Index>(r.peak_signal_bin), static_cast<Eigen::Index>(k));
  }
  const auto peak_it = std::max_element(section.begin(), section.end());
  const double peak = *peak_it;
  if (!(peak > 0.0)) throw NumericalError("covariance cross-section has no positive peak");
  const auto centre = static_cast<std::size_t>(peak_it - section.begin());
  std::size_t lo = centre, hi = centre;
  while (lo > 0 && section[lo - 1] >= 0.5 * peak) --lo;
  while (hi + 1 < n && section[hi + 1] >= 0.5 * peak) ++hi;

  if (hi == lo) {
    r.correlation_width_thz = map.bin_width_thz;
    r.lower_bound = true;
  } else {
    std::vector<double> local(section.begin() + static_cast<std::ptrdiff_t>(lo == 0 ? 0 : lo - 1),
                              section.begin() + static_cast<std::ptrdiff_t>(std::min(n, hi + 2)));
    std::vector<double> lx(local.size());
    for (std::size_t k = 0; k < lx.size(); ++k) lx[k] = static_cast<double>(k) * map.bin_width_thz;
    r.correlation_width_thz = outer_half_max_width(lx, local);
  }
  r.value = r.spectral_width_thz / r.correlation_width_thz;
  return r;
}

double stripe_fraction(const CovarianceMap& map, std::size_t half_width) {
  double stripe = 0.0, total = 0.0;
  for (Eigen::Index s = 0; s < map.cov.rows(); ++s) {
    for (Eigen::Index i = 0; i < map.cov.cols(); ++i) {
      const double c = map.cov(s, i);
      total += c;
      if (static_cast<std::size_t>(std::abs(s - i)) <= half_width) stripe += c;
    }
  }
  if (!(total > 0.0)) throw NumericalError("covariance map has no positive mass");
  return stripe / total;
}

namespace {
double column_covariance(const RowMatrix& a, std::size_t ca, const RowMatrix& b, std::size_t cb,
                         const std::vector<std::size_t>& rows) {
  const auto n = static_cast<double>(rows.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t r : rows) {
    ma += a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(ca));
    mb += b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cb));
  }
  ma /= n;
  mb /= n;
  double acc = 0.0;
  for (std::size_t r : rows) {
    acc += (a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(ca)) - ma) *
           (b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cb)) - mb);
  }
  return acc / (n - 1.0);
}
}  // namespace

double bootstrap_covariance_se(const PulseEnsemble& samples, std::size_t signal_bin,
                               std::size_t idler_bin, std::size_t resamples, std::uint64_t seed) {
  if (resamples < 2) throw DomainError("bootstrap needs at least 2 resamples");
  const std::size_t n = samples.n_pulses();
  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> rows(n);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& r : rows) r = pick(rng);
    const double c = column_covariance(samples.signal, signal_bin, samples.idler, idler_bin, rows);
    sum += c;
    sum2 += c * c;
  }
  const auto m = static_cast<double>(resamples);
  const double mean = sum / m;
  return std::sqrt(std::max(0.0, (sum2 - m * mean * mean) / (m - 1.0)));
}

double pearson_correlation(const PulseEnsemble& samples, std::size_t signal_bin, std::size_t idler_bin) {
  std::vector<std::size_t> rows(samples.n_pulses());
  for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
  const double cov = column_covariance(samples.signal, signal_bin, samples.idler, idler_bin, rows);
  const double vs = column_covariance(samples.signal, signal_bin, samples.signal, signal_bin, rows);
  const double vi = column_covariance(samples.idler, idler_bin, samples.idler, idler_bin, rows);
  if (!(vs > 0.0 && vi > 0.0)) throw NumericalError("correlation undefined for a constant bin");
  return cov / std::sqrt(vs * vi);
}

}  // namespace pdc
