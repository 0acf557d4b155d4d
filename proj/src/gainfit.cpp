#include "pdc/gainfit.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "pdc/units.hpp"

namespace pdc {

void GainCurve::validate() const {
  if (powers_mw.size() != flux.size()) throw DomainError("gain curve: powers and flux differ in length");
  for (std::size_t k = 0; k < powers_mw.size(); ++k) {
    if (!std::isfinite(powers_mw[k]) || powers_mw[k] < 0.0) throw DomainError("gain curve: powers must be >= 0");
    if (k > 0 && !(powers_mw[k] > powers_mw[k - 1])) throw DomainError("gain curve: powers must increase strictly");
    if (!std::isfinite(flux[k]) || flux[k] < 0.0) throw DomainError("gain curve: flux must be finite and >= 0");
  }
}

std::string_view to_string(FitModel model) {
  return model == FitModel::rosenbluth ? "rosenbluth" : "homogeneous";
}

FitModel fit_model_from_string(std::string_view name) {
  if (name == "rosenbluth") return FitModel::rosenbluth;
  if (name == "homogeneous") return FitModel::homogeneous;
  throw DomainError("unknown fit model '" + std::string(name) + "'");
}

namespace {

// ln(e^x - 1) and ln(sinh x) for x > 0
double log_expm1(double x) { return x > 30.0 ? x + std::log1p(-std::exp(-x)) : std::log(std::expm1(x)); }
double log_sinh(double x) {
  return x > 30.0 ? x - std::log(2.0) + std::log1p(-std::exp(-2.0 * x)) : std::log(std::sinh(x));
}

struct Problem {
  FitModel model;
  std::vector<double> p;
  std::vector<double> log_flux;
};

Problem make_problem(const GainCurve& curve, FitModel model) {
  curve.validate();
  Problem pr{model, {}, {}};
  for (std::size_t k = 0; k < curve.powers_mw.size(); ++k) {
    if (curve.flux[k] > 0.0 && curve.powers_mw[k] > 0.0) {
      pr.p.push_back(curve.powers_mw[k]);
      pr.log_flux.push_back(std::log(curve.flux[k]));
    }
  }
  if (pr.p.size() < 4) throw DomainError("fit needs at least 4 points with positive power and flux");
  return pr;
}

double sum_squares(const Problem& pr, double ln_a, double ln_b) {
  const double a = std::exp(ln_a), b = std::exp(ln_b);
  double s = 0.0;
  for (std::size_t k = 0; k < pr.p.size(); ++k) {
    const double r = model_log_flux(pr.model, a, b, pr.p[k]) - pr.log_flux[k];
    s += r * r;
  }
  return std::isfinite(s) ? s : std::numeric_limits<double>::max();
}

double gsl_objective(const gsl_vector* x, void* params) {
  return sum_squares(*static_cast<const Problem*>(params), gsl_vector_get(x, 0), gsl_vector_get(x, 1));
}

struct Simplex {
  double ln_a, ln_b, value;
  std::size_t iterations;
  bool converged;
};

Simplex run_simplex(const Problem& pr, double ln_a, double ln_b, const FitOptions& opt) {
  using Minimizer = std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)>;
  using Vector = std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)>;
  Minimizer s(gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2), &gsl_multimin_fminimizer_free);
  Vector x(gsl_vector_alloc(2), &gsl_vector_free);
  Vector step(gsl_vector_alloc(2), &gsl_vector_free);
  gsl_vector_set(x.get(), 0, ln_a);
  gsl_vector_set(x.get(), 1, ln_b);
  gsl_vector_set_all(step.get(), 0.5);
  gsl_multimin_function fn{&gsl_objective, 2, const_cast<Problem*>(&pr)};
  gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), step.get());

  Simplex out{ln_a, ln_b, std::numeric_limits<double>::max(), 0, false};
  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    out.iterations = it;
    if (const int status = gsl_multimin_fminimizer_iterate(s.get()); status != GSL_SUCCESS) {
      // no further progress possible: accept only a simplex that has already collapsed
      out.converged = status == GSL_ENOPROG && gsl_multimin_fminimizer_size(s.get()) <= 1e-6;
      break;
    }
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), opt.tolerance) == GSL_SUCCESS) {
      out.converged = true;
      break;
    }
  }
  out.ln_a = gsl_vector_get(s->x, 0);
  out.ln_b = gsl_vector_get(s->x, 1);
  out.value = s->fval;
  return out;
}

FitResult finish(const Problem& pr, const Simplex& best) {
  FitResult r;
  r.model = pr.model;
  r.a = std::exp(best.ln_a);
  r.b = std::exp(best.ln_b);
  r.iterations = best.iterations;
  const auto n = static_cast<double>(pr.p.size());
  r.residual_norm = std::sqrt(best.value / n);
  r.physical = r.a >= 0.01 && r.a <= 100.0;

  // Jacobian of the log residuals in (A, B)
  Eigen::MatrixXd j(pr.p.size(), 2);
  for (std::size_t k = 0; k < pr.p.size(); ++k) {
    const double p = pr.p[k];
    const auto row = static_cast<Eigen::Index>(k);
    j(row, 0) = 1.0 / r.a;
    if (pr.model == FitModel::rosenbluth) {
      j(row, 1) = p / -std::expm1(-r.b * p);
    } else {
      j(row, 1) = 2.0 * std::sqrt(p) / std::tanh(r.b * std::sqrt(p));
    }
  }
  const double s2 = n > 2.0 ? best.value / (n - 2.0) : 0.0;
  const Eigen::Matrix2d jtj = j.transpose() * j;
  Eigen::FullPivLU<Eigen::Matrix2d> lu(jtj);
  if (lu.isInvertible()) {
    r.covariance = s2 * lu.inverse();
  } else {
    r.covariance.setConstant(std::numeric_limits<double>::infinity());
  }
  return r;
}

// gsl's default handler aborts; errors are reported through return codes here.
struct GslHandlerGuard {
  gsl_error_handler_t* previous = gsl_set_error_handler_off();
  ~GslHandlerGuard() { gsl_set_error_handler(previous); }
};

FitResult minimise(const Problem& pr, const std::vector<std::pair<double, double>>& starts, const FitOptions& opt) {
  GslHandlerGuard guard;
  Simplex best{0.0, 0.0, std::numeric_limits<double>::max(), 0, false};
  for (const auto& [la, lb] : starts) {
    Simplex s = run_simplex(pr, la, lb, opt);
    if (s.converged) s = run_simplex(pr, s.ln_a, s.ln_b, opt);  // restart to escape a collapsed simplex
    if (s.value < best.value) best = s;
  }
  // a slow valley can exhaust the iteration budget; continue from the best point
  for (int k = 0; k < 3 && !best.converged && std::isfinite(best.value); ++k) {
    const std::size_t used = best.iterations;
    const Simplex s = run_simplex(pr, best.ln_a, best.ln_b, opt);
    if (s.value <= best.value) best = s;
    best.iterations += used;
  }
  FitResult r = finish(pr, best);
  if (!best.converged || !std::isfinite(best.value)) {
    throw FitError(std::string(to_string(pr.model)) + " fit did not converge in " +
                       std::to_string(opt.max_iterations) + " iterations",
                   r);
  }
  return r;
}

}  // namespace

double model_log_flux(FitModel model, double a, double b, double power) {
  if (power <= 0.0 || b <= 0.0 || a <= 0.0) return -std::numeric_limits<double>::infinity();
  if (model == FitModel::rosenbluth) return std::log(a) + log_expm1(b * power);
  return std::log(a) + 2.0 * log_sinh(b * std::sqrt(power));
}

double model_flux(FitModel model, double a, double b, double power) {
  if (power <= 0.0) return 0.0;
  if (model == FitModel::rosenbluth) return a * std::expm1(b * power);
  const double s = std::sinh(b * std::sqrt(power));
  return a * s * s;
}

FitResult fit_model(const GainCurve& curve, FitModel model, const FitOptions& options) {
  const Problem pr = make_problem(curve, model);
  // initial rate from the end-to-end log slope
  const double dlog = pr.log_flux.back() - pr.log_flux.front();
  double scale = model == FitModel::rosenbluth ? dlog / (pr.p.back() - pr.p.front())
                                               : dlog / (2.0 * (std::sqrt(pr.p.back()) - std::sqrt(pr.p.front())));
  if (!(scale > 0.0)) scale = model == FitModel::rosenbluth ? 1.0 / pr.p.back() : 1.0 / std::sqrt(pr.p.back());
  std::vector<std::pair<double, double>> starts;
  for (double la : {-12.0, -6.0, -2.0, 0.0, 3.0}) {
    for (double m : {0.25, 0.5, 1.0, 2.0, 4.0}) starts.emplace_back(la, std::log(scale * m));
  }
  return minimise(pr, starts, options);
}

FitResult refine_fit(const GainCurve& curve, const FitResult& start, const FitOptions& options) {
  const Problem pr = make_problem(curve, start.model);
  if (!(start.a > 0.0 && start.b > 0.0)) throw DomainError("refine_fit needs positive starting parameters");
  return minimise(pr, {{std::log(start.a), std::log(start.b)}}, options);
}

double gain_exponent(const FitResult& fit, double power_mw) {
  if (fit.model != FitModel::rosenbluth) throw DomainError("gain exponent G = B P is defined for the rosenbluth model only");
  return fit.b * power_mw;
}

Complex GainSetup::coupling(double power_mw) const {
  if (!(calibration > 0.0)) throw DomainError("gain calibration c must be > 0");
  if (power_mw < 0.0) throw DomainError("pump power must be >= 0");
  return std::polar(std::sqrt(calibration * power_mw), coupling_phase);
}

std::vector<double> band_detunings(const SpectralGrid& grid, const InteractionFrequencies& freqs,
                                   std::pair<double, double> band_nm) {
  const auto [lo, hi] = std::minmax(band_nm.first, band_nm.second);
  std::vector<double> out;
  for (double d : grid.detunings()) {
    const double nm = wavelength_nm_from_omega(freqs.omega0 + d);
    if (nm >= lo && nm <= hi) out.push_back(d);
  }
  if (out.empty()) {
    throw DomainError("band " + std::to_string(lo) + "-" + std::to_string(hi) + " nm lies outside the detuning grid");
  }
  return out;
}

GainCurve simulate_gain_curve(const std::vector<double>& powers_mw, std::pair<double, double> band_nm,
                              const GainSetup& setup) {
  setup.solver.grid.validate();
  const std::vector<double> detunings = band_detunings(setup.solver.grid, setup.freqs, band_nm);
  const double dnu = omega_to_thz(setup.solver.grid.spacing());

  GainCurve curve;
  curve.band_nm = band_nm;
  for (double p : powers_mw) {
    SolverConfig cfg = setup.solver;
    cfg.nu0.reset();
    cfg.coupling_g = setup.coupling(p);
    double flux = 0.0;
    if (p > 0.0) {
      const BogoliubovField field = solve_detunings(detunings, cfg, setup.profile, setup.dispersion, setup.freqs);
      for (const Complex& b : field.B) flux += std::norm(b) * dnu;
    }
    curve.powers_mw.push_back(p);
    curve.flux.push_back(flux);
  }
  curve.validate();
  return curve;
}

double PeakOccupation::exponent() const { return std::log1p(photons); }

PeakOccupation peak_occupation(const GainSetup& setup, double power_mw, std::size_t coarse_points) {
  setup.solver.grid.validate();
  if (coarse_points < 3) throw DomainError("peak search needs at least 3 coarse points");
  SolverConfig cfg = setup.solver;
  cfg.nu0.reset();
  cfg.coupling_g = setup.coupling(power_mw);
  const double lo = std::max(setup.solver.grid.min_omega, 1e-9 * setup.solver.grid.max_omega);
  const double hi = setup.solver.grid.max_omega;
  const double step = (hi - lo) / static_cast<double>(coarse_points - 1);

  std::vector<double> coarse(coarse_points);
  for (std::size_t k = 0; k < coarse_points; ++k) coarse[k] = lo + step * static_cast<double>(k);
  const BogoliubovField field = solve_detunings(coarse, cfg, setup.profile, setup.dispersion, setup.freqs);
  std::size_t best = 0;
  for (std::size_t k = 1; k < field.size(); ++k) {
    if (std::norm(field.B[k]) > std::norm(field.B[best])) best = k;
  }

  auto neg_occupation = [&](double d) {
    return -std::norm(solve_one(d, cfg, setup.profile, setup.dispersion, setup.freqs).B);
  };
  const double a = std::max(lo, coarse[best] - step), b = std::min(hi, coarse[best] + step);
  std::uintmax_t iterations = 60;
  const auto [x, f] = boost::math::tools::brent_find_minima(neg_occupation, a, b, 40, iterations);
  PeakOccupation peak{coarse[best], std::norm(field.B[best])};
  if (-f > peak.photons) peak = {x, -f};
  return peak;
}

GainCurve mode_gain_curve(const GainSetup& setup, double detuning, const std::vector<double>& powers_mw) {
  GainCurve curve;
  for (double p : powers_mw) {
    SolverConfig cfg = setup.solver;
    cfg.nu0.reset();
    cfg.coupling_g = setup.coupling(p);
    curve.powers_mw.push_back(p);
    curve.flux.push_back(std::norm(solve_one(detuning, cfg, setup.profile, setup.dispersion, setup.freqs).B));
  }
  curve.validate();
  return curve;
}

Calibration calibrate_power_scale(GainSetup setup, double target_exponent, double target_power_mw,
                                  const std::vector<double>& powers_mw, double tolerance, std::size_t max_iterations) {
  if (!(target_exponent > 0.0 && target_power_mw > 0.0)) throw DomainError("calibration targets must be > 0");
  if (!(setup.calibration > 0.0)) throw DomainError("calibration needs a positive starting c");
  Calibration cal;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    cal.mode_detuning = peak_occupation(setup, target_power_mw).detuning;
    cal.mode_curve = mode_gain_curve(setup, cal.mode_detuning, powers_mw);
    cal.fit = fit_model(cal.mode_curve, FitModel::rosenbluth);
    cal.fitted_exponent = gain_exponent(cal.fit, target_power_mw);
    cal.calibration = setup.calibration;
    cal.iterations = it;
    if (std::abs(cal.fitted_exponent - target_exponent) <= tolerance) return cal;
    // B is close to linear in c
    setup.calibration *= target_exponent / cal.fitted_exponent;
  }
  throw NumericalError("power calibration did not reach G = " + std::to_string(target_exponent) + " within " +
                       std::to_string(max_iterations) + " iterations (last G = " +
                       std::to_string(cal.fitted_exponent) + ")");
}

}  // namespace pdc
