#include "pdc/integrators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <utility>
#include <sstream>
#include <string>

#include "pdc/errors.hpp"
#include "pdc/units.hpp"

namespace pdc {

std::string_view to_string(Integrator method) {
  switch (method) {
    case Integrator::dormand_prince: return "dormand_prince";
    case Integrator::magnus4: return "magnus4";
    case Integrator::magnus6: return "magnus6";
    case Integrator::rk4: return "rk4";
  }
  return "unknown";
}

Integrator integrator_from_string(std::string_view name) {
  if (name == "dormand_prince") return Integrator::dormand_prince;
  if (name == "magnus4") return Integrator::magnus4;
  if (name == "magnus6") return Integrator::magnus6;
  if (name == "rk4") return Integrator::rk4;
  throw DomainError("unknown integrator '" + std::string(name) + "'");
}

double default_max_step(double delta, const GratingProfile& profile) {
  const double rate = profile.max_detuning_from(delta);
  const double floor = profile.length * 1e-6;
  if (rate <= 0.0) return profile.length;
  return std::clamp(2.0 * kPi / (10.0 * rate), floor, profile.length);
}

namespace {

using State = std::array<Complex, 2>;  // {A, B*}

// Right-hand side of the coupled-mode system in the unrotated frame.
struct CoupledModes {
  double delta;
  Complex g;
  const GratingProfile& profile;

  Complex kernel(double z) const {
    const double theta = delta * z - profile.phase_integral(std::min(z, profile.length));
    return {std::cos(theta), std::sin(theta)};
  }

  State operator()(double z, const State& y) const {
    const Complex e = kernel(z);
    const Complex i{0.0, 1.0};
    return {i * g * y[1] * e, -i * std::conj(g) * y[0] * std::conj(e)};
  }
};

[[noreturn]] void underflow(double z, double h, double delta, const GratingProfile& profile) {
  std::ostringstream msg;
  msg << "step size underflow at z = " << z << " mm (h = " << h
      << " mm); oscillation too fast: max|Delta-K| = " << profile.max_detuning_from(delta)
      << " rad/mm";
  throw NumericalError(msg.str());
}

void notify(const TrajectoryObserver* observer, double z, const State& y) {
  if (observer && *observer) (*observer)(z, y[0], std::conj(y[1]));
}

// Error per unit step: the local error is weighted by length / h so the
// accumulated error over the crystal tracks the requested tolerance.
double error_norm(const State& err, const State& y0, const State& y1, const Tolerances& tol) {
  double sum = 0.0;
  for (std::size_t k = 0; k < 2; ++k) {
    const double scale = tol.atol + tol.rtol * std::sqrt(std::max(std::norm(y0[k]), std::norm(y1[k])));
    sum += std::norm(err[k]) / (scale * scale);
  }
  return std::sqrt(sum / 2.0);
}

// y + h * sum_j w_j k_j
State advance(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
  State out = y;
  for (std::size_t k = 0; k < 2; ++k) {
    Complex acc{};
    for (const auto& [w, stage] : terms) acc += w * (*stage)[k];
    out[k] += h * acc;
  }
  return out;
}

BogoliubovCoefficients dormand_prince(const CoupledModes& f, const IntegrationOptions& opt,
                                      double max_step, const TrajectoryObserver* observer) {
  // Butcher tableau of the Dormand-Prince 5(4) pair.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const double length = f.profile.length;
  const double h_min = length * 1e-14;
  State y{Complex{1.0, 0.0}, Complex{0.0, 0.0}};
  double z = 0.0;
  double h = std::min(max_step, length / 100.0);
  State k1 = f(z, y);
  bool rejected = false;
  notify(observer, z, y);

  for (std::size_t step = 0; z < length; ++step) {
    if (step >= opt.max_steps || h < h_min) underflow(z, h, f.delta, f.profile);
    const bool last = z + h >= length;
    if (last) h = length - z;

    const State k2 = f(z + c2 * h, advance(y, h, {{a21, &k1}}));
    const State k3 = f(z + c3 * h, advance(y, h, {{a31, &k1}, {a32, &k2}}));
    const State k4 = f(z + c4 * h, advance(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State k5 = f(z + c5 * h, advance(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State k6 = f(z + h, advance(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State y_new = advance(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const double z_new = last ? length : z + h;
    const State k7 = f(z_new, y_new);

    State err;
    for (std::size_t k = 0; k < 2; ++k) {
      err[k] = h * (e1 * k1[k] + e3 * k3[k] + e4 * k4[k] + e5 * k5[k] + e6 * k6[k] + e7 * k7[k]);
    }
    const double en = error_norm(err, y, y_new, opt.tol) * (length / h);

    if (en <= 1.0) {
      y = y_new;
      z = z_new;
      k1 = k7;
      notify(observer, z, y);
      double factor = en > 0.0 ? 0.9 * std::pow(en, -0.25) : 5.0;
      factor = std::clamp(factor, 0.2, rejected ? 1.0 : 5.0);
      h = std::min(h * factor, max_step);
      rejected = false;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(en, -0.25));
      rejected = true;
    }
  }
  return {y[0], std::conj(y[1])};
}

// Magnus steps for y' = M(z) y with M = [[0, c], [conj(c), 0]],
// c = i g exp(i theta). Generators stay in su(1,1), written as
// [[i a, b], [conj(b), -i a]], and their exponential is taken in closed form,
// so every step is an exact SU(1,1) map up to rounding. The state is carried
// in long double to keep the rounding drift of |A|^2 - |B|^2 small at high
// gain.
using LComplex = std::complex<long double>;
using LState = std::array<LComplex, 2>;

struct Generator {
  long double a = 0.0L;
  LComplex b{};

  Generator operator+(const Generator& o) const { return {a + o.a, b + o.b}; }
  Generator operator-(const Generator& o) const { return {a - o.a, b - o.b}; }
  Generator operator*(long double s) const { return {a * s, b * s}; }
};

Generator commutator(const Generator& x, const Generator& y) {
  const LComplex i{0.0L, 1.0L};
  return {2.0L * std::imag(x.b * std::conj(y.b)), 2.0L * i * (x.a * y.b - y.a * x.b)};
}

struct Su11 {
  LComplex u, v;  // [[u, v], [conj(v), conj(u)]]
  LState apply(const LState& y) const {
    const long double ur = u.real(), ui = u.imag(), vr = v.real(), vi = v.imag();
    const long double ar = y[0].real(), ai = y[0].imag(), br = y[1].real(), bi = y[1].imag();
    return {LComplex(ur * ar - ui * ai + vr * br - vi * bi, ur * ai + ui * ar + vr * bi + vi * br),
            LComplex(vr * ar + vi * ai + ur * br + ui * bi, vr * ai - vi * ar + ur * bi - ui * br)};
  }
};

Su11 exponential(const Generator& x) {
  const long double s2 = std::norm(x.b) - x.a * x.a;
  long double ch, sh_over_s;
  if (std::abs(s2) < 1e-3L) {
    // Taylor series in s^2 through s^10; truncation below long double epsilon.
    ch = 1.0L;
    sh_over_s = 1.0L;
    for (int n = 5; n >= 1; --n) {
      ch = 1.0L + ch * s2 / ((2.0L * n) * (2.0L * n - 1.0L));
      sh_over_s = 1.0L + sh_over_s * s2 / ((2.0L * n + 1.0L) * (2.0L * n));
    }
  } else if (s2 > 0.0L) {
    const long double s = std::sqrt(s2);
    ch = std::cosh(s);
    sh_over_s = std::sinh(s) / s;
  } else {
    const long double s = std::sqrt(-s2);
    ch = std::cos(s);
    sh_over_s = std::sin(s) / s;
  }
  return {LComplex(ch, x.a * sh_over_s), x.b * sh_over_s};
}

Generator sample(const CoupledModes& f, double z) {
  return {0.0L, LComplex(Complex{0.0, 1.0} * f.g * f.kernel(z))};
}

// Two-point Gauss rule, order 4.
Generator magnus4_generator(const CoupledModes& f, double z, double h) {
  constexpr double node = 0.28867513459481288225;  // sqrt(3)/6
  const Generator m1 = sample(f, z + (0.5 - node) * h);
  const Generator m2 = sample(f, z + (0.5 + node) * h);
  const long double hl = h;
  return (m1 + m2) * (0.5L * hl) - commutator(m1, m2) * (hl * hl * 0.14433756729740644113L);  // sqrt(3)/12
}

// Three-point Gauss rule, order 6.
Generator magnus6_generator(const CoupledModes& f, double z, double h) {
  constexpr double node = 0.38729833462074168852;  // sqrt(15)/10
  const Generator m1 = sample(f, z + (0.5 - node) * h);
  const Generator m2 = sample(f, z + 0.5 * h);
  const Generator m3 = sample(f, z + (0.5 + node) * h);
  const long double hl = h;
  const Generator a1 = m2 * hl;
  const Generator a2 = (m3 - m1) * (hl * 1.2909944487358056284L);  // sqrt(15)/3
  const Generator a3 = (m3 - m2 * 2.0L + m1) * (hl * 10.0L / 3.0L);
  const Generator c1 = commutator(a1, a2);
  const Generator c2 = commutator(a1, a3 * 2.0L + c1) * (-1.0L / 60.0L);
  return a1 + a3 * (1.0L / 12.0L) +
         commutator(a1 * -20.0L - a3 + c1, a2 + c2) * (1.0L / 240.0L);
}

// Adaptive driver with step doubling; the two half steps are kept and the
// Richardson difference (half - full) / (2^order - 1) is their error.
template <class StepGenerator>
BogoliubovCoefficients magnus(const CoupledModes& f, const IntegrationOptions& opt, double max_step,
                              const TrajectoryObserver* observer, StepGenerator generator,
                              int order) {
  const double length = f.profile.length;
  const double h_min = length * 1e-14;
  const long double richardson = std::ldexp(1.0L, order) - 1.0L;
  const double exponent = -1.0 / order;
  LState y{LComplex{1.0L, 0.0L}, LComplex{0.0L, 0.0L}};
  auto as_double = [](const LState& s) { return State{Complex(s[0]), Complex(s[1])}; };
  double z = 0.0;
  double h = std::min(max_step, length / 100.0);
  bool rejected = false;
  notify(observer, z, as_double(y));

  for (std::size_t step = 0; z < length; ++step) {
    if (step >= opt.max_steps || h < h_min) underflow(z, h, f.delta, f.profile);
    const bool last = z + h >= length;
    if (last) h = length - z;
    const LState full = exponential(generator(f, z, h)).apply(y);
    const LState half = exponential(generator(f, z + 0.5 * h, 0.5 * h))
                            .apply(exponential(generator(f, z, 0.5 * h)).apply(y));
    State err;
    for (std::size_t k = 0; k < 2; ++k) err[k] = Complex((half[k] - full[k]) / richardson);
    const double en = error_norm(err, as_double(y), as_double(half), opt.tol) * (length / h);
    if (en <= 1.0) {
      y = half;
      z = last ? length : z + h;
      notify(observer, z, as_double(y));
      double factor = en > 0.0 ? 0.9 * std::pow(en, exponent) : 5.0;
      factor = std::clamp(factor, 0.2, rejected ? 1.0 : 5.0);
      h = std::min(h * factor, max_step);
      rejected = false;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(en, exponent));
      rejected = true;
    }
  }
  return {Complex(y[0]), std::conj(Complex(y[1]))};
}

BogoliubovCoefficients rk4(const CoupledModes& f, std::size_t steps,
                           const TrajectoryObserver* observer) {
  if (steps == 0) throw DomainError("rk4 needs at least one step");
  const double h = f.profile.length / static_cast<double>(steps);
  State y{Complex{1.0, 0.0}, Complex{0.0, 0.0}};
  notify(observer, 0.0, y);
  for (std::size_t n = 0; n < steps; ++n) {
    const double z = h * static_cast<double>(n);
    auto shift = [&](const State& k, double w) { return State{y[0] + w * k[0], y[1] + w * k[1]}; };
    const State k1 = f(z, y);
    const State k2 = f(z + 0.5 * h, shift(k1, 0.5 * h));
    const State k3 = f(z + 0.5 * h, shift(k2, 0.5 * h));
    const State k4 = f(z + h, shift(k3, h));
    for (std::size_t k = 0; k < 2; ++k) y[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    notify(observer, n + 1 == steps ? f.profile.length : z + h, y);
  }
  return {y[0], std::conj(y[1])};
}

}  // namespace

BogoliubovCoefficients propagate(double delta, Complex coupling, const GratingProfile& profile,
                                 const IntegrationOptions& options,
                                 const TrajectoryObserver* observer) {
  profile.validate();
  if (!(options.tol.rtol > 0.0) || !(options.tol.atol > 0.0)) {
    throw DomainError("integration tolerances must be positive");
  }
  if (coupling == Complex{0.0, 0.0}) {
    notify(observer, 0.0, State{Complex{1.0, 0.0}, Complex{}});
    notify(observer, profile.length, State{Complex{1.0, 0.0}, Complex{}});
    return {};
  }
  const CoupledModes f{delta, coupling, profile};
  const double max_step = options.max_step.value_or(default_max_step(delta, profile));
  if (!(max_step > 0.0)) throw DomainError("max_step must be positive");
  switch (options.method) {
    case Integrator::dormand_prince: return dormand_prince(f, options, max_step, observer);
    case Integrator::magnus4: return magnus(f, options, max_step, observer, magnus4_generator, 4);
    case Integrator::magnus6: return magnus(f, options, max_step, observer, magnus6_generator, 6);
    case Integrator::rk4: return rk4(f, options.rk4_steps, observer);
  }
  throw DomainError("unsupported integrator");
}

}  // namespace pdc
