#include "decoh/bath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "decoh/error.hpp"

namespace decoh {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void validate(const SpectralDensity::Variant& v) {
  std::visit(overloaded{
                 [](const Ohmic& o) {
                   if (!(o.coupling >= 0.0)) throw InvalidArgument("coupling must be >= 0", "bath.coupling");
                   if (!(o.cutoff_mev > 0.0)) throw InvalidArgument("cutoff must be > 0", "bath.cutoff_mev");
                 },
                 [](const SuperOhmicGaussian& o) {
                   if (!(o.coupling >= 0.0)) throw InvalidArgument("coupling must be >= 0", "bath.coupling");
                   if (!(o.cutoff_mev > 0.0)) throw InvalidArgument("cutoff must be > 0", "bath.cutoff_mev");
                   if (!(o.power >= 1.0)) throw InvalidArgument("power must be >= 1", "bath.power");
                 },
                 [](const DiscreteMode& m) {
                   if (!(m.mode_energy_mev > 0.0))
                     throw InvalidArgument("mode energy must be > 0", "bath.mode_energy_mev");
                   if (!(m.huang_rhys >= 0.0))
                     throw InvalidArgument("Huang-Rhys factor must be >= 0", "bath.huang_rhys");
                   if (!(m.damping_per_ps > 0.0))
                     throw InvalidArgument("mode damping must be > 0", "bath.mode_damping_per_ps");
                 },
                 [](const Composite& c) {
                   if (c.parts.empty()) throw InvalidArgument("composite spectral density has no parts");
                 },
             },
             v);
}

double density_value(const SpectralDensity::Variant& v, double e) {
  return std::visit(overloaded{
                        [e](const Ohmic& o) { return o.coupling * e * std::exp(-e / o.cutoff_mev); },
                        [e](const SuperOhmicGaussian& o) {
                          return o.coupling * std::pow(e, o.power) * std::pow(o.cutoff_mev, 1.0 - o.power) *
                                 std::exp(-e * e / (2.0 * o.cutoff_mev * o.cutoff_mev));
                        },
                        [e](const DiscreteMode& m) {
                          const double w = kHbar * m.damping_per_ps;
                          const double e0 = m.mode_energy_mev;
                          const double lor = 1.0 / ((e - e0) * (e - e0) + w * w) - 1.0 / ((e + e0) * (e + e0) + w * w);
                          return m.huang_rhys * e0 * e0 * (w / kPi) * lor;
                        },
                        [e](const Composite& c) {
                          double sum = 0.0;
                          for (const auto& p : c.parts) sum += p(e);
                          return sum;
                        },
                    },
                    v);
}

// lim J(e)/e as e -> 0
double zero_slope(const SpectralDensity::Variant& v) {
  return std::visit(overloaded{
                        [](const Ohmic& o) { return o.coupling; },
                        [](const SuperOhmicGaussian& o) {
                          return o.power == 1.0 ? o.coupling : 0.0;
                        },
                        [](const DiscreteMode& m) {
                          const double w = kHbar * m.damping_per_ps;
                          const double e0 = m.mode_energy_mev;
                          const double d = e0 * e0 + w * w;
                          return m.huang_rhys * e0 * e0 * (w / kPi) * 4.0 * e0 / (d * d);
                        },
                        [](const Composite& c) {
                          double sum = 0.0;
                          for (const auto& p : c.parts) sum += zero_slope(p.variant());
                          return sum;
                        },
                    },
                    v);
}

// --- adaptive Simpson over a panelled frequency axis -------------------------

struct Simpson {
  const SpectralDensity& sd;
  double two_kt;
  double t;
  double slope_at_zero;  // lim J(e)/e as e -> 0

  complex operator()(double e) const {
    if (e == 0.0) return {slope_at_zero * two_kt, 0.0};
    const double thermal = sd(e) / std::tanh(e / two_kt);
    const double phase = e * t / kHbar;
    return {thermal * std::cos(phase), -sd(e) * std::sin(phase)};
  }
};

struct Panel {
  double a, b;
};

complex adaptive(const Simpson& f, double a, double b, complex fa, complex fm, complex fb, complex whole,
                 double tol, int depth, bool& ok) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const complex flm = f(lm);
  const complex frm = f(rm);
  const complex left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const complex right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const complex delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0) {
    ok = false;
    return left + right + delta / 15.0;
  }
  return adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, ok) +
         adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, ok);
}

std::vector<Panel> make_panels(const SpectralDensity& sd, double upper, double t_max) {
  std::vector<double> cuts{0.0};
  // log-spaced panels resolve the low-frequency onset of J
  const double linear_width0 = upper / 400.0;
  for (double e = upper * 1e-6; e < linear_width0; e *= 4.0) cuts.push_back(e);
  double width = linear_width0;
  if (t_max > 0.0) width = std::min(width, 2.0 * kPi * kHbar / t_max / 8.0);
  for (double e = linear_width0; e < upper; e += width) cuts.push_back(e);
  cuts.push_back(upper);
  sd.collect_breakpoints(cuts);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [upper](double c) { return c < 0.0 || c > upper; }),
             cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double x, double y) { return std::abs(x - y) < 1e-14; }),
             cuts.end());
  std::vector<Panel> panels;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) panels.push_back({cuts[i], cuts[i + 1]});
  return panels;
}

complex integrate_panels(const Simpson& f, const std::vector<Panel>& panels, double upper, double abs_tol,
                         const char* what) {
  complex total{};
  for (const auto& p : panels) {
    const double m = 0.5 * (p.a + p.b);
    const complex fa = f(p.a), fm = f(m), fb = f(p.b);
    const complex whole = (p.b - p.a) / 6.0 * (fa + 4.0 * fm + fb);
    bool ok = true;
    total += adaptive(f, p.a, p.b, fa, fm, fb, whole, abs_tol * (p.b - p.a) / upper, 48, ok);
    if (!ok) {
      std::ostringstream msg;
      msg << what << ": quadrature did not reach relative tolerance 1e-8 at t = " << f.t << " ps on panel ["
          << p.a << ", " << p.b << "] meV";
      throw NumericError(msg.str());
    }
  }
  return total;
}

std::vector<complex> thermal_correlation(const SpectralDensity& sd, double temperature, const TimeGrid& grid) {
  // Composite densities are integrated part by part so C is exactly additive.
  if (const auto* comp = std::get_if<Composite>(&sd.variant())) {
    std::vector<complex> sum(grid.count());
    for (const auto& part : comp->parts) {
      const auto c = thermal_correlation(part, temperature, grid);
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += c[i];
    }
    return sum;
  }
  const double kt = kBoltzmann * temperature;
  const double upper = 10.0 * std::max(sd.characteristic_energy(), 20.0 * kt);
  Simpson f{sd, 2.0 * kt, 0.0, zero_slope(sd.variant())};

  // tolerance is relative to Int |J coth|, which is Re C(0) * hbar^2
  const auto panels0 = make_panels(sd, upper, 0.0);
  double mass = 0.0;
  for (const auto& p : panels0) {
    const double m = 0.5 * (p.a + p.b);
    mass += std::abs(((p.b - p.a) / 6.0 * (f(p.a) + 4.0 * f(m) + f(p.b))).real());
  }
  if (mass == 0.0) return std::vector<complex>(grid.count());
  const double ref = std::abs(integrate_panels(f, panels0, upper, 1e-10 * mass, "C(0)").real());
  const double abs_tol = 1e-8 * ref;

  std::vector<complex> out(grid.count());
  for (std::size_t i = 0; i < grid.count(); ++i) {
    f.t = std::abs(grid[i]);
    const auto panels = make_panels(sd, upper, f.t);
    complex c = integrate_panels(f, panels, upper, abs_tol, "correlation_function") / (kHbar * kHbar);
    if (grid[i] < 0.0) c = std::conj(c);
    out[i] = c;
  }
  return out;
}

}  // namespace

SpectralDensity::SpectralDensity(Variant v) : v_(std::move(v)) { validate(v_); }

double SpectralDensity::operator()(double energy_mev) const {
  if (energy_mev < 0.0) throw InvalidArgument("spectral density evaluated at negative energy");
  if (energy_mev == 0.0) return 0.0;
  return density_value(v_, energy_mev);
}

double SpectralDensity::characteristic_energy() const {
  return std::visit(overloaded{
                        [](const Ohmic& o) { return o.cutoff_mev; },
                        [](const SuperOhmicGaussian& o) { return o.cutoff_mev; },
                        [](const DiscreteMode& m) { return m.mode_energy_mev; },
                        [](const Composite& c) {
                          double e = 0.0;
                          for (const auto& p : c.parts) e = std::max(e, p.characteristic_energy());
                          return e;
                        },
                    },
                    v_);
}

void SpectralDensity::collect_breakpoints(std::vector<double>& out) const {
  if (const auto* m = std::get_if<DiscreteMode>(&v_)) {
    const double w = kHbar * m->damping_per_ps;
    for (double k : {-8.0, -4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0, 8.0})
      out.push_back(m->mode_energy_mev + k * w);
  } else if (const auto* c = std::get_if<Composite>(&v_)) {
    for (const auto& p : c->parts) p.collect_breakpoints(out);
  }
}

NoiseModel::NoiseModel(Variant v) : v_(std::move(v)) {
  std::visit(overloaded{
                 [](const WhiteNoise& w) {
                   if (!(w.rate >= 0.0)) throw InvalidArgument("white-noise rate must be >= 0", "bath.gamma_per_ps");
                 },
                 [](const OrnsteinUhlenbeck& o) {
                   if (!(o.amplitude >= 0.0))
                     throw InvalidArgument("fluctuation amplitude must be >= 0", "bath.delta_rad_per_ps");
                   if (!(o.inverse_time >= 0.0))
                     throw InvalidArgument("inverse correlation time must be >= 0", "bath.lambda_per_ps");
                 },
                 [](const ThermalBath& b) {
                   if (!(b.temperature_k > 0.0))
                     throw InvalidArgument("temperature must be > 0", "bath.temperature_k");
                 },
             },
             v_);
}

double evaluate_spectral_density(const SpectralDensity& sd, double energy_mev) { return sd(energy_mev); }

CorrelationFunction correlation_function(const NoiseModel& nm, const TimeGrid& grid) {
  return std::visit(overloaded{
                        [&](const WhiteNoise& w) { return CorrelationFunction{grid, w.rate, {}}; },
                        [&](const OrnsteinUhlenbeck& o) {
                          std::vector<complex> c(grid.count());
                          for (std::size_t i = 0; i < c.size(); ++i)
                            c[i] = o.amplitude * o.amplitude * std::exp(-o.inverse_time * std::abs(grid[i]));
                          return CorrelationFunction{grid, std::nullopt, std::move(c)};
                        },
                        [&](const ThermalBath& b) {
                          return CorrelationFunction{grid, std::nullopt,
                                                     thermal_correlation(b.density, b.temperature_k, grid)};
                        },
                    },
                    nm.variant());
}

std::pair<std::vector<complex>, std::vector<complex>> integrate_twice(std::span<const complex> c, double h) {
  const std::size_t n = c.size();
  std::vector<complex> first(n), second(n);
  if (n == 0) return {first, second};
  if (n < 5) throw InvalidArgument("need at least five samples to integrate");
  // fourth-order finite differences
  auto derivative = [&](std::size_t k) -> complex {
    if (k == 0) return (-25.0 * c[0] + 48.0 * c[1] - 36.0 * c[2] + 16.0 * c[3] - 3.0 * c[4]) / (12.0 * h);
    if (k == 1) return (-3.0 * c[0] - 10.0 * c[1] + 18.0 * c[2] - 6.0 * c[3] + c[4]) / (12.0 * h);
    if (k == n - 1)
      return (25.0 * c[n - 1] - 48.0 * c[n - 2] + 36.0 * c[n - 3] - 16.0 * c[n - 4] + 3.0 * c[n - 5]) / (12.0 * h);
    if (k == n - 2)
      return (3.0 * c[n - 1] + 10.0 * c[n - 2] - 18.0 * c[n - 3] + 6.0 * c[n - 4] - c[n - 5]) / (12.0 * h);
    return (c[k - 2] - 8.0 * c[k - 1] + 8.0 * c[k + 1] - c[k + 2]) / (12.0 * h);
  };
  const double corr = h * h / 12.0;
  const complex d0 = derivative(0);
  complex trap{};
  for (std::size_t k = 1; k < n; ++k) {
    trap += 0.5 * h * (c[k - 1] + c[k]);
    first[k] = trap - corr * (derivative(k) - d0);
  }
  // d/dt of the first integral is C itself, so its end correction is exact.
  complex trap2{};
  for (std::size_t k = 1; k < n; ++k) {
    trap2 += 0.5 * h * (first[k - 1] + first[k]);
    second[k] = trap2 - corr * (c[k] - c[0]);
  }
  return {first, second};
}

LineshapeTable::LineshapeTable(TimeGrid grid, std::vector<complex> c_values, std::vector<complex> dg_values,
                               std::vector<complex> g_values)
    : grid_(grid), c_(std::move(c_values)), dg_(std::move(dg_values)), g_(std::move(g_values)) {
  if (grid_.start() != 0.0) throw InvalidArgument("line-shape grid must start at t = 0");
  if (c_.size() != grid_.count() || dg_.size() != grid_.count() || g_.size() != grid_.count())
    throw InvalidArgument("line-shape table sizes do not match its grid");
}

complex LineshapeTable::at(double t) const {
  const double h = grid_.step();
  const double x = t / h;
  if (t < 0.0 || x > static_cast<double>(grid_.count() - 1) + 1e-9) {
    std::ostringstream msg;
    msg << "line-shape requested at t = " << t << " ps outside table [0, " << grid_.back() << "]";
    throw InvalidArgument(msg.str());
  }
  const double nearest = std::round(x);
  if (std::abs(x - nearest) < 1e-9) return g_[static_cast<std::size_t>(nearest)];
  const auto k = std::min(static_cast<std::size_t>(x), grid_.count() - 2);
  const double u = x - static_cast<double>(k);
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u, h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
  return h00 * g_[k] + h10 * h * dg_[k] + h01 * g_[k + 1] + h11 * h * dg_[k + 1];
}

double kubo_lineshape(double amplitude, double inverse_time, double t) {
  const double d2 = amplitude * amplitude;
  const double x = inverse_time * t;
  if (x < 1e-4) {
    // series of exp(-x) + x - 1 avoids cancellation
    return d2 * t * t * (0.5 - x / 6.0 + x * x / 24.0);
  }
  return d2 / (inverse_time * inverse_time) * (std::expm1(-x) + x);
}

LineshapeTable lineshape_function(const NoiseModel& nm, const TimeGrid& grid) {
  if (grid.start() != 0.0) throw InvalidArgument("line-shape grid must start at t = 0");
  const std::size_t n = grid.count();
  if (const auto* w = std::get_if<WhiteNoise>(&nm.variant())) {
    std::vector<complex> g(n), dg(n, complex(w->rate, 0.0));
    for (std::size_t i = 0; i < n; ++i) g[i] = w->rate * grid[i];
    return LineshapeTable(grid, std::vector<complex>(n), std::move(dg), std::move(g));
  }
  auto corr = correlation_function(nm, grid);
  auto [first, second] = integrate_twice(corr.values, grid.step());
  return LineshapeTable(grid, std::move(corr.values), std::move(first), std::move(second));
}

Lineshape Lineshape::markovian(double gamma) {
  if (!(gamma >= 0.0)) throw InvalidArgument("dephasing rate must be >= 0");
  return Lineshape(WhiteNoise{gamma});
}

Lineshape Lineshape::kubo(double amplitude, double inverse_time) {
  if (!(amplitude >= 0.0) || !(inverse_time >= 0.0)) throw InvalidArgument("Kubo parameters must be >= 0");
  return Lineshape(Kubo{amplitude, inverse_time});
}

Lineshape Lineshape::table(LineshapeTable table) { return Lineshape(std::move(table)); }

complex Lineshape::operator()(double t) const {
  return std::visit(overloaded{
                        [t](const WhiteNoise& w) { return complex(w.rate * t, 0.0); },
                        [t](const Kubo& k) { return complex(kubo_lineshape(k.amplitude, k.inverse_time, t), 0.0); },
                        [t](const LineshapeTable& tab) { return tab.at(t); },
                    },
                    v_);
}

double Lineshape::max_time() const {
  if (const auto* tab = std::get_if<LineshapeTable>(&v_)) return tab->grid().back();
  return std::numeric_limits<double>::infinity();
}

}  // namespace decoh
