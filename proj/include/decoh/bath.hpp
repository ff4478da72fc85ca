#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "decoh/quantum_core.hpp"

namespace decoh {

// Spectral densities take and return energies in meV. The correlation
// function convention used throughout the library is
//
//   C(t) = (1/hbar^2) Int_0^inf de J(e) [coth(e / 2 kB T) cos(e t / hbar) - i sin(e t / hbar)]
//
// in rad^2/ps^2, so a discrete mode of weight S e0^2 reproduces the
// Huang-Rhys correlation S w0^2 [coth cos(w0 t) - i sin(w0 t)].

struct Ohmic {
  double coupling;     // eta, dimensionless
  double cutoff_mev;   // wc
};

struct SuperOhmicGaussian {
  double coupling;     // eta
  double cutoff_mev;   // wc
  double power = 3.0;  // p
};

/// Antisymmetrised Lorentzian of total weight S e0^2 centred at e0 with
/// half-width hbar * damping; vanishes at e = 0.
struct DiscreteMode {
  double mode_energy_mev;
  double huang_rhys;
  double damping_per_ps;
};

class SpectralDensity;

struct Composite {
  std::vector<SpectralDensity> parts;
};

class SpectralDensity {
 public:
  using Variant = std::variant<Ohmic, SuperOhmicGaussian, DiscreteMode, Composite>;

  /// Validates parameters; throws InvalidArgument on negative couplings,
  /// non-positive cutoffs or mode energies.
  SpectralDensity(Variant v);

  const Variant& variant() const { return v_; }

  /// J(e) in meV for e >= 0; throws on negative e.
  double operator()(double energy_mev) const;

  /// Largest of the cutoff / mode energies over all parts (meV).
  double characteristic_energy() const;

  /// Adds +/- a few mode half-widths around every discrete mode to `out`.
  void collect_breakpoints(std::vector<double>& out) const;

 private:
  Variant v_;
};

struct WhiteNoise {
  double rate;  // gamma, 1/ps
};

struct OrnsteinUhlenbeck {
  double amplitude;       // Delta, rad/ps
  double inverse_time;    // Lambda, 1/ps
};

struct ThermalBath {
  SpectralDensity density;
  double temperature_k;
};

class NoiseModel {
 public:
  using Variant = std::variant<WhiteNoise, OrnsteinUhlenbeck, ThermalBath>;

  NoiseModel(Variant v);
  const Variant& variant() const { return v_; }

 private:
  Variant v_;
};

/// Sampled frequency-fluctuation correlation function. White noise is kept
/// symbolic: `white_rate` is set and `values` is empty.
struct CorrelationFunction {
  TimeGrid grid;
  std::optional<double> white_rate;
  std::vector<complex> values;
};

/// g(t) = Int_0^t ds Int_0^s C(s') ds' on a grid starting at 0, together with
/// C(t) and dg/dt. White noise stores g = gamma t exactly and zero C.
class LineshapeTable {
 public:
  LineshapeTable(TimeGrid grid, std::vector<complex> c_values, std::vector<complex> dg_values,
                 std::vector<complex> g_values);

  const TimeGrid& grid() const { return grid_; }
  const std::vector<complex>& c_values() const { return c_; }
  const std::vector<complex>& dg_values() const { return dg_; }
  const std::vector<complex>& g_values() const { return g_; }

  /// Cubic Hermite interpolation using the stored derivative. Exact at grid
  /// nodes. Throws outside [0, grid.back()].
  complex at(double t_ps) const;

 private:
  TimeGrid grid_;
  std::vector<complex> c_;
  std::vector<complex> dg_;
  std::vector<complex> g_;
};

/// Line-shape function g(t) evaluated on demand by the response functions.
class Lineshape {
 public:
  static Lineshape markovian(double gamma);
  static Lineshape kubo(double amplitude, double inverse_time);
  static Lineshape table(LineshapeTable table);

  complex operator()(double t_ps) const;
  /// Longest time the lineshape can be evaluated at (infinity for closed forms).
  double max_time() const;

 private:
  struct Kubo {
    double amplitude;
    double inverse_time;
  };
  using Variant = std::variant<WhiteNoise, Kubo, LineshapeTable>;
  explicit Lineshape(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

double evaluate_spectral_density(const SpectralDensity& sd, double energy_mev);

/// Throws NumericError when the adaptive quadrature misses its 1e-8 relative
/// tolerance, with the offending time and frequency panel in the message.
CorrelationFunction correlation_function(const NoiseModel& nm, const TimeGrid& grid);

/// Grid must start at 0.
LineshapeTable lineshape_function(const NoiseModel& nm, const TimeGrid& grid);

/// Analytic Kubo line-shape (D^2/L^2)(exp(-L t) + L t - 1); L = 0 gives D^2 t^2 / 2.
double kubo_lineshape(double amplitude, double inverse_time, double t_ps);

/// Cumulative double integral of C sampled on a uniform grid starting at 0:
/// trapezoidal sums with Euler-Maclaurin end corrections. Returns
/// (Int_0^t C, Int_0^t Int_0^s C).
std::pair<std::vector<complex>, std::vector<complex>> integrate_twice(std::span<const complex> c,
                                                                      double step);

}  // namespace decoh
