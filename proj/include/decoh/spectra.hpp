#pragma once

#include <optional>
#include <string>
#include <vector>

#include "decoh/dynamics.hpp"

namespace decoh {

enum class SpectrumKind { single_quantum, zero_quantum, double_quantum };
const char* to_string(SpectrumKind k);
std::optional<SpectrumKind> spectrum_kind_from_string(const std::string& s);

/// Uniform, strictly increasing energy axis (meV).
struct EnergyAxis {
  double min = 0.0;
  double step = 1.0;
  std::size_t count = 0;

  double operator[](std::size_t i) const { return min + static_cast<double>(i) * step; }
  double max() const { return (*this)[count - 1]; }
  /// Fractional index of an energy.
  double position(double energy) const { return (energy - min) / step; }
  bool contains(double energy) const { return energy >= min - 1e-12 * step && energy <= max() + 1e-12 * step; }
  bool operator==(const EnergyAxis&) const = default;
};

/// Complex 2D spectrum, values row-major over (y, x). axis_x is the emission
/// energy hbar w_t; axis_y is |hbar w_tau| (single quantum, y_sign = -1,
/// i.e. the signed transform variable is reference - y) or the mixing /
/// two-quantum energy hbar w_T (y_sign = +1).
class Spectrum2D {
 public:
  Spectrum2D(SpectrumKind kind, EnergyAxis axis_x, EnergyAxis axis_y, std::vector<complex> values,
             double reference_energy, int y_sign);

  SpectrumKind kind() const { return kind_; }
  const EnergyAxis& axis_x() const { return x_; }
  const EnergyAxis& axis_y() const { return y_; }
  double reference_energy() const { return reference_; }
  int y_sign() const { return y_sign_; }

  complex operator()(std::size_t iy, std::size_t ix) const { return values_[iy * x_.count + ix]; }
  complex& operator()(std::size_t iy, std::size_t ix) { return values_[iy * x_.count + ix]; }
  const std::vector<complex>& values() const { return values_; }
  std::vector<complex>& values() { return values_; }

  /// |value| bilinearly interpolated at (x, y); nullopt outside the axes.
  std::optional<double> magnitude_at(double x, double y) const;

  /// Sum of |S|^2 over the box times the bin area divided by (2 pi hbar)^2,
  /// i.e. in the units of the time-domain energy Int |s|^2 dt dt'.
  double power(double x_lo, double x_hi, double y_lo, double y_hi) const;
  double total_power() const;

  /// Location (x, y) of the largest |value|.
  std::pair<double, double> peak() const;

 private:
  SpectrumKind kind_;
  EnergyAxis x_;
  EnergyAxis y_;
  std::vector<complex> values_;
  double reference_;
  int y_sign_;
};

struct TransformOptions {
  /// Each axis is zero-padded to pad * n points.
  std::size_t zero_pad = 4;
  /// Optional cosine taper cos(pi i / 2n) along both transformed axes.
  bool cosine_taper = false;
  /// Weight of the first sample on each axis (trapezoid rule for one-sided signals).
  double first_point_weight = 0.5;
};

/// 2D DFT tau -> w_tau, t -> w_t at one waiting-time index.
Spectrum2D spectrum_single_quantum(const Response3& resp, const TransformOptions& opt = {},
                                   std::size_t waiting_index = 0);
/// 2D DFT T -> w_T, t -> w_t at one tau index; axis_y is the mixing energy.
Spectrum2D spectrum_zero_quantum(const Response3& resp, const TransformOptions& opt = {}, std::size_t tau_index = 0);
/// 2D DFT T -> w_T, t -> w_t at one tau index; axis_y is the absolute
/// two-quantum energy 2 * reference + hbar w_T.
Spectrum2D spectrum_double_quantum(const Response3& resp, const TransformOptions& opt = {},
                                   std::size_t tau_index = 0);

/// 1D transform of a one-sided trace with the same conventions as the emission axis.
struct Spectrum1D {
  EnergyAxis axis;
  std::vector<complex> values;
};
Spectrum1D spectrum_1d(const std::vector<complex>& trace, const TimeGrid& grid, double reference_energy,
                       const TransformOptions& opt = {});

struct LaserWindow {
  double center_mev;
  double fwhm_mev;
  /// Amplitude profile: square root of a Gaussian intensity with this FWHM.
  double amplitude(double energy_mev) const;
};

template <class T>
struct Windowed {
  T value;
  bool overlap = true;
  std::string warning;
};

/// Multiplies the optical axes by the window amplitude: the emission axis
/// always, the absorption axis for single-quantum spectra.
Windowed<Spectrum2D> apply_laser_window(const Spectrum2D& spectrum, const LaserWindow& window);
/// Response version: filters along t (and tau for rephasing responses) in
/// the frequency domain and transforms back.
Windowed<Response3> apply_laser_window(const Response3& response, const LaserWindow& window);

}  // namespace decoh

namespace decoh {

/// Sub-grid of the bins whose energies fall inside [x_lo, x_hi] x [y_lo, y_hi].
Spectrum2D crop(const Spectrum2D& spectrum, double x_lo, double x_hi, double y_lo, double y_hi);

}  // namespace decoh
