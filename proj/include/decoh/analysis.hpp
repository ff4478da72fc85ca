#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "decoh/dynamics.hpp"
#include "decoh/spectra.hpp"

namespace decoh {

enum class SliceDirection { cross_diagonal, diagonal };
const char* to_string(SliceDirection d);

/// Magnitude profile along a +/-45 degree line through (anchor, anchor).
/// The coordinate is the emission-axis offset x - anchor, so a slice point
/// sits at (anchor + s, anchor -/+ s).
struct SliceProfile {
  std::vector<double> coordinate;
  std::vector<double> values;
  double anchor_x = 0.0;
  double anchor_y = 0.0;
  SliceDirection direction = SliceDirection::cross_diagonal;
};

/// Samples at the spectrum's emission-axis step unless `step` is given.
/// Throws InvalidArgument if the anchor or any slice point leaves the axes.
SliceProfile extract_slice(const Spectrum2D& spectrum, double anchor_energy, SliceDirection direction,
                           double half_width, std::optional<double> step = std::nullopt);

enum class LineModel { lorentzian, sqrt_lorentzian };
const char* to_string(LineModel m);

/// Profile a / (1 + u^2) (Lorentzian) or a / sqrt(1 + u^2) (square-root
/// Lorentzian, the strong-inhomogeneity cross-diagonal shape) plus a
/// baseline, u = (s - c) / w. gamma = w / hbar in both cases.
struct LinewidthFit {
  double gamma = 0.0;
  double uncertainty = 0.0;
  double amplitude = 0.0;
  double center = 0.0;
  double half_width = 0.0;
  double baseline = 0.0;
  bool at_resolution_limit = false;
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;
};

LinewidthFit fit_homogeneous_linewidth(const SliceProfile& slice, LineModel model = LineModel::sqrt_lorentzian);

struct TemperaturePoint {
  double temperature_k;
  double gamma;  // 1/ps
};

/// gamma(T) = gamma0 + gamma_star / (exp(e_ph / kB T) - 1)
struct ActivationFit {
  double gamma0 = 0.0;
  double gamma_star = 0.0;
  double e_ph = 0.0;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  double residual_norm = 0.0;
  bool converged = false;
  /// Constant input: gamma_star = 0 and e_ph undetermined.
  bool degenerate = false;

  double operator()(double temperature_k) const;
};

double activation_model(double gamma0, double gamma_star, double e_ph, double temperature_k);

ActivationFit fit_temperature_activation(std::span<const TemperaturePoint> points);

struct DiffusionPoint {
  double waiting_ps;
  double gamma_mhz;
};

struct DiffusionFit {
  double slope = 0.0;      // MHz / ps
  double intercept = 0.0;  // MHz
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
  double residual_norm = 0.0;
};

DiffusionFit fit_spectral_diffusion(std::span<const DiffusionPoint> points);

struct ExponentialFit {
  double amplitude = 0.0;
  double rate = 0.0;
};

/// Ordinary least squares on log(amplitude).
ExponentialFit fit_exponential(std::span<const DecayPoint> points);

/// Mean absolute log-residual of the late decay about an exponential fitted
/// to the leading `early_fraction` of the points, per unit delay.
double nonmarkovianity_metric(std::span<const DecayPoint> decay, double early_fraction);

struct SpectralBox {
  double x_lo, x_hi;  // emission energy
  double y_lo, y_hi;  // mixing energy

  bool operator==(const SpectralBox&) const = default;
};

std::vector<std::pair<double, double>> sideband_dynamics(
    std::span<const std::pair<double, Spectrum2D>> series, const SpectralBox& box);

/// Diffusion rate kappa that makes the fitted cross-diagonal dephasing rate
/// grow at `slope_mhz_per_ps` for an ensemble with homogeneous rate `gamma`
/// and disorder `sigma_mev`, in the regime kappa T << 1. Derived from the
/// infinite-disorder cross-diagonal profile
///   |Int_0^inf exp(-2 gamma s - a s^2 - 2 i x s) ds|,  a = sigma^2 kappa T / hbar^2,
/// fitted with `model` over +/- half_width_gammas * hbar gamma.
double calibrate_diffusion_rate(double slope_mhz_per_ps, double gamma, double sigma_mev,
                                double half_width_gammas, LineModel model = LineModel::sqrt_lorentzian);

}  // namespace decoh
