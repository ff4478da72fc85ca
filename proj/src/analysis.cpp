#include "decoh/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "decoh/error.hpp"
#include "decoh/levmar.hpp"
#include "decoh/units.hpp"

namespace decoh {

const char* to_string(LineModel m) {
  return m == LineModel::lorentzian ? "lorentzian" : "sqrt_lorentzian";
}

SliceProfile extract_slice(const Spectrum2D& spectrum, double anchor_energy, SliceDirection direction,
                           double half_width, std::optional<double> step) {
  const auto& ax = spectrum.axis_x();
  const auto& ay = spectrum.axis_y();
  if (!(half_width > 0.0)) throw InvalidArgument("slice half width must be positive", "slice.half_width");
  if (!ax.contains(anchor_energy) || !ay.contains(anchor_energy))
    throw InvalidArgument("slice anchor outside spectrum axes", "slice.anchor");
  const double h = step.value_or(ax.step);
  if (!(h > 0.0)) throw InvalidArgument("slice step must be positive", "slice.step");
  const auto half = static_cast<long>(std::floor(half_width / h + 1e-9));
  if (half < 1) throw InvalidArgument("slice shorter than one step", "slice.half_width");
  const double sy = direction == SliceDirection::cross_diagonal ? -1.0 : 1.0;

  SliceProfile out;
  out.anchor_x = anchor_energy;
  out.anchor_y = anchor_energy;
  out.direction = direction;
  for (long i = -half; i <= half; ++i) {
    const double s = static_cast<double>(i) * h;
    auto m = spectrum.magnitude_at(anchor_energy + s, anchor_energy + sy * s);
    if (!m) throw InvalidArgument("slice leaves spectrum axes", "slice.half_width");
    out.coordinate.push_back(s);
    out.values.push_back(*m);
  }
  return out;
}

namespace {

double shape(LineModel model, double u2) {
  return model == LineModel::lorentzian ? 1.0 / (1.0 + u2) : 1.0 / std::sqrt(1.0 + u2);
}

}  // namespace

LinewidthFit fit_homogeneous_linewidth(const SliceProfile& slice, LineModel model) {
  const auto n = slice.coordinate.size();
  if (n < 10 || slice.values.size() != n) throw InvalidArgument("linewidth fit needs at least 10 points", "slice");
  const auto& x = slice.coordinate;
  const auto& y = slice.values;

  const auto imax = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  const double base0 = *std::min_element(y.begin(), y.end());
  const double amp0 = y[imax] - base0;
  if (!(amp0 > 0.0)) throw NumericError("flat slice profile");
  // half-maximum crossing on each side
  std::size_t lo = imax, hi = imax;
  while (lo > 0 && y[lo] - base0 > 0.5 * amp0) --lo;
  while (hi + 1 < n && y[hi] - base0 > 0.5 * amp0) ++hi;
  double hwhm = 0.5 * (x[hi] - x[lo]);
  const double dx = (x.back() - x.front()) / static_cast<double>(n - 1);
  hwhm = std::max(hwhm, 0.5 * dx);
  const double w0 = model == LineModel::lorentzian ? hwhm : hwhm / std::sqrt(3.0);

  auto residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (x[i] - p[1]) / p[2];
      r[static_cast<Eigen::Index>(i)] = p[0] * shape(model, u * u) + p[3] - y[i];
    }
  };
  auto jacobian = [&](const Eigen::VectorXd& p, Eigen::MatrixXd& J) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const double u = (x[i] - p[1]) / p[2];
      const double f = shape(model, u * u);
      // d f / d(u^2)
      const double dfdu2 = model == LineModel::lorentzian ? -f * f : -0.5 * f * f * f;
      const double du2_dc = -2.0 * u / p[2];
      const double du2_dw = -2.0 * u * u / p[2];
      J(k, 0) = f;
      J(k, 1) = p[0] * dfdu2 * du2_dc;
      J(k, 2) = p[0] * dfdu2 * du2_dw;
      J(k, 3) = 1.0;
    }
  };

  Eigen::VectorXd p0(4);
  p0 << amp0, x[imax], w0, base0;
  LmOptions opt;
  opt.lower_bounds = Eigen::VectorXd::Constant(4, -std::numeric_limits<double>::infinity());
  opt.lower_bounds[2] = 1e-6 * dx;
  opt.robust_covariance = true;
  auto res = levenberg_marquardt(residual, jacobian, p0, static_cast<Eigen::Index>(n), opt);
  if (!res.converged) throw NumericError("linewidth fit did not converge: " + res.message);

  LinewidthFit out;
  out.amplitude = res.params[0];
  out.center = res.params[1];
  out.half_width = std::abs(res.params[2]);
  out.baseline = res.params[3];
  out.gamma = out.half_width / kHbar;
  out.uncertainty = std::sqrt(std::max(0.0, res.covariance(2, 2))) / kHbar;
  out.converged = res.converged;
  out.iterations = res.iterations;
  out.residual_norm = res.residual_norm;
  out.at_resolution_limit = out.half_width <= dx;
  if (x.back() - x.front() < 3.0 * out.half_width)
    throw InvalidArgument("slice spans fewer than three half widths", "slice.half_width");
  return out;
}

double activation_model(double gamma0, double gamma_star, double e_ph, double temperature_k) {
  if (temperature_k <= 0.0) return gamma0;
  const double xv = e_ph / (kBoltzmann * temperature_k);
  if (xv > 700.0) return gamma0;
  return gamma0 + gamma_star / std::expm1(xv);
}

double ActivationFit::operator()(double temperature_k) const {
  return activation_model(gamma0, gamma_star, e_ph, temperature_k);
}

ActivationFit fit_temperature_activation(std::span<const TemperaturePoint> points) {
  const auto n = points.size();
  if (n < 4) throw InvalidArgument("activation fit needs at least 4 temperatures", "sweep.temperatures");
  double tmin = std::numeric_limits<double>::infinity(), tmax = 0.0;
  double gmin = std::numeric_limits<double>::infinity(), gmax = -gmin;
  for (const auto& p : points) {
    if (!(p.temperature_k > 0.0)) throw InvalidArgument("temperatures must be positive", "sweep.temperatures");
    if (!(p.gamma > 0.0)) throw InvalidArgument("linewidths must be positive", "sweep.gamma");
    tmin = std::min(tmin, p.temperature_k);
    tmax = std::max(tmax, p.temperature_k);
    gmin = std::min(gmin, p.gamma);
    gmax = std::max(gmax, p.gamma);
  }

  ActivationFit out;
  if (gmax - gmin <= 1e-12 * gmax) {
    out.gamma0 = gmin;
    out.degenerate = true;
    out.converged = true;
    return out;
  }

  // relative residuals (gamma_model - gamma) / gamma
  auto residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    for (std::size_t i = 0; i < n; ++i)
      r[static_cast<Eigen::Index>(i)] =
          (activation_model(p[0], p[1], p[2], points[i].temperature_k) - points[i].gamma) / points[i].gamma;
  };
  auto jacobian = [&](const Eigen::VectorXd& p, Eigen::MatrixXd& J) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const double kt = kBoltzmann * points[i].temperature_k;
      const double xv = p[2] / kt;
      const double inv = 1.0 / points[i].gamma;
      J(k, 0) = inv;
      if (xv > 700.0) {
        J(k, 1) = 0.0;
        J(k, 2) = 0.0;
        continue;
      }
      const double em = std::expm1(xv);
      const double occ = 1.0 / em;
      J(k, 1) = occ * inv;
      J(k, 2) = -p[1] * (em + 1.0) * occ * occ / kt * inv;
    }
  };

  LmOptions opt;
  opt.lower_bounds = Eigen::VectorXd::Zero(3);
  const double range = gmax - gmin;
  const std::array<double, 4> e_starts = {
      kBoltzmann * tmin * 0.5, kBoltzmann * std::sqrt(tmin * tmax), kBoltzmann * tmax * 2.0,
      kBoltzmann * tmax * 10.0};
  const std::array<double, 2> g_starts = {range, 10.0 * range};

  bool have = false;
  LmResult best;
  for (double e0 : e_starts) {
    for (double gs : g_starts) {
      Eigen::VectorXd p0(3);
      p0 << gmin, gs, e0;
      LmResult r;
      try {
        r = levenberg_marquardt(residual, jacobian, p0, static_cast<Eigen::Index>(n), opt);
      } catch (const NumericError&) {
        continue;
      }
      if (!std::isfinite(r.residual_norm)) continue;
      if (!have || r.residual_norm < best.residual_norm) {
        best = r;
        have = true;
      }
    }
  }
  if (!have) throw NumericError("activation fit failed from every start");
  out.gamma0 = best.params[0];
  out.gamma_star = best.params[1];
  out.e_ph = best.params[2];
  out.covariance = best.covariance;
  out.residual_norm = best.residual_norm;
  out.converged = best.converged;
  return out;
}

DiffusionFit fit_spectral_diffusion(std::span<const DiffusionPoint> points) {
  const auto n = points.size();
  if (n < 3) throw InvalidArgument("diffusion fit needs at least 3 waiting times", "sweep.waiting_times");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    X(k, 0) = points[i].waiting_ps;
    X(k, 1) = 1.0;
    y[k] = points[i].gamma_mhz;
  }
  const Eigen::Matrix2d xtx = X.transpose() * X;
  if (std::abs(xtx.determinant()) <= 1e-14 * xtx.squaredNorm())
    throw InvalidArgument("waiting times must not all coincide", "sweep.waiting_times");
  const Eigen::Vector2d beta = xtx.ldlt().solve(X.transpose() * y);
  const Eigen::VectorXd r = X * beta - y;
  DiffusionFit out;
  out.slope = beta[0];
  out.intercept = beta[1];
  out.residual_norm = r.norm();
  const double s2 = n > 2 ? r.squaredNorm() / static_cast<double>(n - 2) : 0.0;
  out.covariance = s2 * xtx.inverse();
  return out;
}

ExponentialFit fit_exponential(std::span<const DecayPoint> points) {
  const auto n = points.size();
  if (n < 2) throw InvalidArgument("exponential fit needs at least 2 points", "decay");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : points) {
    if (!(p.amplitude > 0.0)) throw NumericError("non-positive decay amplitude");
    const double ly = std::log(p.amplitude);
    sx += p.tau;
    sy += ly;
    sxx += p.tau * p.tau;
    sxy += p.tau * ly;
  }
  const double nn = static_cast<double>(n);
  const double den = nn * sxx - sx * sx;
  if (!(std::abs(den) > 0.0)) throw InvalidArgument("delays must not all coincide", "decay");
  const double slope = (nn * sxy - sx * sy) / den;
  const double icpt = (sy - slope * sx) / nn;
  return {std::exp(icpt), -slope};
}

double nonmarkovianity_metric(std::span<const DecayPoint> decay, double early_fraction) {
  const auto n = decay.size();
  if (!(early_fraction > 0.0 && early_fraction < 1.0))
    throw InvalidArgument("early fraction must lie in (0, 1)", "analysis.early_fraction");
  for (std::size_t i = 1; i < n; ++i)
    if (!(decay[i].tau > decay[i - 1].tau)) throw InvalidArgument("delays must increase", "decay");
  const std::size_t m =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(early_fraction * static_cast<double>(n))));
  if (m + 1 > n) throw InvalidArgument("too few points after the early window", "decay");
  const auto fit = fit_exponential(decay.subspan(0, m));
  const double la = std::log(fit.amplitude);
  auto dev = [&](std::size_t i) { return std::abs(std::log(decay[i].amplitude) - (la - fit.rate * decay[i].tau)); };
  double acc = 0.0;
  for (std::size_t i = m; i < n; ++i) acc += 0.5 * (dev(i - 1) + dev(i)) * (decay[i].tau - decay[i - 1].tau);
  return acc / (decay[n - 1].tau - decay[m - 1].tau);
}

std::vector<std::pair<double, double>> sideband_dynamics(std::span<const std::pair<double, Spectrum2D>> series,
                                                         const SpectralBox& box) {
  if (!(box.x_hi > box.x_lo && box.y_hi > box.y_lo)) throw InvalidArgument("empty spectral box", "analysis.box");
  std::vector<std::pair<double, double>> out;
  out.reserve(series.size());
  for (const auto& [tau, s] : series) {
    if (!s.axis_x().contains(box.x_lo) || !s.axis_x().contains(box.x_hi) || !s.axis_y().contains(box.y_lo) ||
        !s.axis_y().contains(box.y_hi))
      throw InvalidArgument("spectral box outside spectrum axes", "analysis.box");
    out.emplace_back(tau, s.power(box.x_lo, box.x_hi, box.y_lo, box.y_hi));
  }
  return out;
}

namespace {

// |Int_0^inf exp(-2 g s - a s^2 - 2 i x s) ds| by composite Simpson.
double limit_profile(double g, double a, double x) {
  const double tmax = 40.0 / g;
  const int n = 8000;
  const double h = tmax / n;
  complex acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double s = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * std::exp(complex(-2.0 * g * s - a * s * s, -2.0 * x * s));
  }
  return std::abs(acc * h / 3.0);
}

double limit_width(double g, double a, double half_width_gammas, LineModel model) {
  SliceProfile p;
  const int half = 100;
  const double step = half_width_gammas * kHbar * g / half;
  for (int i = -half; i <= half; ++i) {
    const double s = i * step;
    p.coordinate.push_back(s);
    p.values.push_back(limit_profile(g, a, s / kHbar));
  }
  return fit_homogeneous_linewidth(p, model).gamma;
}

}  // namespace

double calibrate_diffusion_rate(double slope_mhz_per_ps, double gamma, double sigma_mev, double half_width_gammas,
                                LineModel model) {
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive", "emitter.gamma_per_ps");
  if (!(sigma_mev > 0.0)) throw InvalidArgument("disorder must be positive", "ensemble.sigma_mev");
  if (!(half_width_gammas >= 3.0)) throw InvalidArgument("slice too short", "slice.half_width");
  const double sig = sigma_mev / kHbar;
  // probe a small, linear-regime curvature a = sig^2 kappa T
  const double a = 1e-2 * gamma * gamma;
  const double g0 = limit_width(gamma, 0.0, half_width_gammas, model);
  const double g1 = limit_width(gamma, a, half_width_gammas, model);
  const double dgamma_da = (g1 - g0) / a;
  if (!(dgamma_da > 0.0)) throw NumericError("diffusion calibration has no sensitivity");
  const double target = mhz_to_rate(slope_mhz_per_ps);  // 1/ps^2
  return target / (dgamma_da * sig * sig);
}

}  // namespace decoh
