#include "decoh/spectra.hpp"

#include <algorithm>
#include <cmath>

#include "decoh/error.hpp"
#include "decoh/fft.hpp"

namespace decoh {

const char* to_string(SpectrumKind k) {
  switch (k) {
    case SpectrumKind::single_quantum: return "single_quantum";
    case SpectrumKind::zero_quantum: return "zero_quantum";
    case SpectrumKind::double_quantum: return "double_quantum";
  }
  return "unknown";
}

std::optional<SpectrumKind> spectrum_kind_from_string(const std::string& s) {
  if (s == "single_quantum") return SpectrumKind::single_quantum;
  if (s == "zero_quantum") return SpectrumKind::zero_quantum;
  if (s == "double_quantum") return SpectrumKind::double_quantum;
  return std::nullopt;
}

Spectrum2D::Spectrum2D(SpectrumKind kind, EnergyAxis axis_x, EnergyAxis axis_y, std::vector<complex> values,
                       double reference_energy, int y_sign)
    : kind_(kind), x_(axis_x), y_(axis_y), values_(std::move(values)), reference_(reference_energy), y_sign_(y_sign) {
  if (x_.count < 2 || y_.count < 2) throw InvalidArgument("spectrum axes need at least two points");
  if (!(x_.step > 0.0) || !(y_.step > 0.0)) throw InvalidArgument("spectrum axes must be increasing");
  if (values_.size() != x_.count * y_.count) throw InvalidArgument("spectrum values do not match its axes");
  if (y_sign_ != 1 && y_sign_ != -1) throw InvalidArgument("y_sign must be +1 or -1");
}

std::optional<double> Spectrum2D::magnitude_at(double x, double y) const {
  if (!x_.contains(x) || !y_.contains(y)) return std::nullopt;
  const double px = std::clamp(x_.position(x), 0.0, static_cast<double>(x_.count - 1));
  const double py = std::clamp(y_.position(y), 0.0, static_cast<double>(y_.count - 1));
  const auto ix = std::min(static_cast<std::size_t>(px), x_.count - 2);
  const auto iy = std::min(static_cast<std::size_t>(py), y_.count - 2);
  const double fx = px - static_cast<double>(ix);
  const double fy = py - static_cast<double>(iy);
  const double m00 = std::abs((*this)(iy, ix)), m01 = std::abs((*this)(iy, ix + 1));
  const double m10 = std::abs((*this)(iy + 1, ix)), m11 = std::abs((*this)(iy + 1, ix + 1));
  return (1 - fy) * ((1 - fx) * m00 + fx * m01) + fy * ((1 - fx) * m10 + fx * m11);
}

double Spectrum2D::power(double x_lo, double x_hi, double y_lo, double y_hi) const {
  double sum = 0.0;
  for (std::size_t iy = 0; iy < y_.count; ++iy) {
    const double y = y_[iy];
    if (y < y_lo || y > y_hi) continue;
    for (std::size_t ix = 0; ix < x_.count; ++ix) {
      const double x = x_[ix];
      if (x < x_lo || x > x_hi) continue;
      sum += std::norm((*this)(iy, ix));
    }
  }
  const double scale = 2.0 * kPi * kHbar;
  return sum * x_.step * y_.step / (scale * scale);
}

double Spectrum2D::total_power() const { return power(x_.min, x_.max(), y_.min, y_.max()); }

std::pair<double, double> Spectrum2D::peak() const {
  std::size_t best = 0;
  double best_mag = -1.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double m = std::abs(values_[i]);
    if (m > best_mag) {
      best_mag = m;
      best = i;
    }
  }
  return {x_[best % x_.count], y_[best / x_.count]};
}

namespace {

struct AxisSpec {
  std::size_t n;
  double step;
  double start;
};

std::size_t padded_length(std::size_t n, std::size_t pad) {
  std::size_t m = n * std::max<std::size_t>(pad, 1);
  return m + (m % 2);
}

std::vector<double> sample_weights(std::size_t n, const TransformOptions& opt) {
  std::vector<double> w(n, 1.0);
  if (opt.cosine_taper)
    for (std::size_t i = 0; i < n; ++i) w[i] = std::cos(kPi * static_cast<double>(i) / (2.0 * static_cast<double>(n)));
  w[0] *= opt.first_point_weight;
  return w;
}

double bin_angular(long s, std::size_t n, double step) {
  return 2.0 * kPi * static_cast<double>(s) / (static_cast<double>(n) * step);
}

// Transforms slab(rows, cols) into a padded array with the +i kernel, scaled
// by the sample steps and corrected for non-zero axis origins. Natural order.
std::vector<complex> transform_slab(const std::vector<complex>& slab, const AxisSpec& rows, const AxisSpec& cols,
                                    const TransformOptions& opt, std::size_t& nr, std::size_t& nc) {
  nr = padded_length(rows.n, opt.zero_pad);
  nc = padded_length(cols.n, opt.zero_pad);
  const auto wr = sample_weights(rows.n, opt);
  const auto wc = sample_weights(cols.n, opt);
  std::vector<complex> buf(nr * nc);
  for (std::size_t i = 0; i < rows.n; ++i)
    for (std::size_t k = 0; k < cols.n; ++k) buf[i * nc + k] = slab[i * cols.n + k] * wr[i] * wc[k];
  fft::forward_positive_2d(buf, nr, nc);
  const double scale = rows.step * cols.step;
  for (std::size_t i = 0; i < nr; ++i) {
    const double wr_ang = bin_angular(fft::signed_index(i, nr), nr, rows.step);
    for (std::size_t k = 0; k < nc; ++k) {
      const double wc_ang = bin_angular(fft::signed_index(k, nc), nc, cols.step);
      complex v = buf[i * nc + k] * scale;
      if (rows.start != 0.0 || cols.start != 0.0) v *= std::polar(1.0, wr_ang * rows.start + wc_ang * cols.start);
      buf[i * nc + k] = v;
    }
  }
  return buf;
}

// natural index of the bin with signed frequency s
std::size_t natural(long s, std::size_t n) { return static_cast<std::size_t>((s + static_cast<long>(n)) % static_cast<long>(n)); }

EnergyAxis centred_axis(std::size_t n, double step, double offset, bool flipped) {
  const double de = 2.0 * kPi * kHbar / (static_cast<double>(n) * step);
  const long half = static_cast<long>(n / 2);
  // unflipped signed range [-n/2, n/2 - 1]; flipped energies are -s, range [-(n/2 - 1), n/2]
  const double lowest = flipped ? -static_cast<double>(half - 1) : -static_cast<double>(half);
  return EnergyAxis{offset + lowest * de, de, n};
}

Spectrum2D build(SpectrumKind kind, const std::vector<complex>& slab, const AxisSpec& rows, const AxisSpec& cols,
                 const TransformOptions& opt, double x_offset, double y_offset, bool flip_y, double reference) {
  std::size_t nr = 0, nc = 0;
  const auto buf = transform_slab(slab, rows, cols, opt, nr, nc);
  const EnergyAxis x_axis = centred_axis(nc, cols.step, x_offset, false);
  const EnergyAxis y_axis = centred_axis(nr, rows.step, y_offset, flip_y);
  std::vector<complex> values(nr * nc);
  const long half_r = static_cast<long>(nr / 2), half_c = static_cast<long>(nc / 2);
  for (std::size_t qy = 0; qy < nr; ++qy) {
    const long sy = flip_y ? (half_r - 1 - static_cast<long>(qy)) : (static_cast<long>(qy) - half_r);
    const std::size_t ky = natural(sy, nr);
    for (std::size_t qx = 0; qx < nc; ++qx) {
      const long sx = static_cast<long>(qx) - half_c;
      values[qy * nc + qx] = buf[ky * nc + natural(sx, nc)];
    }
  }
  return Spectrum2D(kind, x_axis, y_axis, std::move(values), reference, flip_y ? -1 : 1);
}

}  // namespace

Spectrum2D spectrum_single_quantum(const Response3& resp, const TransformOptions& opt, std::size_t waiting_index) {
  if (resp.pathway() != Pathway::rephasing_single_quantum)
    throw InvalidArgument(std::string("single-quantum spectrum needs a rephasing response, got ") +
                          to_string(resp.pathway()));
  if (waiting_index >= resp.waiting_count()) throw InvalidArgument("waiting-time index out of range");
  const auto& tau = resp.tau();
  const auto& t = resp.t();
  std::vector<complex> slab(tau.count() * t.count());
  for (std::size_t i = 0; i < tau.count(); ++i)
    for (std::size_t k = 0; k < t.count(); ++k) slab[i * t.count() + k] = resp(i, waiting_index, k);
  const double ref = resp.reference_energy();
  return build(SpectrumKind::single_quantum, slab, {tau.count(), tau.step(), tau.start()},
               {t.count(), t.step(), t.start()}, opt, ref, ref, true, ref);
}

namespace {

std::vector<complex> waiting_slab(const Response3& resp, std::size_t tau_index) {
  const auto& t = resp.t();
  std::vector<complex> slab(resp.waiting_count() * t.count());
  for (std::size_t j = 0; j < resp.waiting_count(); ++j)
    for (std::size_t k = 0; k < t.count(); ++k) slab[j * t.count() + k] = resp(tau_index, j, k);
  return slab;
}

}  // namespace

Spectrum2D spectrum_zero_quantum(const Response3& resp, const TransformOptions& opt, std::size_t tau_index) {
  if (resp.pathway() != Pathway::zero_quantum)
    throw InvalidArgument(std::string("zero-quantum spectrum needs a zero-quantum response, got ") +
                          to_string(resp.pathway()));
  if (!resp.has_waiting_grid()) throw InvalidArgument("zero-quantum spectrum needs a waiting-time grid");
  if (tau_index >= resp.tau().count()) throw InvalidArgument("tau index out of range");
  const auto& wg = std::get<TimeGrid>(resp.waiting());
  const auto& t = resp.t();
  const double ref = resp.reference_energy();
  return build(SpectrumKind::zero_quantum, waiting_slab(resp, tau_index), {wg.count(), wg.step(), wg.start()},
               {t.count(), t.step(), t.start()}, opt, ref, 0.0, false, ref);
}

Spectrum2D spectrum_double_quantum(const Response3& resp, const TransformOptions& opt, std::size_t tau_index) {
  if (resp.pathway() != Pathway::double_quantum)
    throw InvalidArgument(std::string("double-quantum spectrum needs a double-quantum response, got ") +
                          to_string(resp.pathway()));
  if (!resp.has_waiting_grid()) throw InvalidArgument("double-quantum spectrum needs a waiting-time grid");
  if (tau_index >= resp.tau().count()) throw InvalidArgument("tau index out of range");
  const auto& wg = std::get<TimeGrid>(resp.waiting());
  const auto& t = resp.t();
  const double ref = resp.reference_energy();
  return build(SpectrumKind::double_quantum, waiting_slab(resp, tau_index), {wg.count(), wg.step(), wg.start()},
               {t.count(), t.step(), t.start()}, opt, ref, 2.0 * ref, false, ref);
}

Spectrum1D spectrum_1d(const std::vector<complex>& trace, const TimeGrid& grid, double reference_energy,
                       const TransformOptions& opt) {
  if (trace.size() != grid.count()) throw InvalidArgument("trace does not match its grid");
  const std::size_t n = padded_length(grid.count(), opt.zero_pad);
  const auto w = sample_weights(grid.count(), opt);
  std::vector<complex> buf(n);
  for (std::size_t i = 0; i < grid.count(); ++i) buf[i] = trace[i] * w[i];
  fft::transform_1d(buf, +1);
  const EnergyAxis axis = centred_axis(n, grid.step(), reference_energy, false);
  std::vector<complex> values(n);
  const long half = static_cast<long>(n / 2);
  for (std::size_t q = 0; q < n; ++q) {
    const long s = static_cast<long>(q) - half;
    complex v = buf[natural(s, n)] * grid.step();
    if (grid.start() != 0.0) v *= std::polar(1.0, bin_angular(s, n, grid.step()) * grid.start());
    values[q] = v;
  }
  return {axis, std::move(values)};
}

double LaserWindow::amplitude(double energy) const {
  const double d = (energy - center_mev) / fwhm_mev;
  return std::exp(-2.0 * std::log(2.0) * d * d);
}

namespace {

void check_window(const LaserWindow& w) {
  if (!(w.fwhm_mev > 0.0)) throw InvalidArgument("laser window FWHM must be > 0", "window.fwhm_mev");
}

constexpr double kOverlapFloor = 1e-12;

}  // namespace

Windowed<Spectrum2D> apply_laser_window(const Spectrum2D& spectrum, const LaserWindow& window) {
  check_window(window);
  Windowed<Spectrum2D> out{spectrum, true, {}};
  const bool both = spectrum.kind() == SpectrumKind::single_quantum;
  const auto& ax = spectrum.axis_x();
  const auto& ay = spectrum.axis_y();
  double peak_weight = 0.0;
  for (std::size_t iy = 0; iy < ay.count; ++iy) {
    const double wy = both ? window.amplitude(ay[iy]) : 1.0;
    for (std::size_t ix = 0; ix < ax.count; ++ix) {
      const double w = wy * window.amplitude(ax[ix]);
      peak_weight = std::max(peak_weight, w);
      out.value(iy, ix) *= w;
    }
  }
  if (peak_weight < kOverlapFloor) {
    out.overlap = false;
    out.warning = "laser window does not overlap the spectral support";
    std::fill(out.value.values().begin(), out.value.values().end(), complex{});
  }
  return out;
}

Windowed<Response3> apply_laser_window(const Response3& response, const LaserWindow& window) {
  check_window(window);
  Windowed<Response3> out{response, true, {}};
  const auto& tau = response.tau();
  const auto& t = response.t();
  const double ref = response.reference_energy();
  const bool filter_tau = response.pathway() != Pathway::double_quantum;
  const std::size_t nt = 2 * t.count();
  const std::size_t ntau = filter_tau ? 2 * tau.count() : tau.count();

  // Amplitude profile on the DFT bins of each axis; the emission axis
  // carries ref + hbar w, the rephasing absorption axis ref - hbar w.
  std::vector<double> wt(nt), wtau(ntau, 1.0);
  double peak_t = 0.0, peak_tau = filter_tau ? 0.0 : 1.0;
  for (std::size_t k = 0; k < nt; ++k) {
    wt[k] = window.amplitude(ref + kHbar * bin_angular(fft::signed_index(k, nt), nt, t.step()));
    peak_t = std::max(peak_t, wt[k]);
  }
  if (filter_tau) {
    for (std::size_t k = 0; k < ntau; ++k) {
      wtau[k] = window.amplitude(ref - kHbar * bin_angular(fft::signed_index(k, ntau), ntau, tau.step()));
      peak_tau = std::max(peak_tau, wtau[k]);
    }
  }
  if (peak_t * peak_tau < kOverlapFloor) {
    out.overlap = false;
    out.warning = "laser window does not overlap the spectral support";
    std::fill(out.value.data().begin(), out.value.data().end(), complex{});
    return out;
  }

  for (std::size_t j = 0; j < response.waiting_count(); ++j) {
    std::vector<complex> buf(ntau * nt);
    for (std::size_t i = 0; i < tau.count(); ++i)
      for (std::size_t k = 0; k < t.count(); ++k) buf[i * nt + k] = response(i, j, k);
    fft::transform_axis(buf, ntau, nt, 1, +1);
    if (filter_tau) fft::transform_axis(buf, ntau, nt, 0, +1);
    for (std::size_t i = 0; i < ntau; ++i)
      for (std::size_t k = 0; k < nt; ++k) buf[i * nt + k] *= wtau[i] * wt[k];
    fft::transform_axis(buf, ntau, nt, 1, -1);
    if (filter_tau) fft::transform_axis(buf, ntau, nt, 0, -1);
    const double norm = 1.0 / static_cast<double>(nt * (filter_tau ? ntau : 1));
    for (std::size_t i = 0; i < tau.count(); ++i)
      for (std::size_t k = 0; k < t.count(); ++k) out.value(i, j, k) = buf[i * nt + k] * norm;
  }
  return out;
}

}  // namespace decoh

namespace decoh {

Spectrum2D crop(const Spectrum2D& s, double x_lo, double x_hi, double y_lo, double y_hi) {
  auto range = [](const EnergyAxis& a, double lo, double hi) {
    const double p0 = std::max(0.0, std::ceil(a.position(lo) - 1e-9));
    const double p1 = std::min(static_cast<double>(a.count - 1), std::floor(a.position(hi) + 1e-9));
    if (p1 - p0 < 1.0) throw InvalidArgument("crop window holds fewer than two bins");
    return std::pair{static_cast<std::size_t>(p0), static_cast<std::size_t>(p1)};
  };
  const auto [x0, x1] = range(s.axis_x(), x_lo, x_hi);
  const auto [y0, y1] = range(s.axis_y(), y_lo, y_hi);
  EnergyAxis ax{s.axis_x()[x0], s.axis_x().step, x1 - x0 + 1};
  EnergyAxis ay{s.axis_y()[y0], s.axis_y().step, y1 - y0 + 1};
  std::vector<complex> v;
  v.reserve(ax.count * ay.count);
  for (std::size_t iy = y0; iy <= y1; ++iy)
    for (std::size_t ix = x0; ix <= x1; ++ix) v.push_back(s(iy, ix));
  return Spectrum2D(s.kind(), ax, ay, std::move(v), s.reference_energy(), s.y_sign());
}

}  // namespace decoh
