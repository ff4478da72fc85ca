#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "decoh/error.hpp"
#include "decoh/spectra.hpp"
#include "oracles.hpp"

using namespace decoh;

namespace {

// Time-domain energy of the weighted samples, sum |w_i w_k s|^2 h_tau h_t.
double time_energy(const Response3& r, std::size_t j, double first_weight) {
  double acc = 0.0;
  for (std::size_t i = 0; i < r.tau().count(); ++i)
    for (std::size_t k = 0; k < r.t().count(); ++k) {
      const double w = (i == 0 ? first_weight : 1.0) * (k == 0 ? first_weight : 1.0);
      acc += std::norm(w * r(i, j, k));
    }
  return acc * r.tau().step() * r.t().step();
}

double max_abs(const std::vector<complex>& v) {
  double m = 0.0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  return m;
}

// Linear-interpolated half-maximum crossings around the maximum of y.
double half_width_at_half_max(const EnergyAxis& axis, const std::vector<double>& y) {
  const auto peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  const double half = y[peak] / 2.0;
  std::size_t r = peak, l = peak;
  while (r + 1 < y.size() && y[r + 1] > half) ++r;
  while (l > 0 && y[l - 1] > half) --l;
  const double xr = axis[r] + axis.step * (y[r] - half) / (y[r] - y[r + 1]);
  const double xl = axis[l] - axis.step * (y[l] - half) / (y[l] - y[l - 1]);
  return (xr - xl) / 2.0;
}

}  // namespace

TEST_CASE("Parseval holds for single- and zero-quantum transforms") {
  const TimeGrid g(0.0, 0.2, 48);
  const TwoLevelEmitter e(1945.0, 1.0, 0.3);
  const auto r = photon_echo_response(InhomogeneousDistribution::gaussian(1945.0, 2.0), e, std::nullopt, g, 0.0, g,
                                      {.reference_energy_mev = 1944.0});
  for (std::size_t pad : {1u, 2u, 4u}) {
    TransformOptions opt;
    opt.zero_pad = pad;
    const auto s = spectrum_single_quantum(r, opt);
    CHECK(s.total_power() == doctest::Approx(time_energy(r, 0, 0.5)).epsilon(1e-9));
  }
  TransformOptions unit;
  unit.first_point_weight = 1.0;
  CHECK(spectrum_single_quantum(r, unit).total_power() == doctest::Approx(time_energy(r, 0, 1.0)).epsilon(1e-9));

  const TimeGrid w(0.0, 0.1, 40);
  const auto z = zero_quantum_response(InhomogeneousDistribution::gaussian(1945.0, 1.0), e,
                                       Lineshape::kubo(2.0, 1.5), TimeGrid(0.0, 0.5, 2), w, g);
  double zq_energy = 0.0;
  for (std::size_t j = 0; j < w.count(); ++j)
    for (std::size_t k = 0; k < g.count(); ++k)
      zq_energy += std::norm((j == 0 ? 0.5 : 1.0) * (k == 0 ? 0.5 : 1.0) * z(1, j, k));
  zq_energy *= w.step() * g.step();
  CHECK(spectrum_zero_quantum(z, {}, 1).total_power() == doctest::Approx(zq_energy).epsilon(1e-9));
}

TEST_CASE("exponential coherence gives a Lorentzian at its energy") {
  const double gamma = 0.1, e0 = 1000.3, ref = 1000.0;
  // span 20 / gamma, step 1 / (20 gamma)
  const TimeGrid g(0.0, 0.5, 400);
  std::vector<complex> trace(g.count());
  for (std::size_t i = 0; i < g.count(); ++i)
    trace[i] = std::exp(complex(-gamma * g[i], -(e0 - ref) * g[i] / oracle::kHbar));
  const auto s = spectrum_1d(trace, g, ref);
  std::vector<double> re(s.values.size());
  for (std::size_t i = 0; i < re.size(); ++i) re[i] = s.values[i].real();
  const auto peak = static_cast<std::size_t>(std::max_element(re.begin(), re.end()) - re.begin());
  CHECK(std::abs(s.axis[peak] - e0) <= s.axis.step);
  CHECK(half_width_at_half_max(s.axis, re) == doctest::Approx(oracle::kHbar * gamma).epsilon(0.02));
}

TEST_CASE("Markovian single-quantum peak sits on the diagonal at the emitter energy") {
  const double gamma = 0.1, e0 = 1945.0;
  const TimeGrid g(0.0, 0.5, 256);
  const auto r = photon_echo_response(InhomogeneousDistribution::delta(e0), TwoLevelEmitter(e0, 1.0, gamma),
                                      std::nullopt, g, 0.0, g, {.reference_energy_mev = 1944.8});
  const auto s = spectrum_single_quantum(r);
  CHECK(s.y_sign() == -1);
  const auto [px, py] = s.peak();
  CHECK(std::abs(px - e0) <= s.axis_x().step);
  CHECK(std::abs(py - e0) <= s.axis_y().step);
}

TEST_CASE("zero padding moves the peak by at most one unpadded bin") {
  const double gamma = 0.2, e0 = 1500.137, ref = 1500.0;
  const TimeGrid g(0.0, 0.25, 200);
  std::vector<complex> trace(g.count());
  for (std::size_t i = 0; i < g.count(); ++i)
    trace[i] = std::exp(complex(-gamma * g[i], -(e0 - ref) * g[i] / oracle::kHbar));
  TransformOptions one;
  one.zero_pad = 1;
  const auto base = spectrum_1d(trace, g, ref, one);
  auto peak_of = [](const Spectrum1D& s) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.values.size(); ++i)
      if (std::abs(s.values[i]) > std::abs(s.values[best])) best = i;
    return s.axis[best];
  };
  const double p1 = peak_of(base);
  for (std::size_t pad : {2u, 4u, 8u}) {
    TransformOptions opt;
    opt.zero_pad = pad;
    CHECK(std::abs(peak_of(spectrum_1d(trace, g, ref, opt)) - p1) <= base.axis.step);
  }
}

TEST_CASE("axis index round trip") {
  const TimeGrid g(0.0, 0.3, 37);
  const auto r = photon_echo_response(InhomogeneousDistribution::delta(1945.0), TwoLevelEmitter(1945.0, 1.0, 0.1),
                                      std::nullopt, g, 0.0, g);
  for (std::size_t pad : {1u, 3u, 4u}) {
    TransformOptions opt;
    opt.zero_pad = pad;
    const auto s = spectrum_single_quantum(r, opt);
    for (const auto* a : {&s.axis_x(), &s.axis_y()}) {
      for (std::size_t i = 0; i < a->count; ++i)
        CHECK(std::llround(a->position((*a)[i])) == static_cast<long long>(i));
      for (std::size_t i = 1; i < a->count; ++i) CHECK((*a)[i] > (*a)[i - 1]);
    }
  }
}

TEST_CASE("transform is linear") {
  const TimeGrid g(0.0, 0.2, 64);
  const TwoLevelEmitter e(1945.0, 1.0, 0.2);
  const auto a = photon_echo_response(InhomogeneousDistribution::gaussian(1945.0, 1.0), e, std::nullopt, g, 0.0, g);
  const auto b = photon_echo_response(InhomogeneousDistribution::delta(1945.0), e, Lineshape::kubo(1.0, 0.5), g,
                                      0.0, g);
  auto sum = a;
  for (std::size_t i = 0; i < sum.data().size(); ++i) sum.data()[i] = 2.0 * a.data()[i] - 0.5 * b.data()[i];
  const auto sa = spectrum_single_quantum(a), sb = spectrum_single_quantum(b), ss = spectrum_single_quantum(sum);
  const double scale = max_abs(ss.values());
  for (std::size_t i = 0; i < ss.values().size(); ++i)
    CHECK(std::abs(ss.values()[i] - (2.0 * sa.values()[i] - 0.5 * sb.values()[i])) <= 1e-10 * scale);
}

TEST_CASE("strong inhomogeneity elongates the peak along the diagonal") {
  const double gamma = 0.05, sigma = 10.0 * oracle::kHbar * gamma;
  const TimeGrid g(0.0, 0.5, 256);
  const auto r = photon_echo_response(InhomogeneousDistribution::gaussian(1945.0, sigma),
                                      TwoLevelEmitter(1945.0, 1.0, gamma), std::nullopt, g, 0.0, g);
  const auto s = spectrum_single_quantum(r);
  auto fwhm = [&](int dir) {
    std::vector<double> y;
    const double step = s.axis_x().step;
    for (int k = -400; k <= 400; ++k) {
      const double d = k * step;
      y.push_back(*s.magnitude_at(1945.0 + d, 1945.0 + dir * d));
    }
    return 2.0 * half_width_at_half_max(EnergyAxis{-400 * step, step, y.size()}, y);
  };
  CHECK(fwhm(+1) / fwhm(-1) > 5.0);
}

TEST_CASE("zero-quantum spectrum without a mode has its feature at zero mixing energy") {
  const TimeGrid tau(0.0, 0.5, 2), w(0.0, 0.1, 64), t(0.0, 0.1, 64);
  const auto r = zero_quantum_response(InhomogeneousDistribution::gaussian(1945.0, 1.0),
                                       TwoLevelEmitter(1945.0, 1.0, 0.3), std::nullopt, tau, w, t);
  for (std::size_t i : {0u, 1u}) {
    const auto s = spectrum_zero_quantum(r, {}, i);
    CHECK(s.y_sign() == 1);
    CHECK(std::abs(s.peak().second) <= s.axis_y().step);
  }
}

TEST_CASE("double-quantum peaks of a pair") {
  const TimeGrid tau(0.0, 0.1, 2), w(0.0, 0.1, 256), t(0.0, 0.1, 256);
  auto peaks = [](const Spectrum2D& s, double floor) {
    const double mx = max_abs(s.values());
    std::vector<std::pair<double, double>> out;
    for (std::size_t iy = 1; iy + 1 < s.axis_y().count; ++iy)
      for (std::size_t ix = 1; ix + 1 < s.axis_x().count; ++ix) {
        const double v = std::abs(s(iy, ix));
        if (v < floor * mx) continue;
        bool local = true;
        for (int a = -1; a <= 1; ++a)
          for (int b = -1; b <= 1; ++b)
            if ((a || b) && std::abs(s(iy + a, ix + b)) > v) local = false;
        if (local) out.emplace_back(s.axis_x()[ix], s.axis_y()[iy]);
      }
    return out;
  };

  SUBCASE("splitting equals the biexciton shift and straddles the two-quantum line") {
    const double shift = 1.0, e0 = 2000.0;
    const EmitterPair pair{TwoLevelEmitter(e0, 1.0, 0.1), TwoLevelEmitter(e0, 1.0, 0.1), 0.0, shift};
    const auto s = spectrum_double_quantum(double_quantum_response(pair, tau, w, t));
    const auto p = peaks(s, 0.5);
    REQUIRE(p.size() == 2);
    CHECK(std::abs(p[0].second - p[1].second) <= s.axis_y().step);
    // level-model oracle: emissions at e0 and e0 + shift, two-quantum energy 2 e0 + shift
    const double lo = std::min(p[0].first, p[1].first), hi = std::max(p[0].first, p[1].first);
    CHECK(std::abs(lo - e0) <= s.axis_x().step);
    CHECK(std::abs(hi - (e0 + shift)) <= s.axis_x().step);
    CHECK(std::abs(p[0].second - (2.0 * e0 + shift)) <= s.axis_y().step);
    CHECK(std::abs((lo + hi) / 2.0 - p[0].second / 2.0) <= s.axis_x().step);
  }

  SUBCASE("uncoupled pair gives a null signal") {
    const EmitterPair coupled{TwoLevelEmitter(2000.0, 1.0, 0.2), TwoLevelEmitter(2000.0, 1.0, 0.2), 0.02, 0.01};
    const EmitterPair free{TwoLevelEmitter(2000.0, 1.0, 0.2), TwoLevelEmitter(2000.0, 1.0, 0.2), 0.0, 0.0};
    const double peak = max_abs(spectrum_double_quantum(double_quantum_response(coupled, tau, w, t)).values());
    CHECK(peak > 0.0);
    CHECK(max_abs(spectrum_double_quantum(double_quantum_response(free, tau, w, t)).values()) <= 1e-10 * peak);
  }
}

TEST_CASE("wrong pathway or missing waiting grid is rejected") {
  const TimeGrid g(0.0, 0.5, 8);
  const auto echo = photon_echo_response(InhomogeneousDistribution::delta(1945.0), TwoLevelEmitter(1945.0, 1.0, 0.1),
                                         std::nullopt, g, 0.0, g);
  CHECK_THROWS_AS(spectrum_zero_quantum(echo), InvalidArgument);
  CHECK_THROWS_AS(spectrum_double_quantum(echo), InvalidArgument);
  const auto zq = zero_quantum_response(InhomogeneousDistribution::delta(1945.0), TwoLevelEmitter(1945.0, 1.0, 0.1),
                                        std::nullopt, g, g, g);
  CHECK_THROWS_AS(spectrum_single_quantum(zq), InvalidArgument);
  CHECK_THROWS_AS(spectrum_double_quantum(zq), InvalidArgument);
  const Response3 bare(g, 0.0, g, Pathway::zero_quantum, 1945.0);
  CHECK_THROWS_AS(spectrum_zero_quantum(bare), InvalidArgument);
  CHECK_THROWS_AS(spectrum_single_quantum(echo, {}, 3), InvalidArgument);
}

TEST_CASE("laser window") {
  const TimeGrid g(0.0, 0.25, 96);
  const auto r = photon_echo_response(InhomogeneousDistribution::gaussian(1945.0, 1.0),
                                      TwoLevelEmitter(1945.0, 1.0, 0.3), std::nullopt, g, 0.0, g);
  const auto s = spectrum_single_quantum(r);
  const double span = std::max(s.axis_x().max() - s.axis_x().min, s.axis_y().max() - s.axis_y().min);
  const double scale = max_abs(s.values());

  SUBCASE("very wide window leaves spectrum and response unchanged") {
    const LaserWindow wide{1945.0, 1e6 * span};
    const auto ws = apply_laser_window(s, wide);
    CHECK(ws.overlap);
    for (std::size_t i = 0; i < s.values().size(); ++i)
      CHECK(std::abs(ws.value.values()[i] - s.values()[i]) <= 1e-9 * scale);
    const auto wr = apply_laser_window(r, wide);
    const double rs = max_abs(r.data());
    for (std::size_t i = 0; i < r.data().size(); ++i) CHECK(std::abs(wr.value.data()[i] - r.data()[i]) <= 1e-9 * rs);
    // 100x the span still only perturbs at the (span / fwhm)^2 level
    const auto w100 = apply_laser_window(s, LaserWindow{1945.0, 100.0 * span});
    for (std::size_t i = 0; i < s.values().size(); ++i)
      CHECK(std::abs(w100.value.values()[i] - s.values()[i]) <= 4.0 * std::log(2.0) * 1e-4 * scale);
  }

  SUBCASE("narrow off-peak window pulls the peak to the product-of-Gaussians centre") {
    // Gaussian line along x on a zero-quantum style spectrum (only x is windowed)
    const double x0 = 10.0, sl = 1.0, c = 12.0, fwhm = 2.0;
    const EnergyAxis ax{0.0, 0.001, 20001}, ay{-1.0, 1.0, 3};
    std::vector<complex> v(ax.count * ay.count);
    for (std::size_t iy = 0; iy < ay.count; ++iy)
      for (std::size_t ix = 0; ix < ax.count; ++ix)
        v[iy * ax.count + ix] = std::exp(-(ax[ix] - x0) * (ax[ix] - x0) / (2.0 * sl * sl));
    const Spectrum2D line(SpectrumKind::zero_quantum, ax, ay, v, 0.0, 1);
    const auto out = apply_laser_window(line, LaserWindow{c, fwhm});
    const double sw2 = fwhm * fwhm / (4.0 * std::log(2.0));
    const double expected = (x0 * sw2 + c * sl * sl) / (sw2 + sl * sl);
    CHECK(std::abs(out.value.peak().first - expected) <= ax.step);
    CHECK(out.value.peak().first > x0);
  }

  SUBCASE("windowing commutes with scaling") {
    auto scaled = s;
    for (auto& z : scaled.values()) z *= complex(3.0, -1.5);
    const LaserWindow w{1945.5, 1.2};
    const auto a = apply_laser_window(scaled, w).value;
    const auto b = apply_laser_window(s, w).value;
    for (std::size_t i = 0; i < a.values().size(); ++i)
      CHECK(std::abs(a.values()[i] - complex(3.0, -1.5) * b.values()[i]) <= 1e-12 * scale);
  }

  SUBCASE("zero overlap warns and zeroes the output") {
    const auto out = apply_laser_window(s, LaserWindow{1945.0 + 100.0 * span, 0.01});
    CHECK_FALSE(out.overlap);
    CHECK_FALSE(out.warning.empty());
    CHECK(max_abs(out.value.values()) == 0.0);
    const auto outr = apply_laser_window(r, LaserWindow{1945.0 + 100.0 * span, 0.01});
    CHECK_FALSE(outr.overlap);
    CHECK(max_abs(outr.value.data()) == 0.0);
  }

  CHECK_THROWS_AS(apply_laser_window(s, LaserWindow{1945.0, 0.0}), InvalidArgument);
}
