#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "decoh/analysis.hpp"
#include "decoh/error.hpp"
#include "decoh/random.hpp"
#include "oracles.hpp"

using namespace decoh;

namespace {

SliceProfile synthetic_slice(LineModel model, double a, double c, double w, double b, double half, std::size_t n) {
  SliceProfile s;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -half + 2.0 * half * static_cast<double>(i) / static_cast<double>(n - 1);
    const double u = (x - c) / w;
    const double f = model == LineModel::lorentzian ? 1.0 / (1.0 + u * u) : 1.0 / std::sqrt(1.0 + u * u);
    s.coordinate.push_back(x);
    s.values.push_back(a * f + b);
  }
  return s;
}

const std::vector<double> kTemps = {5, 10, 15, 20, 30, 40, 60, 80};

double activation_ref(double g0, double gs, double e, double temp) {
  return g0 + gs / (std::exp(e / (0.08617 * temp)) - 1.0);
}

std::vector<DecayPoint> decay_from(const std::function<double(double)>& f, double t_end, std::size_t n) {
  std::vector<DecayPoint> d;
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = t_end * static_cast<double>(i) / static_cast<double>(n - 1);
    d.push_back({tau, f(tau)});
  }
  return d;
}

Spectrum2D markov_spectrum(double gamma, double sigma) {
  const TimeGrid g(0.0, 0.5, 256);
  const auto ens = sigma > 0.0 ? InhomogeneousDistribution::gaussian(1945.0, sigma)
                               : InhomogeneousDistribution::delta(1945.0);
  return spectrum_single_quantum(
      photon_echo_response(ens, TwoLevelEmitter(1945.0, 1.0, gamma), std::nullopt, g, 0.0, g));
}

}  // namespace

TEST_CASE("slice extraction") {
  const auto s = markov_spectrum(0.1, 0.0);
  const auto cross = extract_slice(s, 1945.0, SliceDirection::cross_diagonal, 0.5);
  const auto peak = std::max_element(cross.values.begin(), cross.values.end()) - cross.values.begin();
  CHECK(std::abs(cross.coordinate[static_cast<std::size_t>(peak)]) <= s.axis_x().step);
  for (std::size_t i = 1; i < cross.coordinate.size(); ++i) CHECK(cross.coordinate[i] > cross.coordinate[i - 1]);
  for (double v : cross.values) CHECK(v >= 0.0);

  auto doubled = s;
  for (auto& z : doubled.values()) z *= 2.0;
  const auto cd = extract_slice(doubled, 1945.0, SliceDirection::cross_diagonal, 0.5);
  for (std::size_t i = 0; i < cd.values.size(); ++i) CHECK(cd.values[i] == 2.0 * cross.values[i]);
  auto tripled = s;
  for (auto& z : tripled.values()) z *= 3.0;
  const auto ct = extract_slice(tripled, 1945.0, SliceDirection::cross_diagonal, 0.5);
  for (std::size_t i = 0; i < ct.values.size(); ++i)
    CHECK(ct.values[i] == doctest::Approx(3.0 * cross.values[i]).epsilon(1e-14));

  try {
    extract_slice(s, 1000.0, SliceDirection::cross_diagonal, 0.5);
    FAIL("expected throw");
  } catch (const InvalidArgument& e) {
    CHECK(e.key() == "slice.anchor");
  }
  CHECK_THROWS_AS(extract_slice(s, 1945.0, SliceDirection::diagonal, 1e4), InvalidArgument);
}

TEST_CASE("Lorentzian fit recovers its own model exactly") {
  const double a = 2.5, c = 0.013, w = 0.07, b = 0.01;
  const auto s = synthetic_slice(LineModel::lorentzian, a, c, w, b, 0.6, 121);
  const auto f = fit_homogeneous_linewidth(s, LineModel::lorentzian);
  CHECK(f.converged);
  CHECK(f.amplitude == doctest::Approx(a).epsilon(1e-6));
  CHECK(f.center == doctest::Approx(c).epsilon(1e-6));
  CHECK(f.half_width == doctest::Approx(w).epsilon(1e-6));
  CHECK(f.baseline == doctest::Approx(b).epsilon(1e-6));
  CHECK(f.gamma == doctest::Approx(w / oracle::kHbar).epsilon(1e-6));
  CHECK_FALSE(f.at_resolution_limit);
}

TEST_CASE("square-root Lorentzian fit recovers its own model") {
  const double w = 0.03;
  const auto s = synthetic_slice(LineModel::sqrt_lorentzian, 1.0, -0.002, w, 0.0, 0.3, 101);
  const auto f = fit_homogeneous_linewidth(s);
  CHECK(f.half_width == doctest::Approx(w).epsilon(1e-6));
  CHECK(f.center == doctest::Approx(-0.002).epsilon(1e-6));
}

TEST_CASE("linewidth is invariant under amplitude scaling") {
  const auto s = markov_spectrum(0.05, 10.0 * oracle::kHbar * 0.05);
  const auto slice = extract_slice(s, 1945.0, SliceDirection::cross_diagonal, 0.15);
  auto scaled = slice;
  for (auto& v : scaled.values) v *= 2.0;
  const auto f1 = fit_homogeneous_linewidth(slice);
  const auto f2 = fit_homogeneous_linewidth(scaled);
  CHECK(f2.gamma == doctest::Approx(f1.gamma).epsilon(1e-9));
  CHECK(f2.amplitude == doctest::Approx(2.0 * f1.amplitude).epsilon(1e-9));
}

TEST_CASE("linewidth fit preconditions") {
  CHECK_THROWS_AS(fit_homogeneous_linewidth(synthetic_slice(LineModel::lorentzian, 1, 0, 0.1, 0, 1, 9)),
                  InvalidArgument);
  // span narrower than three half widths
  CHECK_THROWS_AS(
      fit_homogeneous_linewidth(synthetic_slice(LineModel::lorentzian, 1, 0, 1.0, 0, 1.0, 41), LineModel::lorentzian),
      InvalidArgument);
  // width below the sampling step is flagged
  const auto narrow = synthetic_slice(LineModel::lorentzian, 1, 0, 0.004, 0, 0.5, 101);
  CHECK(fit_homogeneous_linewidth(narrow, LineModel::lorentzian).at_resolution_limit);
}

TEST_CASE("Markovian slice through the full pipeline recovers gamma") {
  const double gamma = 0.1;
  const auto s = markov_spectrum(gamma, 0.0);
  const auto slice = extract_slice(s, 1945.0, SliceDirection::cross_diagonal, 10.0 * oracle::kHbar * gamma);
  CHECK(fit_homogeneous_linewidth(slice, LineModel::lorentzian).gamma == doctest::Approx(gamma).epsilon(0.05));
}

TEST_CASE("strongly inhomogeneous slice recovers gamma = 10 ueV") {
  const double gamma = 0.0152, sigma = 30.0 * oracle::kHbar * gamma;
  const TimeGrid g(0.0, 1.0, 1024);
  TransformOptions opt;
  opt.zero_pad = 2;
  const auto s = spectrum_single_quantum(photon_echo_response(InhomogeneousDistribution::gaussian(1945.0, sigma),
                                                              TwoLevelEmitter(1945.0, 1.0, gamma), std::nullopt, g,
                                                              0.0, g),
                                         opt);
  const auto slice = extract_slice(s, 1945.0, SliceDirection::cross_diagonal, 5.0 * oracle::kHbar * gamma);
  CHECK(fit_homogeneous_linewidth(slice).gamma == doctest::Approx(gamma).epsilon(0.05));
}

TEST_CASE("activation fit") {
  SUBCASE("noiseless roundtrip") {
    std::vector<TemperaturePoint> pts;
    for (double t : kTemps) pts.push_back({t, activation_ref(0.01, 0.2, 10.0, t)});
    const auto f = fit_temperature_activation(pts);
    CHECK_FALSE(f.degenerate);
    CHECK(f.gamma0 == doctest::Approx(0.01).epsilon(0.02));
    CHECK(f.gamma_star == doctest::Approx(0.2).epsilon(0.02));
    CHECK(f.e_ph == doctest::Approx(10.0).epsilon(0.02));
    CHECK(f.gamma0 >= 0.0);
  }
  SUBCASE("constant data") {
    std::vector<TemperaturePoint> pts;
    for (double t : kTemps) pts.push_back({t, 0.05});
    const auto f = fit_temperature_activation(pts);
    CHECK(f.degenerate);
    CHECK(f.gamma0 == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(f.gamma_star == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("frozen phonons") {
    std::vector<TemperaturePoint> pts;
    for (double t : kTemps) pts.push_back({t, activation_ref(0.02, 0.5, 200.0, t)});
    const auto f = fit_temperature_activation(pts);
    for (double t : kTemps) CHECK(f(t) == doctest::Approx(0.02).epsilon(1e-6));
  }
  SUBCASE("preconditions") {
    std::vector<TemperaturePoint> pts{{10, 0.1}, {20, 0.2}, {30, 0.3}};
    CHECK_THROWS_AS(fit_temperature_activation(pts), InvalidArgument);
    pts.push_back({40, -0.1});
    CHECK_THROWS_AS(fit_temperature_activation(pts), InvalidArgument);
  }
}

TEST_CASE("diffusion fit") {
  std::vector<DiffusionPoint> pts;
  std::vector<double> xs, ys;
  for (double t : {0.0, 10.0, 25.0, 40.0, 70.0}) {
    pts.push_back({t, 1.59 * t + 3.0});
    xs.push_back(t);
    ys.push_back(1.59 * t + 3.0);
  }
  const auto f = fit_spectral_diffusion(pts);
  const auto [slope, intercept] = oracle::ols(xs, ys);
  CHECK(f.slope == doctest::Approx(1.59).epsilon(1e-12));
  CHECK(f.slope == doctest::Approx(slope).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(intercept).epsilon(1e-12));
  CHECK(f.residual_norm <= 1e-10);
  CHECK_THROWS_AS(fit_spectral_diffusion(std::span(pts).subspan(0, 2)), InvalidArgument);
}

TEST_CASE("no spectral diffusion gives zero slope") {
  const double gamma = 0.05, sigma = 10.0 * oracle::kHbar * gamma;
  const TimeGrid g(0.0, 0.5, 256);
  std::vector<DiffusionPoint> pts;
  for (double wait : {0.0, 20.0, 50.0, 100.0}) {
    const auto r = photon_echo_response(InhomogeneousDistribution::gaussian(1945.0, sigma),
                                        TwoLevelEmitter(1945.0, 1.0, gamma), std::nullopt, g, wait, g,
                                        {.diffusion_rate = 0.0});
    const auto slice = extract_slice(spectrum_single_quantum(r), 1945.0, SliceDirection::cross_diagonal, 0.1);
    pts.push_back({wait, rate_to_mhz(fit_homogeneous_linewidth(slice).gamma)});
  }
  const auto f = fit_spectral_diffusion(pts);
  CHECK(std::abs(f.slope) <= 3.0 * std::sqrt(f.covariance(0, 0)) + 1e-9);
}

TEST_CASE("non-Markovianity metric") {
  SUBCASE("exact exponential") {
    const auto d = decay_from([](double t) { return 3.0 * std::exp(-0.7 * t); }, 5.0, 50);
    CHECK(nonmarkovianity_metric(d, 0.2) <= 1e-12);
  }
  SUBCASE("Gaussian decay against a quadrature of the residual integral") {
    const std::size_t n = 4001;
    const auto d = decay_from([](double t) { return std::exp(-t * t / 2.0); }, 4.0, n);
    const auto m = static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(n)));
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < m; ++i) {
      xs.push_back(d[i].tau);
      ys.push_back(-d[i].tau * d[i].tau / 2.0);
    }
    const auto [b, a] = oracle::ols(xs, ys);
    const double t0 = d[m - 1].tau;
    const double integral =
        oracle::simpson([&](double t) { return std::abs(-t * t / 2.0 - (a + b * t)); }, t0, 4.0, 200000);
    const double expected = integral / (4.0 - t0);
    CHECK(nonmarkovianity_metric(d, 0.2) == doctest::Approx(expected).epsilon(1e-6));
  }
  SUBCASE("Kubo echo decay exceeds white noise of equal 1/e time") {
    const TimeGrid tau(0.0, 0.05, 100), t(0.0, 0.05, 200);
    const auto kubo = photon_echo_response(InhomogeneousDistribution::delta(1945.0), TwoLevelEmitter(1945.0, 1.0, 0.0),
                                           Lineshape::kubo(1.0, 1.0), tau, 0.0, t);
    // Re g(t_e) = 1 for the Kubo line shape
    double lo = 0.0, hi = 10.0;
    for (int k = 0; k < 100; ++k) {
      const double mid = 0.5 * (lo + hi);
      (oracle::kubo_g(1.0, 1.0, mid) < 1.0 ? lo : hi) = mid;
    }
    const auto white = photon_echo_response(InhomogeneousDistribution::delta(1945.0),
                                            TwoLevelEmitter(1945.0, 1.0, 1.0 / lo), std::nullopt, tau, 0.0, t);
    const double mk = nonmarkovianity_metric(echo_decay_curve(kubo), 0.2);
    const double mw = nonmarkovianity_metric(echo_decay_curve(white), 0.2);
    CHECK(mk > mw);
    CHECK(mk > 0.0);
  }
  SUBCASE("amplitude rescaling") {
    const auto d = decay_from([](double t) { return std::exp(-t * t / 2.0 - 0.3 * t); }, 4.0, 80);
    auto s = d;
    for (auto& p : s) p.amplitude *= 1e-5;
    CHECK(nonmarkovianity_metric(s, 0.25) == doctest::Approx(nonmarkovianity_metric(d, 0.25)).epsilon(1e-12));
  }
  SUBCASE("invalid input") {
    auto d = decay_from([](double t) { return std::exp(-t); }, 4.0, 20);
    CHECK_THROWS_AS(nonmarkovianity_metric(d, 1.0), InvalidArgument);
    CHECK_THROWS_AS(nonmarkovianity_metric(d, 0.0), InvalidArgument);
    d[5].amplitude = 0.0;
    CHECK_THROWS_AS(nonmarkovianity_metric(d, 0.5), NumericError);
  }
}

TEST_CASE("sideband dynamics") {
  SUBCASE("box over an empty region and box over the whole spectrum") {
    const EnergyAxis ax{-1.0, 0.1, 21}, ay{-2.0, 0.2, 21};
    std::vector<complex> v(ax.count * ay.count);
    for (std::size_t iy = 0; iy < ay.count; ++iy)
      for (std::size_t ix = 0; ix < ax.count; ++ix)
        if (ay[iy] < 0.0) v[iy * ax.count + ix] = complex(std::cos(ax[ix]), ay[iy]);
    const Spectrum2D s(SpectrumKind::zero_quantum, ax, ay, v, 0.0, 1);
    const std::vector<std::pair<double, Spectrum2D>> series{{0.0, s}, {1.0, s}};
    for (const auto& [tau, p] : sideband_dynamics(series, SpectralBox{-1.0, 1.0, 0.5, 2.0})) CHECK(p == 0.0);
    for (const auto& [tau, p] : sideband_dynamics(series, SpectralBox{ax.min, ax.max(), ay.min, ay.max()}))
      CHECK(p == doctest::Approx(s.total_power()).epsilon(1e-9));
    CHECK_THROWS_AS(sideband_dynamics(series, SpectralBox{-1.0, 1.0, 0.5, 9.0}), InvalidArgument);
  }

  SUBCASE("full box equals time-domain energy") {
    const TimeGrid tau(0.0, 0.5, 2), w(0.0, 0.1, 40), t(0.0, 0.1, 40);
    const auto r = zero_quantum_response(InhomogeneousDistribution::gaussian(1945.0, 1.0),
                                         TwoLevelEmitter(1945.0, 1.0, 0.3), Lineshape::kubo(1.0, 2.0), tau, w, t);
    const auto s = spectrum_zero_quantum(r, {}, 1);
    double energy = 0.0;
    for (std::size_t j = 0; j < w.count(); ++j)
      for (std::size_t k = 0; k < t.count(); ++k)
        energy += std::norm((j == 0 ? 0.5 : 1.0) * (k == 0 ? 0.5 : 1.0) * r(1, j, k));
    energy *= w.step() * t.step();
    const std::vector<std::pair<double, Spectrum2D>> series{{0.5, s}};
    const auto out = sideband_dynamics(
        series, SpectralBox{s.axis_x().min, s.axis_x().max(), s.axis_y().min, s.axis_y().max()});
    CHECK(out[0].second == doctest::Approx(energy).epsilon(1e-9));
  }

  SUBCASE("vibronic sideband does not decay exponentially") {
    const TimeGrid tau(0.0, 0.25, 8), w(0.0, 0.04, 256), t(0.0, 0.04, 64);
    const TimeGrid tab(0.0, 0.01, 1460);
    const auto bath = Lineshape::table(
        lineshape_function(NoiseModel(ThermalBath{SpectralDensity(DiscreteMode{26.0, 0.3, 0.1}), 10.0}), tab));
    const auto r = zero_quantum_response(InhomogeneousDistribution::gaussian(2000.0, 2.0),
                                         TwoLevelEmitter(2000.0, 1.0, 0.5), bath, tau, w, t);
    std::vector<std::pair<double, Spectrum2D>> series;
    for (std::size_t i = 0; i < tau.count(); ++i) series.emplace_back(tau[i], spectrum_zero_quantum(r, {}, i));
    const auto& ax = series[0].second.axis_x();
    const auto dyn = sideband_dynamics(series, SpectralBox{ax.min, ax.max(), 25.0, 27.0});
    std::vector<DecayPoint> d;
    for (const auto& [tv, p] : dyn) d.push_back({tv, p});
    const auto fit = fit_exponential(d);
    double worst = 0.0;
    for (const auto& p : d)
      worst = std::max(worst, std::abs(std::log(p.amplitude) - std::log(fit.amplitude) + fit.rate * p.tau));
    CHECK(worst > 0.1);
  }
}

TEST_CASE("fit uncertainties are calibrated under 1% noise") {
  NormalSampler noise(20240611);
  int line_hits = 0, act_hits = 0;
  const int reps = 200;
  const auto clean = synthetic_slice(LineModel::lorentzian, 1.0, 0.0, 0.05, 0.0, 0.5, 101);
  std::vector<TemperaturePoint> act_clean;
  for (double t : kTemps) act_clean.push_back({t, activation_ref(0.01, 0.2, 10.0, t)});
  for (int rep = 0; rep < reps; ++rep) {
    auto s = clean;
    for (auto& v : s.values) v *= 1.0 + 0.01 * noise();
    const auto f = fit_homogeneous_linewidth(s, LineModel::lorentzian);
    if (std::abs(f.half_width - 0.05) <= 3.0 * f.uncertainty * oracle::kHbar) ++line_hits;

    auto pts = act_clean;
    for (auto& p : pts) p.gamma *= 1.0 + 0.01 * noise();
    const auto a = fit_temperature_activation(pts);
    const bool ok = std::abs(a.gamma0 - 0.01) <= 3.0 * std::sqrt(a.covariance(0, 0)) &&
                    std::abs(a.gamma_star - 0.2) <= 3.0 * std::sqrt(a.covariance(1, 1)) &&
                    std::abs(a.e_ph - 10.0) <= 3.0 * std::sqrt(a.covariance(2, 2));
    if (ok) ++act_hits;
  }
  CHECK(line_hits >= 190);
  CHECK(act_hits >= 190);
}

TEST_CASE("diffusion calibration reproduces the requested slope") {
  const double gamma = 0.0152, sigma = 30.0 * oracle::kHbar * gamma;
  const double kappa = calibrate_diffusion_rate(1.98, gamma, sigma, 5.0);
  CHECK(kappa > 0.0);
  CHECK(calibrate_diffusion_rate(3.96, gamma, sigma, 5.0) == doctest::Approx(2.0 * kappa).epsilon(1e-9));
  CHECK_THROWS_AS(calibrate_diffusion_rate(1.98, gamma, 0.0, 5.0), InvalidArgument);
}
