#include "decoh/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "decoh/error.hpp"
#include "decoh/manifest.hpp"
#include "decoh/parallel.hpp"
#include "decoh/random.hpp"
#include "decoh/spectrum_io.hpp"
#include "decoh/units.hpp"

namespace fs = std::filesystem;

namespace decoh {

namespace {

std::string indexed(const char* prefix, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%03zu%s", prefix, i, ext);
  return buf;
}

std::optional<Lineshape> make_lineshape(const RunConfig& c, double reach) {
  if (c.bath == BathKind::none) return std::nullopt;
  if (c.bath == BathKind::kubo) return Lineshape::kubo(c.kubo_amplitude_per_ps, c.kubo_inverse_time_per_ps);
  double h = std::min(c.tau_step_ps, c.t_step_ps);
  if (c.scenario == Scenario::zero_quantum || c.scenario == Scenario::double_quantum) h = std::min(h, c.waiting_step_ps);
  h /= 4.0;
  const auto n = static_cast<std::size_t>(std::ceil(reach / h)) + 2;
  return Lineshape::table(lineshape_function(*make_noise_model(c), TimeGrid(0.0, h, n)));
}

double max_waiting(const RunConfig& c) {
  switch (c.scenario) {
    case Scenario::zero_quantum:
    case Scenario::double_quantum: return waiting_grid(c).back();
    case Scenario::diffusion_sweep:
      return std::max(c.waiting_ps, *std::max_element(c.waiting_times_ps.begin(), c.waiting_times_ps.end()));
    default: return c.waiting_ps;
  }
}

double reach(const RunConfig& c) { return tau_grid(c).back() + max_waiting(c) + t_grid(c).back(); }

void add_noise(std::vector<complex>& values, double relative, std::uint64_t seed) {
  if (relative <= 0.0) return;
  NormalSampler n(seed);
  for (auto& v : values) v *= 1.0 + relative * n();
}

Spectrum2D crop_around(const Spectrum2D& s, double center, double half) {
  return crop(s, center - half, center + half, center - half, center + half);
}

std::string format_fit_status(const SweepPoint& p) {
  if (!p.fit) return "failed: " + p.error;
  return p.fit->at_resolution_limit ? "resolution_limited" : "ok";
}

fs::path output_dir(const CliOptions& opt, const std::string& configured) {
  fs::path dir = opt.out ? fs::path(*opt.out) : fs::path(configured);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

RunConfig load_with_overrides(const CliOptions& opt) {
  auto c = load_run_config(opt.config);
  if (opt.seed) c.seed = *opt.seed;
  return c;
}

/// Normalized configuration without the output location.
std::string digest_text(RunConfig c) {
  c.output_dir = ".";
  return serialize(c);
}

Manifest base_manifest(const RunConfig& c) {
  Manifest m;
  m.set("format", "decoh-manifest v1");
  m.set("code_version", kCodeVersion);
  m.set("scenario", to_string(c.scenario));
  m.set("seed", std::to_string(c.seed));
  m.set("config_digest", config_digest(digest_text(c)));
  return m;
}

template <class F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    log << "error: " << (e.key().empty() ? std::string() : e.key() + ": ") << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    log << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericError& e) {
    log << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

std::string g(double v) { return format_double(v); }

}  // namespace

double diffusion_rate(const RunConfig& c) {
  if (c.diffusion_rate_per_ps) return *c.diffusion_rate_per_ps;
  if (c.target_slope_mhz_per_ps) {
    if (*c.target_slope_mhz_per_ps == 0.0) return 0.0;
    const double width_gammas = c.half_width_mev / (kHbar * c.gamma_per_ps);
    return calibrate_diffusion_rate(*c.target_slope_mhz_per_ps, c.gamma_per_ps, c.sigma_mev, width_gammas,
                                    c.line_model);
  }
  return 0.0;
}

SimulationOutput simulate(const RunConfig& c) {
  validate(c);
  SimulationOutput out;
  const auto opt = transform_options(c);
  const auto tau = tau_grid(c);
  const auto t = t_grid(c);
  auto finish = [&](Spectrum2D s, std::string name, std::size_t index) {
    add_noise(s.values(), c.relative_noise, derive_seed(c.seed, index));
    if (c.crop_half_width_mev) {
      const double center = s.kind() == SpectrumKind::single_quantum ? s.reference_energy() : 0.0;
      if (s.kind() == SpectrumKind::single_quantum)
        s = crop_around(s, center, *c.crop_half_width_mev);
      else
        s = crop(s, s.reference_energy() - *c.crop_half_width_mev, s.reference_energy() + *c.crop_half_width_mev,
                 s.axis_y().min, s.axis_y().max());
    }
    out.spectra.push_back({std::move(name), std::move(s)});
  };

  switch (c.scenario) {
    case Scenario::single_quantum: {
      EchoOptions eo;
      eo.diffusion_rate = diffusion_rate(c);
      const auto resp = photon_echo_response(make_ensemble(c), make_emitter(c), make_lineshape(c, reach(c)), tau,
                                             c.waiting_ps, t, eo);
      finish(spectrum_single_quantum(resp, opt), "single_quantum.mdcs", 0);
      break;
    }
    case Scenario::zero_quantum: {
      const auto resp = zero_quantum_response(make_ensemble(c), make_emitter(c), make_lineshape(c, reach(c)), tau,
                                              waiting_grid(c), t);
      for (std::size_t i = 0; i < tau.count(); ++i)
        finish(spectrum_zero_quantum(resp, opt, i), indexed("zero_quantum_tau", i, ".mdcs"), i);
      break;
    }
    case Scenario::double_quantum: {
      const auto resp = double_quantum_response(make_pair(c), tau, waiting_grid(c), t);
      for (std::size_t i = 0; i < tau.count(); ++i)
        finish(spectrum_double_quantum(resp, opt, i), indexed("double_quantum_tau", i, ".mdcs"), i);
      break;
    }
    case Scenario::echo_decay: {
      EchoOptions eo;
      eo.diffusion_rate = diffusion_rate(c);
      auto resp = photon_echo_response(make_ensemble(c), make_emitter(c), make_lineshape(c, reach(c)), tau,
                                       c.waiting_ps, t, eo);
      add_noise(resp.data(), c.relative_noise, derive_seed(c.seed, 0));
      out.decay = echo_decay_curve(resp);
      break;
    }
    case Scenario::temperature_sweep:
    case Scenario::diffusion_sweep:
      throw InvalidArgument("sweep scenarios run with the sweep command", "scenario");
  }
  return out;
}

SweepResult sweep(const RunConfig& c, unsigned threads) {
  validate(c);
  const bool thermal = c.scenario == Scenario::temperature_sweep;
  if (!thermal && c.scenario != Scenario::diffusion_sweep)
    throw InvalidArgument("scenario is not a sweep", "scenario");
  const auto& params = thermal ? c.temperatures_k : c.waiting_times_ps;
  if (params.size() < 3)
    throw InvalidArgument("sweep needs at least 3 points", thermal ? "sweep.temperatures_k" : "sweep.waiting_times_ps");

  SweepResult result;
  result.diffusion_rate = diffusion_rate(c);
  result.points.resize(params.size());
  const auto opt = transform_options(c);
  const auto tau = tau_grid(c);
  const auto t = t_grid(c);

  // lineshape tables are shared across waiting-time points
  std::optional<Lineshape> shared_bath;
  if (!thermal) shared_bath = make_lineshape(c, reach(c));

  parallel_for(params.size(), threads, [&](std::size_t i) {
    auto& p = result.points[i];
    p.parameter = params[i];
    try {
      RunConfig pc = c;
      double waiting = c.waiting_ps;
      std::optional<Lineshape> bath = shared_bath;
      if (thermal) {
        pc.gamma_per_ps = activation_model(c.gamma0_per_ps, c.gamma_star_per_ps, c.e_ph_mev, params[i]);
        pc.temperature_k = params[i];
        bath = make_lineshape(pc, reach(pc));
      } else {
        waiting = params[i];
      }
      EchoOptions eo;
      eo.diffusion_rate = result.diffusion_rate;
      const auto resp = photon_echo_response(make_ensemble(pc), make_emitter(pc), bath, tau, waiting, t, eo);
      auto s = spectrum_single_quantum(resp, opt);
      add_noise(s.values(), c.relative_noise, derive_seed(c.seed, i));
      const double half = c.half_width_mev + 2.0 * s.axis_x().step;
      p.spectrum = crop_around(s, c.energy_mev, half);
      const auto slice = extract_slice(*p.spectrum, c.energy_mev, SliceDirection::cross_diagonal, c.half_width_mev);
      p.fit = fit_homogeneous_linewidth(slice, c.line_model);
    } catch (const std::exception& e) {
      p.error = e.what();
    }
  });

  if (thermal) {
    std::vector<TemperaturePoint> pts;
    for (const auto& p : result.points)
      if (p.fit) pts.push_back({p.parameter, p.fit->gamma});
    try {
      result.activation = fit_temperature_activation(pts);
    } catch (const std::exception& e) {
      result.fit_error = e.what();
    }
  } else {
    std::vector<DiffusionPoint> pts;
    for (const auto& p : result.points)
      if (p.fit) pts.push_back({p.parameter, rate_to_mhz(p.fit->gamma)});
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (pts[i].gamma_mhz < pts[i - 1].gamma_mhz && pts[i].waiting_ps >= pts[i - 1].waiting_ps) result.monotonic = false;
    try {
      result.diffusion = fit_spectral_diffusion(pts);
    } catch (const std::exception& e) {
      result.fit_error = e.what();
    }
  }
  return result;
}

int run_simulate(const CliOptions& opt, std::ostream& log) {
  return guarded(log, [&] {
    const auto c = load_with_overrides(opt);
    if (c.scenario == Scenario::temperature_sweep || c.scenario == Scenario::diffusion_sweep)
      throw InvalidArgument("sweep scenarios run with the sweep command", "scenario");
    const auto out = simulate(c);
    const auto dir = output_dir(opt, c.output_dir);
    auto m = base_manifest(c);
    write_text(dir / "config.normalized.ini", serialize(c));
    m.add_file("config.normalized.ini", (dir / "config.normalized.ini").string());
    for (const auto& s : out.spectra) {
      const auto path = (dir / s.name).string();
      write_spectrum_file(path, s.spectrum, c.seed);
      m.add_file(s.name, path);
      const auto stem = std::filesystem::path(s.name).stem().string() + ".plot.tsv";
      std::ostringstream plot;
      write_plot_columns(plot, s.spectrum);
      write_text(dir / stem, plot.str());
      m.add_file(stem, (dir / stem).string());
    }
    if (!out.decay.empty()) {
      const auto path = (dir / "echo.decay").string();
      write_decay_file(path, out.decay, c.seed);
      m.add_file("echo.decay", path);
    }
    m.write((dir / "manifest.txt").string());
    log << "wrote " << out.spectra.size() + (out.decay.empty() ? 0 : 1) << " output file(s) to " << dir.string()
        << '\n';
    return static_cast<int>(kExitOk);
  });
}

int run_sweep(const CliOptions& opt, std::ostream& log) {
  return guarded(log, [&] {
    const auto c = load_with_overrides(opt);
    if (c.scenario != Scenario::temperature_sweep && c.scenario != Scenario::diffusion_sweep)
      throw InvalidArgument("sweep needs temperature_sweep or diffusion_sweep", "scenario");
    const auto r = sweep(c, opt.threads);
    const auto dir = output_dir(opt, c.output_dir);
    const bool thermal = c.scenario == Scenario::temperature_sweep;
    auto m = base_manifest(c);
    write_text(dir / "config.normalized.ini", serialize(c));
    m.add_file("config.normalized.ini", (dir / "config.normalized.ini").string());

    std::ostringstream table, report;
    table << "index\t" << (thermal ? "temperature_k" : "waiting_ps")
          << "\tgamma_per_ps\tgamma_uncertainty_per_ps\tgamma_mhz\tstatus\n";
    bool failed = false;
    for (std::size_t i = 0; i < r.points.size(); ++i) {
      const auto& p = r.points[i];
      if (p.spectrum) {
        const auto name = indexed("point_", i, ".mdcs");
        write_spectrum_file((dir / name).string(), *p.spectrum, derive_seed(c.seed, i));
        m.add_file(name, (dir / name).string());
      }
      table << i << '\t' << g(p.parameter) << '\t';
      if (p.fit)
        table << g(p.fit->gamma) << '\t' << g(p.fit->uncertainty) << '\t' << g(rate_to_mhz(p.fit->gamma));
      else
        table << "nan\tnan\tnan";
      table << '\t' << format_fit_status(p) << '\n';
      failed |= !p.fit;
    }

    report << "scenario " << to_string(c.scenario) << "\npoints " << r.points.size() << "\n";
    if (thermal) {
      if (r.activation) {
        const auto& a = *r.activation;
        report << "activation fit: gamma(T) = gamma0 + gamma_star / (exp(e_ph / kB T) - 1)\n"
               << "  gamma0_per_ps " << g(a.gamma0) << " +/- " << g(std::sqrt(std::max(0.0, a.covariance(0, 0))))
               << "\n  gamma_star_per_ps " << g(a.gamma_star) << " +/- "
               << g(std::sqrt(std::max(0.0, a.covariance(1, 1)))) << "\n  e_ph_mev " << g(a.e_ph) << " +/- "
               << g(std::sqrt(std::max(0.0, a.covariance(2, 2)))) << "\n  converged "
               << (a.converged ? "yes" : "no") << "\n  degenerate " << (a.degenerate ? "yes" : "no") << "\n";
      }
    } else {
      report << "diffusion_rate_per_ps " << g(r.diffusion_rate) << "\n";
      if (r.diffusion) {
        const auto& d = *r.diffusion;
        report << "diffusion fit: gamma = slope * T + intercept\n"
               << "  slope_mhz_per_ps " << g(d.slope) << " +/- " << g(std::sqrt(std::max(0.0, d.covariance(0, 0))))
               << "\n  intercept_mhz " << g(d.intercept) << " +/- "
               << g(std::sqrt(std::max(0.0, d.covariance(1, 1)))) << "\n";
      }
      report << "monotonic " << (r.monotonic ? "yes" : "no") << "\n";
    }
    if (!r.fit_error.empty()) report << "fit failed: " << r.fit_error << "\n";
    for (std::size_t i = 0; i < r.points.size(); ++i)
      if (!r.points[i].fit) report << "point " << i << " failed: " << r.points[i].error << "\n";

    write_text(dir / "table.tsv", table.str());
    write_text(dir / "report.txt", report.str());
    m.add_file("table.tsv", (dir / "table.tsv").string());
    m.add_file("report.txt", (dir / "report.txt").string());
    m.write((dir / "manifest.txt").string());
    log << report.str();
    return static_cast<int>((failed || !r.fit_error.empty()) ? kExitNumeric : kExitOk);
  });
}

int run_analyze(const CliOptions& opt, std::ostream& log) {
  return guarded(log, [&] {
    const auto a = load_analysis_config(opt.config);
    const auto dir = output_dir(opt, a.output_dir);
    std::ostringstream table, report;
    bool failed = false;

    switch (a.kind) {
      case AnalysisKind::slice: {
        table << "input\tanchor_mev\tmodel\tgamma_per_ps\tgamma_uncertainty_per_ps\tgamma_mhz\thalf_width_mev\tstatus\n";
        for (const auto& in : a.inputs) {
          const auto f = read_spectrum_file(in);
          const double anchor = a.anchor_mev.value_or(f.spectrum.reference_energy());
          SliceProfile slice;
          try {
            slice = extract_slice(f.spectrum, anchor, a.direction, a.half_width_mev);
          } catch (const InvalidArgument& e) {
            throw InvalidArgument(std::string(e.what()) + " (anchor " + g(anchor) + " meV, input " + in + ")",
                                  "analysis.anchor_mev");
          }
          report << "input " << in << "\n  anchor_mev " << g(anchor) << "\n  direction " << to_string(a.direction)
                 << "\n  model " << to_string(a.line_model) << "\n";
          try {
            const auto fit = fit_homogeneous_linewidth(slice, a.line_model);
            report << "  gamma_per_ps " << g(fit.gamma) << " +/- " << g(fit.uncertainty) << "\n  gamma_mhz "
                   << g(rate_to_mhz(fit.gamma)) << "\n  half_width_mev " << g(fit.half_width)
                   << "\n  iterations " << fit.iterations << "\n  resolution_limited "
                   << (fit.at_resolution_limit ? "yes" : "no") << "\n";
            table << in << '\t' << g(anchor) << '\t' << to_string(a.line_model) << '\t' << g(fit.gamma) << '\t'
                  << g(fit.uncertainty) << '\t' << g(rate_to_mhz(fit.gamma)) << '\t' << g(fit.half_width) << '\t'
                  << (fit.at_resolution_limit ? "resolution_limited" : "ok") << '\n';
          } catch (const NumericError& e) {
            failed = true;
            report << "  failed " << e.what() << "\n";
            table << in << '\t' << g(anchor) << '\t' << to_string(a.line_model) << "\tnan\tnan\tnan\tnan\tfailed\n";
          }
        }
        break;
      }
      case AnalysisKind::decay: {
        table << "input\tamplitude\trate_per_ps\tnonmarkovianity\tstatus\n";
        for (const auto& in : a.inputs) {
          const auto f = read_decay_file(in);
          try {
            const auto e = fit_exponential(f.points);
            const double nm = nonmarkovianity_metric(f.points, a.early_fraction);
            report << "input " << in << "\n  amplitude " << g(e.amplitude) << "\n  rate_per_ps " << g(e.rate)
                   << "\n  nonmarkovianity " << g(nm) << "\n";
            table << in << '\t' << g(e.amplitude) << '\t' << g(e.rate) << '\t' << g(nm) << "\tok\n";
          } catch (const NumericError& e) {
            failed = true;
            report << "input " << in << "\n  failed " << e.what() << "\n";
            table << in << "\tnan\tnan\tnan\tfailed\n";
          }
        }
        break;
      }
      case AnalysisKind::sideband: {
        std::vector<std::pair<double, Spectrum2D>> series;
        for (std::size_t i = 0; i < a.inputs.size(); ++i)
          series.emplace_back(a.delays_ps[i], read_spectrum_file(a.inputs[i]).spectrum);
        const auto dyn = sideband_dynamics(series, a.box);
        table << "tau_ps\tpower\n";
        report << "sideband power in box x [" << g(a.box.x_lo) << ", " << g(a.box.x_hi) << "] y [" << g(a.box.y_lo)
               << ", " << g(a.box.y_hi) << "] meV\n";
        for (const auto& [tau, pw] : dyn) {
          table << g(tau) << '\t' << g(pw) << '\n';
          report << "  tau_ps " << g(tau) << " power " << g(pw) << "\n";
        }
        break;
      }
    }
    write_text(dir / "report.txt", report.str());
    write_text(dir / "fits.tsv", table.str());
    log << report.str();
    return static_cast<int>(failed ? kExitNumeric : kExitOk);
  });
}

int run_formats(std::ostream& out) {
  out << describe_formats();
  return kExitOk;
}

}  // namespace decoh
