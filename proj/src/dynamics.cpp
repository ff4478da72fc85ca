#include "decoh/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "decoh/error.hpp"
#include "decoh/parallel.hpp"
#include "decoh/random.hpp"

namespace decoh {

CoherenceTrace CoherenceTrace::conjugate() const {
  CoherenceTrace out = *this;
  for (auto& v : out.values) v = std::conj(v);
  return out;
}

const char* to_string(Pathway p) {
  switch (p) {
    case Pathway::rephasing_single_quantum: return "rephasing_single_quantum";
    case Pathway::zero_quantum: return "zero_quantum";
    case Pathway::double_quantum: return "double_quantum";
  }
  return "unknown";
}

Response3::Response3(TimeGrid tau, Waiting waiting, TimeGrid t, Pathway pathway, double reference_energy_mev)
    : tau_(tau), waiting_(std::move(waiting)), t_(t), pathway_(pathway), reference_energy_(reference_energy_mev) {
  data_.assign(tau_.count() * waiting_count() * t_.count(), complex{});
}

std::size_t Response3::waiting_count() const {
  if (const auto* g = std::get_if<TimeGrid>(&waiting_)) return g->count();
  return 1;
}

double Response3::waiting_time(std::size_t j) const {
  if (const auto* g = std::get_if<TimeGrid>(&waiting_)) return (*g)[j];
  return std::get<double>(waiting_);
}

CoherenceTrace markovian_coherence(const TwoLevelEmitter& emitter, const TimeGrid& grid, complex initial) {
  CoherenceTrace trace{grid, std::vector<complex>(grid.count()), PropagationMethod::analytic_markov, 0, 0, {}};
  const double w = emitter.angular_frequency();
  const double gamma = emitter.pure_dephasing_rate();
  for (std::size_t i = 0; i < grid.count(); ++i) {
    const double t = grid[i];
    trace.values[i] = initial * std::polar(std::exp(-gamma * t), -w * t);
  }
  return trace;
}

CoherenceTrace propagate_coherence_cumulant(const TwoLevelEmitter& emitter, const LineshapeTable& lineshape,
                                            const TimeGrid& grid, complex initial) {
  if (!(lineshape.grid() == grid)) throw InvalidArgument("line-shape grid does not match the requested grid");
  CoherenceTrace trace{grid, std::vector<complex>(grid.count()), PropagationMethod::cumulant, 0, 0, {}};
  const double w = emitter.angular_frequency();
  for (std::size_t i = 0; i < grid.count(); ++i)
    trace.values[i] = initial * std::polar(1.0, -w * grid[i]) * std::exp(-lineshape.g_values()[i]);
  return trace;
}

namespace {

constexpr std::size_t kBlock = 64;

struct BlockSums {
  std::vector<double> re, im, re2, im2;
  explicit BlockSums(std::size_t n) : re(n), im(n), re2(n), im2(n) {}
};

}  // namespace

CoherenceTrace propagate_coherence_stochastic(const TwoLevelEmitter& emitter, const NoiseModel& nm,
                                              const TimeGrid& grid, std::size_t n_traj, std::uint64_t seed,
                                              unsigned threads, complex initial) {
  if (std::holds_alternative<ThermalBath>(nm.variant()))
    throw InvalidArgument("no trajectory sampler for spectral-density baths; use the cumulant path");
  if (n_traj < 100) throw InvalidArgument("stochastic propagation needs at least 100 trajectories");
  if (grid.start() != 0.0) throw InvalidArgument("stochastic propagation grid must start at t = 0");

  const std::size_t n = grid.count();
  const double h = grid.step();
  const std::size_t n_blocks = (n_traj + kBlock - 1) / kBlock;
  std::vector<BlockSums> blocks(n_blocks, BlockSums(n));

  const auto* white = std::get_if<WhiteNoise>(&nm.variant());
  const auto* ou = std::get_if<OrnsteinUhlenbeck>(&nm.variant());

  // OU sub-steps keep the trapezoidal phase integral well inside the
  // correlation time; the x update itself is the exact conditional law.
  std::size_t substeps = 1;
  double decay = 1.0, kick = 0.0;
  if (ou) {
    const double scale = std::max(ou->inverse_time, ou->amplitude);
    substeps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(h * scale / 0.01)));
    const double hs = h / static_cast<double>(substeps);
    decay = std::exp(-ou->inverse_time * hs);
    kick = ou->amplitude * std::sqrt(-std::expm1(-2.0 * ou->inverse_time * hs));
  }
  const double hs = h / static_cast<double>(substeps);
  const double white_sd = white ? std::sqrt(2.0 * white->rate * h) : 0.0;

  parallel_for(n_blocks, threads, [&](std::size_t b) {
    auto& acc = blocks[b];
    const std::size_t first = b * kBlock;
    const std::size_t last = std::min(n_traj, first + kBlock);
    for (std::size_t traj = first; traj < last; ++traj) {
      NormalSampler normal(derive_seed(seed, traj));
      double phase = 0.0;
      double x = ou ? ou->amplitude * normal() : 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) {
          if (white) {
            phase += white_sd * normal();
          } else {
            for (std::size_t s = 0; s < substeps; ++s) {
              const double next = decay * x + kick * normal();
              phase += 0.5 * hs * (x + next);
              x = next;
            }
          }
        }
        const double c = std::cos(phase), sn = -std::sin(phase);
        acc.re[k] += c;
        acc.im[k] += sn;
        acc.re2[k] += c * c;
        acc.im2[k] += sn * sn;
      }
    }
  });

  CoherenceTrace trace{grid, std::vector<complex>(n), PropagationMethod::stochastic, n_traj, seed, {}};
  trace.standard_error.resize(n);
  const double w = emitter.angular_frequency();
  const double count = static_cast<double>(n_traj);
  for (std::size_t k = 0; k < n; ++k) {
    double re = 0, im = 0, re2 = 0, im2 = 0;
    for (const auto& blk : blocks) {
      re += blk.re[k];
      im += blk.im[k];
      re2 += blk.re2[k];
      im2 += blk.im2[k];
    }
    const complex mean(re / count, im / count);
    const double var = std::max(0.0, re2 / count - mean.real() * mean.real()) +
                       std::max(0.0, im2 / count - mean.imag() * mean.imag());
    trace.values[k] = initial * std::polar(1.0, -w * grid[k]) * mean;
    trace.standard_error[k] = std::abs(initial) * std::sqrt(var / (count - 1.0));
  }
  return trace;
}

namespace {

struct TotalLineshape {
  double gamma;
  const std::optional<Lineshape>& bath;
  complex operator()(double t) const {
    complex g(gamma * t, 0.0);
    if (bath) g += (*bath)(t);
    return g;
  }
};

void check_reach(const std::optional<Lineshape>& bath, double needed) {
  if (bath && bath->max_time() < needed - 1e-9) {
    std::ostringstream msg;
    msg << "line-shape table ends at " << bath->max_time() << " ps but the response needs " << needed << " ps";
    throw InvalidArgument(msg.str());
  }
}

}  // namespace

Response3 photon_echo_response(const InhomogeneousDistribution& ensemble, const TwoLevelEmitter& emitter,
                               const std::optional<Lineshape>& bath, const TimeGrid& tau,
                               const Response3::Waiting& waiting, const TimeGrid& t, const EchoOptions& opt) {
  if (std::abs(ensemble.center() - emitter.mean_energy()) > 1e-9 * std::abs(ensemble.center()))
    throw InvalidArgument("emitter energy does not match the ensemble centre");
  if (tau.start() < 0.0 || t.start() < 0.0) throw InvalidArgument("delays must be non-negative");
  if (!(opt.diffusion_rate >= 0.0)) throw InvalidArgument("diffusion rate must be >= 0", "ensemble.diffusion_per_ps");
  const double reference = opt.reference_energy_mev.value_or(ensemble.center());
  Response3 resp(tau, waiting, t, Pathway::rephasing_single_quantum, reference);

  const double t_max_wait = resp.waiting_time(resp.waiting_count() - 1);
  if (resp.waiting_time(0) < 0.0) throw InvalidArgument("waiting time must be non-negative");
  check_reach(bath, opt.waiting_time_memory ? tau.back() + t_max_wait + t.back() : std::max(tau.back(), t.back()));

  const TotalLineshape g{emitter.pure_dephasing_rate(), bath};
  const double detuning = (ensemble.center() - reference) / kHbar;
  const double sigma = ensemble.sigma() / kHbar;
  const double mu4 = std::pow(emitter.dipole(), 4);

  std::vector<complex> g_tau(tau.count()), g_t(t.count());
  for (std::size_t i = 0; i < tau.count(); ++i) g_tau[i] = g(tau[i]);
  for (std::size_t k = 0; k < t.count(); ++k) g_t[k] = g(t[k]);

  for (std::size_t i = 0; i < tau.count(); ++i) {
    const double ti = tau[i];
    for (std::size_t j = 0; j < resp.waiting_count(); ++j) {
      const double tw = resp.waiting_time(j);
      const double r = std::exp(-opt.diffusion_rate * tw);
      const complex g_w = opt.waiting_time_memory ? g(tw) : complex{};
      const complex g_tw = opt.waiting_time_memory ? g(ti + tw) : complex{};
      for (std::size_t k = 0; k < t.count(); ++k) {
        const double tk = t[k];
        double memory = 0.0;
        if (opt.waiting_time_memory) memory = (g_w - g_tw - g(tw + tk) + g(ti + tw + tk)).real();
        const double inh = -0.5 * sigma * sigma * (tk * tk + ti * ti - 2.0 * r * tk * ti);
        const complex exponent = complex(0.0, detuning * (ti - tk)) - std::conj(g_tau[i]) - g_t[k] + memory + inh;
        resp(i, j, k) = mu4 * std::exp(exponent);
      }
    }
  }
  return resp;
}

Response3 zero_quantum_response(const InhomogeneousDistribution& ensemble, const TwoLevelEmitter& emitter,
                                const std::optional<Lineshape>& bath, const TimeGrid& tau, const TimeGrid& waiting,
                                const TimeGrid& t, std::optional<double> reference_energy_mev) {
  EchoOptions opt;
  opt.reference_energy_mev = reference_energy_mev;
  opt.waiting_time_memory = true;
  Response3 echo = photon_echo_response(ensemble, emitter, bath, tau, waiting, t, opt);
  Response3 out(tau, waiting, t, Pathway::zero_quantum, echo.reference_energy());
  out.data() = std::move(echo.data());
  return out;
}

Response3 double_quantum_response(const EmitterPair& pair, const TimeGrid& tau, const TimeGrid& waiting,
                                  const TimeGrid& t, std::optional<double> reference_energy_mev) {
  const auto& a = pair.emitter_a;
  const auto& b = pair.emitter_b;
  const double reference = reference_energy_mev.value_or(0.5 * (a.mean_energy() + b.mean_energy()));
  Response3 resp(tau, waiting, t, Pathway::double_quantum, reference);

  // Single-excitation block [[ea, J], [J, eb]] in the rotating frame,
  // diagonalised by a rotation; eigenvector k = (cos, sin) / (-sin, cos).
  const double ea = a.mean_energy() - reference;
  const double eb = b.mean_energy() - reference;
  const double jc = pair.coupling_mev;
  const double theta = jc == 0.0 ? 0.0 : 0.5 * std::atan2(2.0 * jc, ea - eb);
  const double cs = std::cos(theta), sn = std::sin(theta);
  const double ca[2] = {cs, -sn};
  const double cb[2] = {sn, cs};

  double energy[2], mu_g[2], mu_f[2], gamma_g[2];
  for (int k = 0; k < 2; ++k) {
    energy[k] = ca[k] * ca[k] * ea + cb[k] * cb[k] * eb + 2.0 * ca[k] * cb[k] * jc;
    mu_g[k] = ca[k] * a.dipole() + cb[k] * b.dipole();
    mu_f[k] = ca[k] * b.dipole() + cb[k] * a.dipole();
    gamma_g[k] = ca[k] * ca[k] * a.pure_dephasing_rate() + cb[k] * cb[k] * b.pure_dephasing_rate();
  }
  // f - k transitions: by the trace identity e_f - e_k = e_other + shift, and
  // the f - k coherence dephases like the other eigenstate's ground coherence.
  double energy_f[2], gamma_f[2];
  for (int k = 0; k < 2; ++k) {
    energy_f[k] = energy[1 - k] + pair.biexciton_shift_mev;
    gamma_f[k] = gamma_g[1 - k];
  }
  const double energy_ff = energy[0] + energy[1] + pair.biexciton_shift_mev;  // relative to 2 * reference
  const double gamma_ff = a.pure_dephasing_rate() + b.pure_dephasing_rate();

  std::vector<complex> emission(t.count());
  for (std::size_t m = 0; m < t.count(); ++m) {
    const double tm = t[m];
    complex sum{};
    for (int k = 0; k < 2; ++k) {
      const complex via_f = std::exp(complex(-gamma_f[k] * tm, -energy_f[k] / kHbar * tm));
      const complex via_g = std::exp(complex(-gamma_g[k] * tm, -energy[k] / kHbar * tm));
      sum += mu_f[k] * mu_g[k] * (via_f - via_g);
    }
    emission[m] = sum;
  }
  for (std::size_t i = 0; i < tau.count(); ++i) {
    for (std::size_t j = 0; j < waiting.count(); ++j) {
      complex first{};
      for (int k = 0; k < 2; ++k)
        first += mu_g[k] * mu_f[k] * std::exp(complex(-gamma_g[k] * tau[i], -energy[k] / kHbar * tau[i]));
      const complex two_quantum = std::exp(complex(-gamma_ff * waiting[j], -energy_ff / kHbar * waiting[j]));
      const complex prefactor = first * two_quantum;
      for (std::size_t m = 0; m < t.count(); ++m) resp(i, j, m) = prefactor * emission[m];
    }
  }
  return resp;
}

std::vector<DecayPoint> echo_decay_curve(const Response3& response) {
  if (response.pathway() == Pathway::double_quantum)
    throw InvalidArgument("echo decay needs a rephasing response");
  const auto& t = response.t();
  std::vector<DecayPoint> out;
  out.reserve(response.tau().count());
  for (std::size_t i = 0; i < response.tau().count(); ++i) {
    double area = 0.0;
    for (std::size_t k = 1; k < t.count(); ++k)
      area += 0.5 * t.step() * (std::abs(response(i, 0, k - 1)) + std::abs(response(i, 0, k)));
    out.push_back({response.tau()[i], area});
  }
  return out;
}

}  // namespace decoh
