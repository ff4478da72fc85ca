#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "decoh/bath.hpp"
#include "decoh/quantum_core.hpp"

namespace decoh {

enum class PropagationMethod { analytic_markov, cumulant, stochastic };

/// Optical coherence of a two-level emitter, stored as the element that
/// rotates as exp(-i w t) (a1 a0* for a pure state).
struct CoherenceTrace {
  TimeGrid grid;
  std::vector<complex> values;
  PropagationMethod method = PropagationMethod::analytic_markov;
  std::size_t trajectories = 0;
  std::uint64_t seed = 0;
  /// Per-point standard error of the mean (stochastic traces only).
  std::vector<double> standard_error;

  /// Hermitian partner element.
  CoherenceTrace conjugate() const;
};

enum class Pathway { rephasing_single_quantum, zero_quantum, double_quantum };
const char* to_string(Pathway p);

/// Third-order signal S(tau, T, t), stored tau-major then T then t, in a frame
/// rotating at `reference_energy` for single-quantum delays and twice that
/// for the double-quantum waiting time.
class Response3 {
 public:
  using Waiting = std::variant<double, TimeGrid>;

  Response3(TimeGrid tau, Waiting waiting, TimeGrid t, Pathway pathway, double reference_energy_mev);

  const TimeGrid& tau() const { return tau_; }
  const TimeGrid& t() const { return t_; }
  const Waiting& waiting() const { return waiting_; }
  bool has_waiting_grid() const { return std::holds_alternative<TimeGrid>(waiting_); }
  std::size_t waiting_count() const;
  double waiting_time(std::size_t j) const;
  Pathway pathway() const { return pathway_; }
  double reference_energy() const { return reference_energy_; }

  complex& operator()(std::size_t i_tau, std::size_t j_wait, std::size_t k_t) {
    return data_[(i_tau * waiting_count() + j_wait) * t_.count() + k_t];
  }
  complex operator()(std::size_t i_tau, std::size_t j_wait, std::size_t k_t) const {
    return data_[(i_tau * waiting_count() + j_wait) * t_.count() + k_t];
  }
  std::vector<complex>& data() { return data_; }
  const std::vector<complex>& data() const { return data_; }

 private:
  TimeGrid tau_;
  Waiting waiting_;
  TimeGrid t_;
  Pathway pathway_;
  double reference_energy_;
  std::vector<complex> data_;
};

/// Two emitters with a flip-flop (dipole-dipole) coupling between the singly
/// excited states and an energy shift of the doubly excited state.
struct EmitterPair {
  TwoLevelEmitter emitter_a;
  TwoLevelEmitter emitter_b;
  double coupling_mev = 0.0;
  double biexciton_shift_mev = 0.0;
};

CoherenceTrace markovian_coherence(const TwoLevelEmitter& emitter, const TimeGrid& grid,
                                   complex initial = {0.5, 0.0});

/// Lineshape grid must equal the requested grid.
CoherenceTrace propagate_coherence_cumulant(const TwoLevelEmitter& emitter, const LineshapeTable& lineshape,
                                            const TimeGrid& grid, complex initial = {0.5, 0.0});

/// Monte-Carlo average of exp(-i Int dw) over n_traj noise realisations.
/// Trajectory i is seeded with derive_seed(seed, i) and partial sums are
/// reduced in a fixed block order, so the result is independent of
/// `threads`. Supports white and Ornstein-Uhlenbeck noise; the grid must
/// start at 0.
CoherenceTrace propagate_coherence_stochastic(const TwoLevelEmitter& emitter, const NoiseModel& nm,
                                              const TimeGrid& grid, std::size_t n_traj, std::uint64_t seed,
                                              unsigned threads = 1, complex initial = {0.5, 0.0});

struct EchoOptions {
  /// Rotating-frame energy; defaults to the ensemble centre.
  std::optional<double> reference_energy_mev;
  /// Frequency-correlation decay rate kappa during T, r(T) = exp(-kappa T).
  double diffusion_rate = 0.0;
  /// Adds the waiting-time cumulant terms Re[g(T) - g(tau+T) - g(T+t) + g(tau+T+t)],
  /// which carry vibrational coherence during T.
  bool waiting_time_memory = false;
};

/// Rephasing impulsive response of an inhomogeneous ensemble,
///   mu^4 exp(i w (tau - t)) exp(-g*(tau) - g(t)) F_inh(tau, T, t),
/// with g = gamma_emitter t + bath(t) and Gaussian disorder averaged in
/// closed form. The ensemble centre sets w; emitter.mean_energy must match it.
Response3 photon_echo_response(const InhomogeneousDistribution& ensemble, const TwoLevelEmitter& emitter,
                               const std::optional<Lineshape>& bath, const TimeGrid& tau,
                               const Response3::Waiting& waiting, const TimeGrid& t,
                               const EchoOptions& options = {});

/// Rephasing response over a full waiting-time grid with waiting-time memory
/// enabled, tagged for zero-quantum assembly.
Response3 zero_quantum_response(const InhomogeneousDistribution& ensemble, const TwoLevelEmitter& emitter,
                                const std::optional<Lineshape>& bath, const TimeGrid& tau,
                                const TimeGrid& waiting, const TimeGrid& t,
                                std::optional<double> reference_energy_mev = std::nullopt);

/// Double-quantum (k1 + k2 - k3) response of a coupled pair; the two
/// emission pathways cancel identically when coupling and shift vanish.
Response3 double_quantum_response(const EmitterPair& pair, const TimeGrid& tau, const TimeGrid& waiting,
                                  const TimeGrid& t, std::optional<double> reference_energy_mev = std::nullopt);

struct DecayPoint {
  double tau;
  double amplitude;
};

/// Time-integrated |S| over t for each tau at the first waiting time.
std::vector<DecayPoint> echo_decay_curve(const Response3& response);

}  // namespace decoh
