#include "decoh/quantum_core.hpp"

#include <algorithm>
#include <cmath>

#include "decoh/error.hpp"
#include "decoh/random.hpp"

namespace decoh {

TwoLevelEmitter::TwoLevelEmitter(double mean_energy_mev, double dipole, double pure_dephasing_rate)
    : mean_energy_(mean_energy_mev), dipole_(dipole), gamma_(pure_dephasing_rate) {
  if (!(mean_energy_ > 0.0)) throw InvalidArgument("mean energy must be positive", "emitter.energy_mev");
  if (!(dipole_ >= 0.0)) throw InvalidArgument("dipole must be non-negative", "emitter.dipole");
  if (!(gamma_ >= 0.0))
    throw InvalidArgument("dephasing rate must be non-negative", "emitter.gamma_per_ps");
}

PureState PureState::normalized(complex a0, complex a1) {
  PureState s{a0, a1};
  if (std::abs(s.norm() - 1.0) > 1e-12) throw InvalidArgument("state is not normalized");
  return s;
}

DensityMatrix2 DensityMatrix2::from_state(const PureState& s) {
  return {std::norm(s.a0), std::norm(s.a1), s.a0 * std::conj(s.a1), s.a1 * std::conj(s.a0)};
}

bool DensityMatrix2::is_valid(double tol) const {
  if (std::abs(rho00 + rho11 - 1.0) > tol) return false;
  if (std::abs(rho10 - std::conj(rho01)) > tol) return false;
  if (rho00 < -tol || rho00 > 1.0 + tol || rho11 < -tol || rho11 > 1.0 + tol) return false;
  return rho00 * rho11 - std::norm(rho01) >= -tol;
}

double DensityMatrix2::purity_defect() const {
  // rho^2 for [[r00, r01], [r10, r11]]
  const complex s00 = rho00 * rho00 + rho01 * rho10;
  const complex s01 = rho00 * rho01 + rho01 * rho11;
  const complex s10 = rho10 * rho00 + rho11 * rho10;
  const complex s11 = rho10 * rho01 + rho11 * rho11;
  return std::max({std::abs(s00 - rho00), std::abs(s01 - rho01), std::abs(s10 - rho10),
                   std::abs(s11 - rho11)});
}

InhomogeneousDistribution InhomogeneousDistribution::delta(double center_mev) {
  return {Kind::delta, center_mev, 0.0};
}

InhomogeneousDistribution InhomogeneousDistribution::gaussian(double center_mev, double sigma_mev) {
  if (!(sigma_mev >= 0.0)) throw InvalidArgument("sigma must be non-negative", "ensemble.sigma");
  if (sigma_mev == 0.0) return delta(center_mev);
  return {Kind::gaussian, center_mev, sigma_mev};
}

TimeGrid::TimeGrid(double start_ps, double step_ps, std::size_t count)
    : start_(start_ps), step_(step_ps), count_(count) {
  if (!(step_ > 0.0) || !std::isfinite(step_)) throw InvalidArgument("grid step must be positive");
  if (count_ < 2) throw InvalidArgument("grid needs at least two points");
  if (!std::isfinite(start_)) throw InvalidArgument("grid start must be finite");
}

PureState evolve_pure_state(const PureState& state, const TwoLevelEmitter& emitter, double t_ps) {
  if (t_ps < 0.0) throw InvalidArgument("evolution time must be non-negative");
  // E0 = 0 gauge: only the excited amplitude picks up a phase.
  return {state.a0, state.a1 * std::polar(1.0, -emitter.angular_frequency() * t_ps)};
}

double dipole_expectation(const PureState& state, const TwoLevelEmitter& emitter, double t_ps) {
  const complex coherence =
      std::conj(state.a0) * state.a1 * std::polar(1.0, -emitter.angular_frequency() * t_ps);
  return emitter.dipole() * 2.0 * coherence.real();
}

std::vector<double> sample_frequencies(const InhomogeneousDistribution& dist, std::size_t n,
                                       std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("sample count must be positive");
  std::vector<double> out(n, dist.center());
  if (dist.kind() == InhomogeneousDistribution::Kind::delta) return out;
  NormalSampler normal(seed);
  for (auto& x : out) x += dist.sigma() * normal();
  return out;
}

}  // namespace decoh
