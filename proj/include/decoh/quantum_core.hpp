#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "decoh/units.hpp"

namespace decoh {

using complex = std::complex<double>;

/// Two-level emitter with the ground state as energy zero.
class TwoLevelEmitter {
 public:
  /// Throws InvalidArgument unless mean_energy > 0, dipole >= 0 and
  /// pure_dephasing_rate >= 0.
  TwoLevelEmitter(double mean_energy_mev, double dipole = 1.0, double pure_dephasing_rate = 0.0);

  double mean_energy() const { return mean_energy_; }
  double dipole() const { return dipole_; }
  double pure_dephasing_rate() const { return gamma_; }
  /// Transition angular frequency in rad/ps.
  double angular_frequency() const { return mean_energy_ / kHbar; }

 private:
  double mean_energy_;
  double dipole_;
  double gamma_;
};

struct PureState {
  complex a0;
  complex a1;

  /// Throws InvalidArgument if |a0|^2 + |a1|^2 deviates from 1 by more than 1e-12.
  static PureState normalized(complex a0, complex a1);
  double norm() const { return std::norm(a0) + std::norm(a1); }
};

struct DensityMatrix2 {
  double rho00 = 1.0;
  double rho11 = 0.0;
  complex rho01{};  // a0 a1*
  complex rho10{};  // a1 a0*

  static DensityMatrix2 from_state(const PureState& state);
  /// Trace, hermiticity, population bounds and positivity within 1e-12.
  bool is_valid(double tol = 1e-12) const;
  /// Largest entrywise deviation of rho^2 from rho.
  double purity_defect() const;
};

class InhomogeneousDistribution {
 public:
  enum class Kind { delta, gaussian };

  static InhomogeneousDistribution delta(double center_mev);
  /// sigma == 0 yields the delta distribution; sigma < 0 throws.
  static InhomogeneousDistribution gaussian(double center_mev, double sigma_mev);

  Kind kind() const { return kind_; }
  double center() const { return center_; }
  double sigma() const { return sigma_; }

 private:
  InhomogeneousDistribution(Kind kind, double center, double sigma)
      : kind_(kind), center_(center), sigma_(sigma) {}
  Kind kind_;
  double center_;
  double sigma_;
};

/// Uniform sampling start + i * step, i in [0, count).
class TimeGrid {
 public:
  /// Throws unless step > 0 and count >= 2.
  TimeGrid(double start_ps, double step_ps, std::size_t count);

  double start() const { return start_; }
  double step() const { return step_; }
  std::size_t count() const { return count_; }
  double operator[](std::size_t i) const { return start_ + static_cast<double>(i) * step_; }
  double back() const { return (*this)[count_ - 1]; }
  /// Angular frequency spacing of the conjugate DFT axis, 2 pi / (step count).
  double angular_step() const { return 2.0 * kPi / (step_ * static_cast<double>(count_)); }

  bool operator==(const TimeGrid&) const = default;

 private:
  double start_;
  double step_;
  std::size_t count_;
};

PureState evolve_pure_state(const PureState& state, const TwoLevelEmitter& emitter, double t_ps);

/// mu * 2 Re[a0* a1 exp(-i w t)], amplitudes taken at t = 0.
double dipole_expectation(const PureState& state, const TwoLevelEmitter& emitter, double t_ps);

/// Deterministic draw of n transition energies (meV). Gaussian draws use
/// NormalSampler (Box-Muller over mt19937_64) seeded with `seed`.
std::vector<double> sample_frequencies(const InhomogeneousDistribution& dist, std::size_t n,
                                       std::uint64_t seed);

}  // namespace decoh
