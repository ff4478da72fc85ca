#pragma once

#include <numbers>

namespace decoh {

// Energies in meV, times in ps, rates in 1/ps.
inline constexpr double kHbar = 0.6582119569;      // meV ps
inline constexpr double kBoltzmann = 0.08617;      // meV / K
inline constexpr double kPi = std::numbers::pi;

inline constexpr double energy_to_angular(double energy_mev) { return energy_mev / kHbar; }
inline constexpr double angular_to_energy(double omega) { return omega * kHbar; }

// Angular rates are reported as ordinary frequencies nu = gamma / (2 pi).
// 1/ps = 1e6 MHz.
inline constexpr double rate_to_mhz(double gamma_per_ps) { return gamma_per_ps * 1.0e6 / (2.0 * kPi); }
inline constexpr double mhz_to_rate(double nu_mhz) { return nu_mhz * 2.0 * kPi / 1.0e6; }

}  // namespace decoh
