#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "decoh/analysis.hpp"
#include "decoh/bath.hpp"
#include "decoh/dynamics.hpp"
#include "decoh/spectra.hpp"

namespace decoh {

/// Sectioned key = value text. Keys before the first [section] belong to
/// the root section "". '#' and ';' start comments.
using IniDocument = std::map<std::string, std::map<std::string, std::pair<std::string, int>>>;

/// Throws ParseError on malformed lines and duplicate keys.
IniDocument parse_ini(std::istream& in);

enum class Scenario { single_quantum, zero_quantum, double_quantum, echo_decay, temperature_sweep, diffusion_sweep };
const char* to_string(Scenario s);

enum class BathKind { none, kubo, ohmic, super_ohmic, mode };
const char* to_string(BathKind b);

struct RunConfig {
  Scenario scenario = Scenario::single_quantum;
  std::uint64_t seed = 0;
  std::string output_dir = ".";

  double energy_mev = 1945.0;
  double dipole = 1.0;
  double gamma_per_ps = 0.01;

  double sigma_mev = 0.0;

  BathKind bath = BathKind::none;
  double temperature_k = 0.0;
  double kubo_amplitude_per_ps = 0.0;
  double kubo_inverse_time_per_ps = 0.0;
  double coupling = 0.0;
  double cutoff_mev = 0.0;
  double power = 3.0;
  double mode_energy_mev = 0.0;
  double huang_rhys = 0.0;
  double mode_damping_per_ps = 0.0;

  double tau_step_ps = 1.0;
  std::size_t tau_count = 64;
  double t_step_ps = 1.0;
  std::size_t t_count = 64;
  double waiting_ps = 0.0;
  double waiting_step_ps = 1.0;
  std::size_t waiting_count = 64;

  double energy_b_mev = 1945.0;
  double gamma_b_per_ps = 0.01;
  double pair_coupling_mev = 0.0;
  double biexciton_shift_mev = 0.0;

  std::optional<double> diffusion_rate_per_ps;
  std::optional<double> target_slope_mhz_per_ps;

  std::size_t zero_pad = 4;
  bool cosine_taper = false;
  std::optional<double> crop_half_width_mev;

  LineModel line_model = LineModel::sqrt_lorentzian;
  double half_width_mev = 0.1;

  double gamma0_per_ps = 0.0;
  double gamma_star_per_ps = 0.0;
  double e_ph_mev = 0.0;

  std::vector<double> temperatures_k;
  std::vector<double> waiting_times_ps;
  double relative_noise = 0.0;

  bool operator==(const RunConfig&) const = default;
};

/// Builds and validates a run configuration. Unknown sections or keys,
/// malformed values and out-of-range parameters throw InvalidArgument whose
/// key() is "section.key".
RunConfig parse_run_config(const IniDocument& doc);
RunConfig load_run_config(const std::string& path);

/// Canonical text: every key in a fixed order, numbers at 17 significant
/// digits. parse(serialize(c)) == c.
std::string serialize(const RunConfig& c);

/// Parameter checks shared by every entry point.
void validate(const RunConfig& c);

// Objects built from a validated configuration.
TwoLevelEmitter make_emitter(const RunConfig& c);
InhomogeneousDistribution make_ensemble(const RunConfig& c);
std::optional<NoiseModel> make_noise_model(const RunConfig& c);
TimeGrid tau_grid(const RunConfig& c);
TimeGrid t_grid(const RunConfig& c);
TimeGrid waiting_grid(const RunConfig& c);
EmitterPair make_pair(const RunConfig& c);
TransformOptions transform_options(const RunConfig& c);

/// Analysis request for `decoh analyze`.
enum class AnalysisKind { slice, decay, sideband };
const char* to_string(AnalysisKind k);

struct AnalysisConfig {
  AnalysisKind kind = AnalysisKind::slice;
  std::vector<std::string> inputs;
  std::optional<double> anchor_mev;
  double half_width_mev = 0.1;
  SliceDirection direction = SliceDirection::cross_diagonal;
  LineModel line_model = LineModel::sqrt_lorentzian;
  double early_fraction = 0.2;
  /// Population delay of each sideband input, same order as `inputs`.
  std::vector<double> delays_ps;
  SpectralBox box{0.0, 0.0, 0.0, 0.0};
  std::string output_dir = ".";

  bool operator==(const AnalysisConfig&) const = default;
};

AnalysisConfig parse_analysis_config(const IniDocument& doc);
AnalysisConfig load_analysis_config(const std::string& path);
std::string serialize(const AnalysisConfig& c);

/// Locale-independent shortest round-trip formatting.
std::string format_double(double v);

}  // namespace decoh
