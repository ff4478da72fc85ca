#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "decoh/analysis.hpp"
#include "decoh/config.hpp"
#include "decoh/spectra.hpp"

namespace decoh {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitIo = 3, kExitNumeric = 4 };

struct CliOptions {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

struct NamedSpectrum {
  std::string name;
  Spectrum2D spectrum;
};

struct SimulationOutput {
  std::vector<NamedSpectrum> spectra;
  std::vector<DecayPoint> decay;
};

/// Spectral-diffusion rate from [diffusion]: the explicit rate, the rate
/// calibrated for the target slope, or 0.
double diffusion_rate(const RunConfig& c);

/// Single-, zero-, double-quantum or echo-decay scenario in memory.
SimulationOutput simulate(const RunConfig& c);

struct SweepPoint {
  double parameter = 0.0;  // K or ps
  std::optional<LinewidthFit> fit;
  std::optional<Spectrum2D> spectrum;  // cropped to the slice window
  std::string error;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::optional<ActivationFit> activation;
  std::optional<DiffusionFit> diffusion;
  double diffusion_rate = 0.0;
  bool monotonic = true;
  std::string fit_error;
};

/// Points run on `threads` workers; results are stored in sweep order.
SweepResult sweep(const RunConfig& c, unsigned threads);

int run_simulate(const CliOptions& opt, std::ostream& log);
int run_analyze(const CliOptions& opt, std::ostream& log);
int run_sweep(const CliOptions& opt, std::ostream& log);
int run_formats(std::ostream& out);

}  // namespace decoh
