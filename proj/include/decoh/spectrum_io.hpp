#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "decoh/dynamics.hpp"
#include "decoh/spectra.hpp"

namespace decoh {

inline constexpr const char* kSpectrumFormatTag = "MDCS-GRID v1";
inline constexpr const char* kDecayFormatTag = "DECAY-TABLE v1";

struct SpectrumFile {
  Spectrum2D spectrum;
  std::uint64_t seed = 0;
};

/// Header lines `key=value` after the format tag, then one `re<TAB>im` line
/// per value in row-major (y, x) order at 17 significant digits.
void write_spectrum(std::ostream& out, const Spectrum2D& spectrum, std::uint64_t seed);
/// Throws ParseError (with the 1-based line) on any malformed or missing line.
SpectrumFile read_spectrum(std::istream& in);

void write_spectrum_file(const std::string& path, const Spectrum2D& spectrum, std::uint64_t seed);
SpectrumFile read_spectrum_file(const std::string& path);

struct DecayFile {
  std::vector<DecayPoint> points;
  std::uint64_t seed = 0;
};

void write_decay(std::ostream& out, const std::vector<DecayPoint>& points, std::uint64_t seed);
DecayFile read_decay(std::istream& in);
DecayFile read_decay_file(const std::string& path);
void write_decay_file(const std::string& path, const std::vector<DecayPoint>& points, std::uint64_t seed);

/// x, y, |S| columns for external plotting.
void write_plot_columns(std::ostream& out, const Spectrum2D& spectrum);

/// Human-readable description of every file format.
std::string describe_formats();

}  // namespace decoh
