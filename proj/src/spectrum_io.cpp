#include "decoh/spectrum_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "decoh/error.hpp"

namespace decoh {

namespace {

std::string g17(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, p);
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string next(const char* what) {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError(std::string("unexpected end of file, expected ") + what, line_ + 1);
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }
  int line() const { return line_; }

  std::string value(const std::string& key) {
    auto l = next(key.c_str());
    const auto eq = l.find('=');
    if (eq == std::string::npos || l.substr(0, eq) != key) throw ParseError("expected " + key + "=", line_);
    return l.substr(eq + 1);
  }

  double number(std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ParseError("malformed number '" + std::string(s) + "'", line_);
    return v;
  }

  std::uint64_t integer(std::string_view s) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ParseError("malformed integer '" + std::string(s) + "'", line_);
    return v;
  }

  std::pair<double, double> pair(const char* what) {
    auto l = next(what);
    const auto tab = l.find('\t');
    if (tab == std::string::npos) throw ParseError("expected two tab-separated numbers", line_);
    return {number(std::string_view(l).substr(0, tab)), number(std::string_view(l).substr(tab + 1))};
  }

  EnergyAxis axis(const std::string& key) {
    std::istringstream ss(value(key));
    std::string a, b, c, unit, extra;
    if (!(ss >> a >> b >> c >> unit) || (ss >> extra)) throw ParseError("axis needs min step count unit", line_);
    if (unit != "meV") throw ParseError("unsupported axis unit " + unit, line_);
    EnergyAxis ax{number(a), number(b), static_cast<std::size_t>(integer(c))};
    if (ax.count < 2 || !(ax.step > 0.0)) throw ParseError("invalid axis", line_);
    return ax;
  }

 private:
  std::istream& in_;
  int line_ = 0;
};

std::string axis_text(const EnergyAxis& a) {
  return g17(a.min) + " " + g17(a.step) + " " + std::to_string(a.count) + " meV";
}

}  // namespace

void write_spectrum(std::ostream& out, const Spectrum2D& s, std::uint64_t seed) {
  out << kSpectrumFormatTag << '\n'
      << "kind=" << to_string(s.kind()) << '\n'
      << "axis_x=" << axis_text(s.axis_x()) << '\n'
      << "axis_y=" << axis_text(s.axis_y()) << '\n'
      << "reference_energy_mev=" << g17(s.reference_energy()) << '\n'
      << "y_sign=" << s.y_sign() << '\n'
      << "seed=" << seed << '\n';
  std::string buf;
  for (const auto& v : s.values()) {
    buf = g17(v.real());
    buf += '\t';
    buf += g17(v.imag());
    buf += '\n';
    out << buf;
  }
}

SpectrumFile read_spectrum(std::istream& in) {
  LineReader r(in);
  if (r.next("format tag") != kSpectrumFormatTag) throw ParseError("not an MDCS-GRID v1 file", r.line());
  auto kind_text = r.value("kind");
  auto kind = spectrum_kind_from_string(kind_text);
  if (!kind) throw ParseError("unknown spectrum kind " + kind_text, r.line());
  const auto ax = r.axis("axis_x");
  const auto ay = r.axis("axis_y");
  const double ref = r.number(r.value("reference_energy_mev"));
  const auto ys = r.value("y_sign");
  if (ys != "1" && ys != "-1") throw ParseError("y_sign must be 1 or -1", r.line());
  const auto seed = r.integer(r.value("seed"));
  std::vector<complex> values(ax.count * ay.count);
  for (auto& v : values) {
    auto [re, im] = r.pair("spectrum value");
    v = {re, im};
  }
  std::string trailing;
  while (std::getline(in, trailing))
    if (!trailing.empty() && trailing != "\r") throw ParseError("unexpected trailing data", r.line() + 1);
  return {Spectrum2D(*kind, ax, ay, std::move(values), ref, ys == "1" ? 1 : -1), seed};
}

void write_spectrum_file(const std::string& path, const Spectrum2D& spectrum, std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_spectrum(out, spectrum, seed);
  if (!out) throw IoError("write failed for " + path);
}

SpectrumFile read_spectrum_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_spectrum(in);
}

void write_decay(std::ostream& out, const std::vector<DecayPoint>& points, std::uint64_t seed) {
  out << kDecayFormatTag << '\n' << "count=" << points.size() << '\n' << "seed=" << seed << '\n';
  for (const auto& p : points) out << g17(p.tau) << '\t' << g17(p.amplitude) << '\n';
}

DecayFile read_decay(std::istream& in) {
  LineReader r(in);
  if (r.next("format tag") != kDecayFormatTag) throw ParseError("not a DECAY-TABLE v1 file", r.line());
  const auto n = r.integer(r.value("count"));
  DecayFile f;
  f.seed = r.integer(r.value("seed"));
  f.points.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    auto [tau, a] = r.pair("decay row");
    f.points.push_back({tau, a});
  }
  return f;
}

DecayFile read_decay_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_decay(in);
}

void write_decay_file(const std::string& path, const std::vector<DecayPoint>& points, std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_decay(out, points, seed);
  if (!out) throw IoError("write failed for " + path);
}

void write_plot_columns(std::ostream& out, const Spectrum2D& s) {
  out << "# x_mev\ty_mev\tmagnitude\n";
  for (std::size_t iy = 0; iy < s.axis_y().count; ++iy) {
    for (std::size_t ix = 0; ix < s.axis_x().count; ++ix)
      out << g17(s.axis_x()[ix]) << '\t' << g17(s.axis_y()[iy]) << '\t' << g17(std::abs(s(iy, ix))) << '\n';
    out << '\n';
  }
}

std::string describe_formats() {
  return R"(MDCS-GRID v1  (*.mdcs)
  line 1   MDCS-GRID v1
  kind=single_quantum | zero_quantum | double_quantum
  axis_x=<min> <step> <count> meV      emission energy
  axis_y=<min> <step> <count> meV      |absorption| energy, mixing energy or two-quantum energy
  reference_energy_mev=<E>             rotating-frame energy
  y_sign=-1 | 1                        -1: signed absorption variable is E - y
  seed=<uint64>
  then count_x * count_y lines "re<TAB>im", row-major over (y, x), 17 significant digits

DECAY-TABLE v1  (*.decay)
  line 1   DECAY-TABLE v1
  count=<n>
  seed=<uint64>
  then n lines "tau_ps<TAB>amplitude"

manifest.txt
  key=value lines: format, code_version, scenario, seed, config_digest,
  then file.<name>=<sha256> for every output file, sorted by name

table.tsv
  tab-separated sweep table with a header row, one row per sweep point in sweep order

report.txt
  human-readable fit summary

*.plot.tsv
  x_mev, y_mev, magnitude columns, blank line between rows
)";
}

}  // namespace decoh
