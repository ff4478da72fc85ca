#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "decoh/config.hpp"
#include "decoh/error.hpp"
#include "decoh/manifest.hpp"
#include "decoh/spectrum_io.hpp"

using namespace decoh;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("decoh_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct RunResult {
  int code;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const auto log = scratch_dir() / ("log_" + std::to_string(counter++) + ".txt");
  const std::string cmd = std::string(DECOH_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_all(log)};
}

std::string single_quantum_config(double gamma, double sigma = 0.0) {
  std::ostringstream s;
  s.precision(17);
  s << "scenario = single_quantum\nseed = 7\n[emitter]\nenergy_mev = 1945\ngamma_per_ps = " << gamma
    << "\n[ensemble]\nsigma_mev = " << sigma
    << "\n[grid]\ntau_step_ps = 0.5\ntau_count = 256\nt_step_ps = 0.5\nt_count = 256\n";
  return s.str();
}

fs::path config_file(const std::string& name, const std::string& text) {
  const auto p = scratch_dir() / name;
  write(p, text);
  return p;
}

std::size_t count_files(const fs::path& dir, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ext) ++n;
  return n;
}

RunConfig parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_run_config(parse_ini(in));
}

std::string sweep_config(const std::string& temps) {
  return "scenario = temperature_sweep\nseed = 3\n[emitter]\nenergy_mev = 1945\n"
         "[grid]\ntau_step_ps = 2\ntau_count = 128\nt_step_ps = 2\nt_count = 128\n"
         "[analysis]\nmodel = lorentzian\nhalf_width_mev = 0.25\n"
         "[activation]\ngamma0_per_ps = 0.01\ngamma_star_per_ps = 0.2\ne_ph_mev = 10\n"
         "[sweep]\ntemperatures_k = " +
         temps + "\n";
}

}  // namespace

TEST_CASE("config serialization is a fixed point") {
  const std::string text =
      "scenario = zero_quantum\nseed = 12\n[emitter]\nenergy_mev = 2000.125\ngamma_per_ps = 0.3\n"
      "[ensemble]\nsigma_mev = 1.7\n[bath]\nmodel = mode\ntemperature_k = 10\nmode_energy_mev = 26\n"
      "huang_rhys = 0.3\nmode_damping_per_ps = 0.1\n[grid]\nwaiting_step_ps = 0.04\nwaiting_count = 32\n";
  const auto c = parse_text(text);
  const auto once = serialize(c);
  const auto again = parse_text(once);
  CHECK(again == c);
  CHECK(serialize(again) == once);
  CHECK(c.energy_mev == 2000.125);
  CHECK(c.bath == BathKind::mode);
}

TEST_CASE("unknown keys and sections are rejected by name") {
  try {
    parse_text("[emitter]\nenergy_mev = 1945\nlinewidth = 3\n");
    FAIL("expected throw");
  } catch (const InvalidArgument& e) {
    CHECK(e.key() == "emitter.linewidth");
  }
  try {
    parse_text("[laser]\nfwhm = 3\n");
    FAIL("expected throw");
  } catch (const InvalidArgument& e) {
    CHECK(e.key().rfind("laser", 0) == 0);
  }
  try {
    parse_text("[ensemble]\nsigma_mev = -1\n");
    FAIL("expected throw");
  } catch (const InvalidArgument& e) {
    CHECK(e.key() == "ensemble.sigma_mev");
  }
  CHECK_THROWS_AS(parse_text("[emitter]\nenergy_mev\n"), ParseError);
}

TEST_CASE("spectrum file round trip") {
  const EnergyAxis ax{1940.1234567890123, 0.0123456789, 5}, ay{-3.0, 0.75, 4};
  std::vector<complex> v;
  for (std::size_t i = 0; i < ax.count * ay.count; ++i)
    v.emplace_back(std::sin(1.0 + static_cast<double>(i)) / 3.0, -std::exp(-0.37 * static_cast<double>(i)));
  const Spectrum2D s(SpectrumKind::zero_quantum, ax, ay, v, 1945.0 + 1.0 / 3.0, 1);
  std::stringstream buf;
  write_spectrum(buf, s, 99);
  const auto back = read_spectrum(buf);
  CHECK(back.seed == 99);
  CHECK(back.spectrum.kind() == SpectrumKind::zero_quantum);
  CHECK(back.spectrum.axis_x() == ax);
  CHECK(back.spectrum.axis_y() == ay);
  CHECK(back.spectrum.reference_energy() == s.reference_energy());
  CHECK(back.spectrum.y_sign() == 1);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto a = v[i], b = back.spectrum.values()[i];
    CHECK(std::abs(a.real() - b.real()) <= std::abs(std::nextafter(a.real(), 2.0 * a.real() + 1.0) - a.real()));
    CHECK(std::abs(a.imag() - b.imag()) <= std::abs(std::nextafter(a.imag(), 2.0 * a.imag() - 1.0) - a.imag()));
  }

  std::stringstream dbuf;
  const std::vector<DecayPoint> d{{0.0, 1.0}, {0.5, 0.25}, {1.0, 1.0 / 3.0}};
  write_decay(dbuf, d, 5);
  const auto dback = read_decay(dbuf);
  REQUIRE(dback.points.size() == 3);
  CHECK(dback.points[2].amplitude == d[2].amplitude);
  CHECK(dback.seed == 5);
}

TEST_CASE("truncated spectrum file reports its line") {
  const EnergyAxis ax{0.0, 1.0, 3}, ay{0.0, 1.0, 3};
  const Spectrum2D s(SpectrumKind::single_quantum, ax, ay, std::vector<complex>(9, complex(1.0, 2.0)), 1.0, -1);
  std::stringstream buf;
  write_spectrum(buf, s, 1);
  std::string text = buf.str();
  std::istringstream lines(text);
  std::string cut, line;
  for (int i = 0; i < 12 && std::getline(lines, line); ++i) cut += line + "\n";
  std::istringstream in(cut);
  try {
    read_spectrum(in);
    FAIL("expected throw");
  } catch (const ParseError& e) {
    CHECK(e.line() == 13);
  }
  std::istringstream extra(text + "1\t2\n");
  CHECK_THROWS_AS(read_spectrum(extra), ParseError);
}

TEST_CASE("manifest digests") {
  const auto a = parse_text(single_quantum_config(0.1));
  const auto b = parse_text(single_quantum_config(0.1000001));
  CHECK(config_digest(serialize(a)) == config_digest(serialize(a)));
  CHECK(config_digest(serialize(a)) != config_digest(serialize(b)));
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("simulate command") {
  const auto cfg = config_file("sq.ini", single_quantum_config(0.1));
  const auto out1 = scratch_dir() / "sim1", out2 = scratch_dir() / "sim2";
  const auto r1 = run_cli("simulate --config " + cfg.string() + " --out " + out1.string());
  CHECK(r1.code == 0);
  CHECK(count_files(out1, ".mdcs") == 1);
  CHECK(fs::exists(out1 / "manifest.txt"));
  const auto r2 = run_cli("simulate --config " + cfg.string() + " --out " + out2.string());
  CHECK(r2.code == 0);
  CHECK(read_all(out1 / "manifest.txt") == read_all(out2 / "manifest.txt"));

  const auto cfg_b = config_file("sq_b.ini", single_quantum_config(0.11));
  const auto out3 = scratch_dir() / "sim3";
  CHECK(run_cli("simulate --config " + cfg_b.string() + " --out " + out3.string()).code == 0);
  const auto m1 = Manifest::read((out1 / "manifest.txt").string()).entries();
  const auto m3 = Manifest::read((out3 / "manifest.txt").string()).entries();
  CHECK(m1.at("config_digest") != m3.at("config_digest"));
  CHECK(m1.at("file.single_quantum.mdcs") != m3.at("file.single_quantum.mdcs"));

  const auto out4 = scratch_dir() / "sim4";
  CHECK(run_cli("simulate --config " + cfg.string() + " --seed 8 --out " + out4.string()).code == 0);
  CHECK(Manifest::read((out4 / "manifest.txt").string()).entries().at("seed") == "8");

  SUBCASE("analyze recovers the configured gamma") {
    const auto an = config_file("an.ini", "[analysis]\nkind = slice\ninputs = " +
                                              (out1 / "single_quantum.mdcs").string() +
                                              "\nanchor_mev = 1945\nhalf_width_mev = 0.6\nmodel = lorentzian\n");
    const auto aout = scratch_dir() / "an1";
    REQUIRE(run_cli("analyze --config " + an.string() + " --out " + aout.string()).code == 0);
    std::istringstream table(read_all(aout / "fits.tsv"));
    std::string header, row;
    std::getline(table, header);
    std::getline(table, row);
    std::istringstream fields(row);
    std::string input, anchor, model, gamma;
    std::getline(fields, input, '\t');
    std::getline(fields, anchor, '\t');
    std::getline(fields, model, '\t');
    std::getline(fields, gamma, '\t');
    CHECK(std::stod(gamma) == doctest::Approx(0.1).epsilon(0.05));
    CHECK(read_all(aout / "report.txt").find("gamma_per_ps") != std::string::npos);
  }

  SUBCASE("slice outside the axes names the anchor") {
    const auto an = config_file("bad_an.ini", "[analysis]\nkind = slice\ninputs = " +
                                                  (out1 / "single_quantum.mdcs").string() +
                                                  "\nanchor_mev = 2100\nhalf_width_mev = 0.6\n");
    const auto r = run_cli("analyze --config " + an.string() + " --out " + (scratch_dir() / "an2").string());
    CHECK(r.code == 2);
    CHECK(r.output.find("anchor") != std::string::npos);
  }

  SUBCASE("truncated input is a parse error with a line number") {
    const auto full = read_all(out1 / "single_quantum.mdcs");
    std::size_t pos = 0;
    for (int i = 0; i < 30; ++i) pos = full.find('\n', pos) + 1;
    write(scratch_dir() / "trunc.mdcs", full.substr(0, pos));
    const auto an = config_file("trunc_an.ini", "[analysis]\nkind = slice\ninputs = " +
                                                    (scratch_dir() / "trunc.mdcs").string() +
                                                    "\nanchor_mev = 1945\nhalf_width_mev = 0.6\n");
    const auto r = run_cli("analyze --config " + an.string() + " --out " + (scratch_dir() / "an3").string());
    CHECK(r.code == 2);
    CHECK(r.output.find("line 31") != std::string::npos);
  }
}

TEST_CASE("invalid configuration exits with status 2 and names the key") {
  const auto cfg = config_file("neg.ini", single_quantum_config(0.1, -0.5));
  const auto r = run_cli("simulate --config " + cfg.string() + " --out " + (scratch_dir() / "neg").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("ensemble.sigma") != std::string::npos);
  const auto missing = run_cli("simulate --config " + (scratch_dir() / "nope.ini").string());
  CHECK(missing.code == 3);
}

TEST_CASE("sweep command") {
  SUBCASE("single-point sweep is rejected") {
    const auto cfg = config_file("sw1.ini", sweep_config("20"));
    CHECK(run_cli("sweep --config " + cfg.string() + " --out " + (scratch_dir() / "sw1").string()).code == 2);
  }
  SUBCASE("digests do not depend on the thread count") {
    const auto cfg = config_file("sw4.ini", sweep_config("10, 20, 40, 80"));
    const auto a = scratch_dir() / "sw_t1", b = scratch_dir() / "sw_t3";
    REQUIRE(run_cli("sweep --config " + cfg.string() + " --threads 1 --out " + a.string()).code == 0);
    REQUIRE(run_cli("sweep --config " + cfg.string() + " --threads 3 --out " + b.string()).code == 0);
    CHECK(read_all(a / "manifest.txt") == read_all(b / "manifest.txt"));
    CHECK(count_files(a, ".mdcs") == 4);
  }
}

TEST_CASE("formats command") {
  const auto r = run_cli("formats");
  CHECK(r.code == 0);
  CHECK(r.output.find(kSpectrumFormatTag) != std::string::npos);
}

TEST_CASE("cleanup") { fs::remove_all(scratch_dir()); }
