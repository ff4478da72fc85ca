#include "decoh/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "decoh/error.hpp"

namespace decoh {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string qualified(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

double parse_double(const std::string& v, const std::string& name) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out))
    throw InvalidArgument("expected a finite number, got '" + v + "'", name);
  return out;
}

std::uint64_t parse_unsigned(const std::string& v, const std::string& name) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw InvalidArgument("expected a non-negative integer, got '" + v + "'", name);
  return out;
}

bool parse_bool(const std::string& v, const std::string& name) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw InvalidArgument("expected true or false, got '" + v + "'", name);
}

std::vector<double> parse_list(const std::string& v, const std::string& name) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), name));
  return out;
}

std::vector<std::string> parse_string_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    if (auto t = trim(item); !t.empty()) out.push_back(t);
  return out;
}

std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

template <class E, std::size_t N>
E parse_enum(const std::string& v, const std::string& name, const std::array<E, N>& values) {
  for (E e : values)
    if (v == to_string(e)) return e;
  throw InvalidArgument("unknown value '" + v + "'", name);
}

template <class C>
struct Field {
  std::string section;
  std::string key;
  std::function<void(C&, const std::string& value, const std::string& name)> set;
  std::function<std::optional<std::string>(const C&)> get;
};

template <class C>
Field<C> number(std::string s, std::string k, double C::*m) {
  return {std::move(s), std::move(k), [m](C& c, const std::string& v, const std::string& n) { c.*m = parse_double(v, n); },
          [m](const C& c) { return std::optional<std::string>(format_double(c.*m)); }};
}

template <class C>
Field<C> optional_number(std::string s, std::string k, std::optional<double> C::*m) {
  return {std::move(s), std::move(k), [m](C& c, const std::string& v, const std::string& n) { c.*m = parse_double(v, n); },
          [m](const C& c) {
            return (c.*m) ? std::optional<std::string>(format_double(*(c.*m))) : std::nullopt;
          }};
}

template <class C, class I>
Field<C> integer(std::string s, std::string k, I C::*m) {
  return {std::move(s), std::move(k),
          [m](C& c, const std::string& v, const std::string& n) { c.*m = static_cast<I>(parse_unsigned(v, n)); },
          [m](const C& c) { return std::optional<std::string>(std::to_string(c.*m)); }};
}

template <class C>
Field<C> boolean(std::string s, std::string k, bool C::*m) {
  return {std::move(s), std::move(k), [m](C& c, const std::string& v, const std::string& n) { c.*m = parse_bool(v, n); },
          [m](const C& c) { return std::optional<std::string>(c.*m ? "true" : "false"); }};
}

template <class C>
Field<C> list(std::string s, std::string k, std::vector<double> C::*m) {
  return {std::move(s), std::move(k), [m](C& c, const std::string& v, const std::string& n) { c.*m = parse_list(v, n); },
          [m](const C& c) {
            return (c.*m).empty() ? std::nullopt : std::optional<std::string>(format_list(c.*m));
          }};
}

template <class C>
Field<C> text(std::string s, std::string k, std::string C::*m) {
  return {std::move(s), std::move(k), [m](C& c, const std::string& v, const std::string&) { c.*m = v; },
          [m](const C& c) { return std::optional<std::string>(c.*m); }};
}

template <class C, class E, std::size_t N>
Field<C> enumeration(std::string s, std::string k, E C::*m, std::array<E, N> values) {
  return {std::move(s), std::move(k),
          [m, values](C& c, const std::string& v, const std::string& n) { c.*m = parse_enum(v, n, values); },
          [m](const C& c) { return std::optional<std::string>(to_string(c.*m)); }};
}

const std::vector<Field<RunConfig>>& run_fields() {
  using R = RunConfig;
  static const std::vector<Field<R>> fields = {
      enumeration<R>("", "scenario", &R::scenario,
                     std::array{Scenario::single_quantum, Scenario::zero_quantum, Scenario::double_quantum,
                                Scenario::echo_decay, Scenario::temperature_sweep, Scenario::diffusion_sweep}),
      integer<R>("", "seed", &R::seed),
      text<R>("", "output_dir", &R::output_dir),
      number<R>("emitter", "energy_mev", &R::energy_mev),
      number<R>("emitter", "dipole", &R::dipole),
      number<R>("emitter", "gamma_per_ps", &R::gamma_per_ps),
      number<R>("ensemble", "sigma_mev", &R::sigma_mev),
      enumeration<R>("bath", "model", &R::bath,
                     std::array{BathKind::none, BathKind::kubo, BathKind::ohmic, BathKind::super_ohmic,
                                BathKind::mode}),
      number<R>("bath", "temperature_k", &R::temperature_k),
      number<R>("bath", "kubo_amplitude_per_ps", &R::kubo_amplitude_per_ps),
      number<R>("bath", "kubo_inverse_time_per_ps", &R::kubo_inverse_time_per_ps),
      number<R>("bath", "coupling", &R::coupling),
      number<R>("bath", "cutoff_mev", &R::cutoff_mev),
      number<R>("bath", "power", &R::power),
      number<R>("bath", "mode_energy_mev", &R::mode_energy_mev),
      number<R>("bath", "huang_rhys", &R::huang_rhys),
      number<R>("bath", "mode_damping_per_ps", &R::mode_damping_per_ps),
      number<R>("grid", "tau_step_ps", &R::tau_step_ps),
      integer<R>("grid", "tau_count", &R::tau_count),
      number<R>("grid", "t_step_ps", &R::t_step_ps),
      integer<R>("grid", "t_count", &R::t_count),
      number<R>("grid", "waiting_ps", &R::waiting_ps),
      number<R>("grid", "waiting_step_ps", &R::waiting_step_ps),
      integer<R>("grid", "waiting_count", &R::waiting_count),
      number<R>("pair", "energy_b_mev", &R::energy_b_mev),
      number<R>("pair", "gamma_b_per_ps", &R::gamma_b_per_ps),
      number<R>("pair", "coupling_mev", &R::pair_coupling_mev),
      number<R>("pair", "biexciton_shift_mev", &R::biexciton_shift_mev),
      optional_number<R>("diffusion", "rate_per_ps", &R::diffusion_rate_per_ps),
      optional_number<R>("diffusion", "target_slope_mhz_per_ps", &R::target_slope_mhz_per_ps),
      integer<R>("spectrum", "zero_pad", &R::zero_pad),
      boolean<R>("spectrum", "cosine_taper", &R::cosine_taper),
      optional_number<R>("spectrum", "crop_half_width_mev", &R::crop_half_width_mev),
      enumeration<R>("analysis", "model", &R::line_model,
                     std::array{LineModel::sqrt_lorentzian, LineModel::lorentzian}),
      number<R>("analysis", "half_width_mev", &R::half_width_mev),
      number<R>("activation", "gamma0_per_ps", &R::gamma0_per_ps),
      number<R>("activation", "gamma_star_per_ps", &R::gamma_star_per_ps),
      number<R>("activation", "e_ph_mev", &R::e_ph_mev),
      list<R>("sweep", "temperatures_k", &R::temperatures_k),
      list<R>("sweep", "waiting_times_ps", &R::waiting_times_ps),
      number<R>("noise", "relative_sigma", &R::relative_noise),
  };
  return fields;
}

const std::vector<Field<AnalysisConfig>>& analysis_fields() {
  using A = AnalysisConfig;
  static const std::vector<Field<A>> fields = {
      enumeration<A>("analysis", "kind", &A::kind,
                     std::array{AnalysisKind::slice, AnalysisKind::decay, AnalysisKind::sideband}),
      {"analysis", "inputs",
       [](A& c, const std::string& v, const std::string&) { c.inputs = parse_string_list(v); },
       [](const A& c) {
         std::string out;
         for (std::size_t i = 0; i < c.inputs.size(); ++i) out += (i ? ", " : "") + c.inputs[i];
         return std::optional<std::string>(out);
       }},
      text<A>("analysis", "output_dir", &A::output_dir),
      optional_number<A>("analysis", "anchor_mev", &A::anchor_mev),
      number<A>("analysis", "half_width_mev", &A::half_width_mev),
      enumeration<A>("analysis", "direction", &A::direction,
                     std::array{SliceDirection::cross_diagonal, SliceDirection::diagonal}),
      enumeration<A>("analysis", "model", &A::line_model,
                     std::array{LineModel::sqrt_lorentzian, LineModel::lorentzian}),
      number<A>("analysis", "early_fraction", &A::early_fraction),
      list<A>("analysis", "delays_ps", &A::delays_ps),
      {"box", "x_lo_mev", [](A& c, const std::string& v, const std::string& n) { c.box.x_lo = parse_double(v, n); },
       [](const A& c) { return std::optional<std::string>(format_double(c.box.x_lo)); }},
      {"box", "x_hi_mev", [](A& c, const std::string& v, const std::string& n) { c.box.x_hi = parse_double(v, n); },
       [](const A& c) { return std::optional<std::string>(format_double(c.box.x_hi)); }},
      {"box", "y_lo_mev", [](A& c, const std::string& v, const std::string& n) { c.box.y_lo = parse_double(v, n); },
       [](const A& c) { return std::optional<std::string>(format_double(c.box.y_lo)); }},
      {"box", "y_hi_mev", [](A& c, const std::string& v, const std::string& n) { c.box.y_hi = parse_double(v, n); },
       [](const A& c) { return std::optional<std::string>(format_double(c.box.y_hi)); }},
  };
  return fields;
}

template <class C>
C apply_fields(const IniDocument& doc, const std::vector<Field<C>>& fields) {
  C c;
  std::set<std::string> known_sections;
  for (const auto& f : fields) known_sections.insert(f.section);
  for (const auto& [section, entries] : doc) {
    if (!known_sections.count(section)) {
      const std::string name = entries.empty() ? section : qualified(section, entries.begin()->first);
      throw InvalidArgument("unknown section [" + section + "]", name);
    }
    for (const auto& [key, value] : entries) {
      const Field<C>* match = nullptr;
      for (const auto& f : fields)
        if (f.section == section && f.key == key) match = &f;
      if (!match) throw InvalidArgument("unknown key", qualified(section, key));
      match->set(c, value.first, qualified(section, key));
    }
  }
  return c;
}

template <class C>
std::string serialize_fields(const C& c, const std::vector<Field<C>>& fields) {
  std::string out;
  std::string current;
  bool first_section = true;
  for (const auto& f : fields) {
    auto v = f.get(c);
    if (!v) continue;
    if (f.section != current) {
      out += (first_section && out.empty() ? "" : "\n");
      out += "[" + f.section + "]\n";
      current = f.section;
    }
    first_section = false;
    out += f.key + " = " + *v + "\n";
  }
  return out;
}

IniDocument load_ini(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_ini(in);
}

void require(bool ok, const std::string& what, const std::string& key) {
  if (!ok) throw InvalidArgument(what, key);
}

}  // namespace

const char* to_string(AnalysisKind k) {
  switch (k) {
    case AnalysisKind::slice: return "slice";
    case AnalysisKind::decay: return "decay";
    case AnalysisKind::sideband: return "sideband";
  }
  return "?";
}

const char* to_string(SliceDirection d) {
  return d == SliceDirection::cross_diagonal ? "cross_diagonal" : "diagonal";
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::single_quantum: return "single_quantum";
    case Scenario::zero_quantum: return "zero_quantum";
    case Scenario::double_quantum: return "double_quantum";
    case Scenario::echo_decay: return "echo_decay";
    case Scenario::temperature_sweep: return "temperature_sweep";
    case Scenario::diffusion_sweep: return "diffusion_sweep";
  }
  return "?";
}

const char* to_string(BathKind b) {
  switch (b) {
    case BathKind::none: return "none";
    case BathKind::kubo: return "kubo";
    case BathKind::ohmic: return "ohmic";
    case BathKind::super_ohmic: return "super_ohmic";
    case BathKind::mode: return "mode";
  }
  return "?";
}

IniDocument parse_ini(std::istream& in) {
  IniDocument doc;
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto c = line.find_first_of("#;"); c != std::string::npos) line.erase(c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", lineno);
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ParseError("empty section name", lineno);
      doc[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("missing key", lineno);
    auto& entries = doc[section];
    if (entries.count(key)) throw ParseError("duplicate key " + qualified(section, key), lineno);
    entries[key] = {trim(line.substr(eq + 1)), lineno};
  }
  return doc;
}

void validate(const RunConfig& c) {
  require(c.energy_mev > 0.0, "must be positive", "emitter.energy_mev");
  require(c.dipole >= 0.0, "must be non-negative", "emitter.dipole");
  require(c.gamma_per_ps >= 0.0, "must be non-negative", "emitter.gamma_per_ps");
  require(c.sigma_mev >= 0.0, "must be non-negative", "ensemble.sigma_mev");

  require(c.temperature_k >= 0.0, "must be non-negative", "bath.temperature_k");
  switch (c.bath) {
    case BathKind::none: break;
    case BathKind::kubo:
      require(c.kubo_amplitude_per_ps > 0.0, "must be positive", "bath.kubo_amplitude_per_ps");
      require(c.kubo_inverse_time_per_ps > 0.0, "must be positive", "bath.kubo_inverse_time_per_ps");
      break;
    case BathKind::ohmic:
    case BathKind::super_ohmic:
      require(c.coupling >= 0.0, "must be non-negative", "bath.coupling");
      require(c.cutoff_mev > 0.0, "must be positive", "bath.cutoff_mev");
      require(c.power >= 1.0, "must be at least 1", "bath.power");
      [[fallthrough]];
    case BathKind::mode:
      if (c.bath == BathKind::mode || c.huang_rhys > 0.0) {
        require(c.mode_energy_mev > 0.0, "must be positive", "bath.mode_energy_mev");
        require(c.huang_rhys >= 0.0, "must be non-negative", "bath.huang_rhys");
        require(c.mode_damping_per_ps > 0.0, "must be positive", "bath.mode_damping_per_ps");
      }
      break;
  }

  require(c.tau_step_ps > 0.0, "must be positive", "grid.tau_step_ps");
  require(c.tau_count >= 2, "needs at least 2 points", "grid.tau_count");
  require(c.t_step_ps > 0.0, "must be positive", "grid.t_step_ps");
  require(c.t_count >= 2, "needs at least 2 points", "grid.t_count");
  require(c.waiting_ps >= 0.0, "must be non-negative", "grid.waiting_ps");
  require(c.waiting_step_ps > 0.0, "must be positive", "grid.waiting_step_ps");
  require(c.waiting_count >= 2, "needs at least 2 points", "grid.waiting_count");

  require(c.energy_b_mev > 0.0, "must be positive", "pair.energy_b_mev");
  require(c.gamma_b_per_ps >= 0.0, "must be non-negative", "pair.gamma_b_per_ps");

  require(!(c.diffusion_rate_per_ps && c.target_slope_mhz_per_ps), "set either rate_per_ps or target_slope_mhz_per_ps",
          "diffusion.rate_per_ps");
  if (c.diffusion_rate_per_ps) require(*c.diffusion_rate_per_ps >= 0.0, "must be non-negative", "diffusion.rate_per_ps");
  if (c.target_slope_mhz_per_ps) {
    require(*c.target_slope_mhz_per_ps >= 0.0, "must be non-negative", "diffusion.target_slope_mhz_per_ps");
    require(c.sigma_mev > 0.0, "calibration needs inhomogeneous broadening", "ensemble.sigma_mev");
    require(c.gamma_per_ps > 0.0, "calibration needs a homogeneous rate", "emitter.gamma_per_ps");
  }

  require(c.zero_pad >= 1, "must be at least 1", "spectrum.zero_pad");
  if (c.crop_half_width_mev) require(*c.crop_half_width_mev > 0.0, "must be positive", "spectrum.crop_half_width_mev");
  require(c.half_width_mev > 0.0, "must be positive", "analysis.half_width_mev");
  require(c.relative_noise >= 0.0, "must be non-negative", "noise.relative_sigma");

  if (c.scenario == Scenario::temperature_sweep) {
    require(c.gamma0_per_ps >= 0.0, "must be non-negative", "activation.gamma0_per_ps");
    require(c.gamma_star_per_ps >= 0.0, "must be non-negative", "activation.gamma_star_per_ps");
    require(c.e_ph_mev > 0.0, "must be positive", "activation.e_ph_mev");
    require(c.temperatures_k.size() >= 3, "sweep needs at least 3 points", "sweep.temperatures_k");
    for (double t : c.temperatures_k) require(t > 0.0, "temperatures must be positive", "sweep.temperatures_k");
  }
  if (c.scenario == Scenario::diffusion_sweep) {
    require(c.waiting_times_ps.size() >= 3, "sweep needs at least 3 points", "sweep.waiting_times_ps");
    for (double t : c.waiting_times_ps) require(t >= 0.0, "waiting times must be non-negative", "sweep.waiting_times_ps");
  }
}

RunConfig parse_run_config(const IniDocument& doc) {
  auto c = apply_fields(doc, run_fields());
  validate(c);
  return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(load_ini(path)); }

std::string serialize(const RunConfig& c) { return serialize_fields(c, run_fields()); }

AnalysisConfig parse_analysis_config(const IniDocument& doc) {
  auto c = apply_fields(doc, analysis_fields());
  require(!c.inputs.empty(), "at least one input file required", "analysis.inputs");
  require(c.half_width_mev > 0.0, "must be positive", "analysis.half_width_mev");
  require(c.early_fraction > 0.0 && c.early_fraction < 1.0, "must lie in (0, 1)", "analysis.early_fraction");
  if (c.kind == AnalysisKind::sideband)
  {
    require(c.box.x_hi > c.box.x_lo && c.box.y_hi > c.box.y_lo, "empty box", "box.x_lo_mev");
    require(c.delays_ps.size() == c.inputs.size(), "one delay per input required", "analysis.delays_ps");
  }
  return c;
}

AnalysisConfig load_analysis_config(const std::string& path) { return parse_analysis_config(load_ini(path)); }

std::string serialize(const AnalysisConfig& c) { return serialize_fields(c, analysis_fields()); }

TwoLevelEmitter make_emitter(const RunConfig& c) { return TwoLevelEmitter(c.energy_mev, c.dipole, c.gamma_per_ps); }

InhomogeneousDistribution make_ensemble(const RunConfig& c) {
  return InhomogeneousDistribution::gaussian(c.energy_mev, c.sigma_mev);
}

std::optional<NoiseModel> make_noise_model(const RunConfig& c) {
  switch (c.bath) {
    case BathKind::none: return std::nullopt;
    case BathKind::kubo: return NoiseModel(OrnsteinUhlenbeck{c.kubo_amplitude_per_ps, c.kubo_inverse_time_per_ps});
    case BathKind::mode:
      return NoiseModel(ThermalBath{SpectralDensity(DiscreteMode{c.mode_energy_mev, c.huang_rhys, c.mode_damping_per_ps}),
                                    c.temperature_k});
    case BathKind::ohmic:
    case BathKind::super_ohmic: {
      SpectralDensity base = c.bath == BathKind::ohmic
                                 ? SpectralDensity(Ohmic{c.coupling, c.cutoff_mev})
                                 : SpectralDensity(SuperOhmicGaussian{c.coupling, c.cutoff_mev, c.power});
      if (c.huang_rhys > 0.0) {
        SpectralDensity mode(DiscreteMode{c.mode_energy_mev, c.huang_rhys, c.mode_damping_per_ps});
        return NoiseModel(ThermalBath{SpectralDensity(Composite{{base, mode}}), c.temperature_k});
      }
      return NoiseModel(ThermalBath{base, c.temperature_k});
    }
  }
  return std::nullopt;
}

TimeGrid tau_grid(const RunConfig& c) { return TimeGrid(0.0, c.tau_step_ps, c.tau_count); }
TimeGrid t_grid(const RunConfig& c) { return TimeGrid(0.0, c.t_step_ps, c.t_count); }
TimeGrid waiting_grid(const RunConfig& c) { return TimeGrid(c.waiting_ps, c.waiting_step_ps, c.waiting_count); }

EmitterPair make_pair(const RunConfig& c) {
  return EmitterPair{make_emitter(c), TwoLevelEmitter(c.energy_b_mev, c.dipole, c.gamma_b_per_ps), c.pair_coupling_mev,
                     c.biexciton_shift_mev};
}

TransformOptions transform_options(const RunConfig& c) {
  TransformOptions o;
  o.zero_pad = c.zero_pad;
  o.cosine_taper = c.cosine_taper;
  return o;
}

}  // namespace decoh
