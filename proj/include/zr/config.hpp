#pragma once

// Line-oriented run configuration: `key = value` entries under [section]
// headers, '#' comments. Unknown sections and keys are rejected with the
// offending line number. canonical_dump() renders a config with all defaults
// applied in a fixed order, so parse -> dump -> parse is idempotent and the
// dump is byte-stable.

#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>

#include "zr/simulator.hpp"

namespace zr {

struct RunConfig {
  ScenarioKind kind = ScenarioKind::free_run;
  std::optional<double> eps;  // defaults to the coefficient set's eps
  std::optional<double> dt;   // defaults to the step heuristic
  double t_end = 0.0;
  bool comoving = false;

  std::optional<PhysicalParams> physical;
  struct DirectCoeffs {
    double sigma1 = 0.0, sigma2 = 0.0, sigma3 = 0.0, delta = 0.0;
    double W = 0.0, D = 0.0, M = 0.0;
    double eps = 1.0;
  };
  std::optional<DirectCoeffs> direct;

  struct SolitonCfg {
    std::optional<SolitonFamily> family;
    double c = 0.0;
    double lambda = 0.0;
  };
  std::optional<SolitonCfg> soliton;

  int dim = 2;
  int nx = 64, ny = 64;
  double lx = 2.0 * pi, ly = 2.0 * pi;

  // Initial data. Defaults to a smooth trigonometric mix for the free-type
  // scenarios and to the zero perturbation for the perturbed ones.
  enum class InitialKind { def, zero, trig, bump, random, soliton, file };
  struct InitialCfg {
    InitialKind kind = InitialKind::def;
    double amplitude = 0.1;
    double conc = 8.0;   // bump concentration
    int carrier = 1;     // bump carrier mode
    std::uint64_t seed = 1;
    std::string file;
  };
  InitialCfg initial;

  int cadence = 10;
  std::vector<double> snapshot_times;
  std::string out_dir = "out";

  ZRCoefficients resolve_coeffs() const {
    if (physical) return br_coefficients(*physical);
    const DirectCoeffs& d = *direct;
    return ZRCoefficients::direct(d.sigma1, d.sigma2, d.sigma3, d.delta, d.W,
                                  d.D, d.M, d.eps);
  }

  Grid resolve_grid() const {
    return dim == 1 ? Grid::line(nx, lx) : Grid::box(nx, ny, lx, ly);
  }

  SolitonSpec resolve_soliton(const ZRCoefficients& zc) const {
    if (!soliton) throw ConfigError("config: missing [soliton] section");
    SolitonSpec s = SolitonSpec::make(soliton->c, soliton->lambda, zc);
    if (soliton->family && !s.degenerate() && *soliton->family != s.family)
      throw ConfigError("config: requested soliton family is not the "
                        "admissible one for (c, lambda)");
    return s;
  }

  Scenario to_scenario() const {
    Scenario sc;
    sc.kind = kind;
    sc.coeffs = resolve_coeffs();
    sc.grid = resolve_grid();
    sc.eps = eps.value_or(sc.coeffs.eps);
    sc.dt = dt.value_or(Scenario::default_dt(sc.grid, sc.coeffs));
    sc.t_end = t_end;
    sc.comoving = comoving;
    if (sc.is_perturbed()) {
      const SolitonSpec spec = resolve_soliton(sc.coeffs);
      sc.background = make_background(
          spec, sc.grid, kind == ScenarioKind::gauged_perturbed);
    }
    sc.validate();
    return sc;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& v, int line) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config line " + std::to_string(line) +
                      ": expected a number, got '" + v + "'");
  return x;
}

inline int parse_int(const std::string& v, int line) {
  const double x = parse_double(v, line);
  const int i = static_cast<int>(x);
  if (static_cast<double>(i) != x)
    throw ConfigError("config line " + std::to_string(line) +
                      ": expected an integer, got '" + v + "'");
  return i;
}

inline bool parse_bool(const std::string& v, int line) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("config line " + std::to_string(line) +
                    ": expected true/false, got '" + v + "'");
}

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  bool saw_kind = false;
  std::string section;
  std::map<std::string, int> seen;  // "section.key" -> line
  std::size_t pos = 0;
  int line = 0;

  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string raw = text.substr(
        pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line;
    const std::string s = detail::trim(raw);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("config line " + std::to_string(line) +
                          ": malformed section header");
      section = s.substr(1, s.size() - 2);
      if (section != "scenario" && section != "physical" &&
          section != "coefficients" && section != "soliton" &&
          section != "grid" && section != "output" && section != "initial")
        throw ConfigError("config line " + std::to_string(line) +
                          ": unknown section [" + section + "]");
      if (section == "physical") cfg.physical.emplace();
      if (section == "coefficients") cfg.direct.emplace();
      if (section == "soliton") cfg.soliton.emplace();
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line) +
                        ": expected key = value");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string val = detail::trim(s.substr(eq + 1));
    if (section.empty())
      throw ConfigError("config line " + std::to_string(line) +
                        ": key outside of any section");
    const std::string id = section + "." + key;
    if (seen.count(id))
      throw ConfigError("config line " + std::to_string(line) +
                        ": duplicate key '" + id + "'");
    seen[id] = line;

    auto unknown = [&]() -> ConfigError {
      return ConfigError("config line " + std::to_string(line) +
                         ": unknown key '" + key + "' in [" + section + "]");
    };

    if (section == "scenario") {
      if (key == "kind") {
        saw_kind = true;
        if (val == "free") cfg.kind = ScenarioKind::free_run;
        else if (val == "zakharov_limit") cfg.kind = ScenarioKind::zakharov_limit;
        else if (val == "perturbed") cfg.kind = ScenarioKind::perturbed;
        else if (val == "gauged_perturbed")
          cfg.kind = ScenarioKind::gauged_perturbed;
        else if (val == "symmetric_form") cfg.kind = ScenarioKind::symmetric_form;
        else
          throw ConfigError("config line " + std::to_string(line) +
                            ": unknown scenario kind '" + val + "'");
      } else if (key == "eps") cfg.eps = detail::parse_double(val, line);
      else if (key == "dt") cfg.dt = detail::parse_double(val, line);
      else if (key == "t_end") cfg.t_end = detail::parse_double(val, line);
      else if (key == "comoving") cfg.comoving = detail::parse_bool(val, line);
      else throw unknown();
    } else if (section == "physical") {
      PhysicalParams& p = *cfg.physical;
      if (key == "gamma") p.gamma = detail::parse_double(val, line);
      else if (key == "mu") p.mu = detail::parse_double(val, line);
      else if (key == "k") p.k = detail::parse_double(val, line);
      else if (key == "eps") p.eps = detail::parse_double(val, line);
      else if (key == "sigma_st") p.sigma_st = detail::parse_double(val, line);
      else if (key == "alpha") p.alpha_override = detail::parse_double(val, line);
      else throw unknown();
    } else if (section == "coefficients") {
      RunConfig::DirectCoeffs& d = *cfg.direct;
      if (key == "sigma1") d.sigma1 = detail::parse_double(val, line);
      else if (key == "sigma2") d.sigma2 = detail::parse_double(val, line);
      else if (key == "sigma3") d.sigma3 = detail::parse_double(val, line);
      else if (key == "delta") d.delta = detail::parse_double(val, line);
      else if (key == "W") d.W = detail::parse_double(val, line);
      else if (key == "D") d.D = detail::parse_double(val, line);
      else if (key == "M") d.M = detail::parse_double(val, line);
      else if (key == "eps") d.eps = detail::parse_double(val, line);
      else throw unknown();
    } else if (section == "soliton") {
      RunConfig::SolitonCfg& s2 = *cfg.soliton;
      if (key == "family") {
        if (val == "bright") s2.family = SolitonFamily::bright;
        else if (val == "dark") s2.family = SolitonFamily::dark;
        else
          throw ConfigError("config line " + std::to_string(line) +
                            ": unknown family '" + val + "'");
      } else if (key == "c") s2.c = detail::parse_double(val, line);
      else if (key == "lambda") s2.lambda = detail::parse_double(val, line);
      else throw unknown();
    } else if (section == "grid") {
      if (key == "dim") cfg.dim = detail::parse_int(val, line);
      else if (key == "nx") cfg.nx = detail::parse_int(val, line);
      else if (key == "ny") cfg.ny = detail::parse_int(val, line);
      else if (key == "lx") cfg.lx = detail::parse_double(val, line);
      else if (key == "ly") cfg.ly = detail::parse_double(val, line);
      else throw unknown();
    } else if (section == "initial") {
      RunConfig::InitialCfg& ic = cfg.initial;
      if (key == "kind") {
        if (val == "zero") ic.kind = RunConfig::InitialKind::zero;
        else if (val == "trig") ic.kind = RunConfig::InitialKind::trig;
        else if (val == "bump") ic.kind = RunConfig::InitialKind::bump;
        else if (val == "random") ic.kind = RunConfig::InitialKind::random;
        else if (val == "soliton") ic.kind = RunConfig::InitialKind::soliton;
        else if (val == "file") ic.kind = RunConfig::InitialKind::file;
        else
          throw ConfigError("config line " + std::to_string(line) +
                            ": unknown initial kind '" + val + "'");
      } else if (key == "amplitude") ic.amplitude = detail::parse_double(val, line);
      else if (key == "conc") ic.conc = detail::parse_double(val, line);
      else if (key == "carrier") ic.carrier = detail::parse_int(val, line);
      else if (key == "seed")
        ic.seed = static_cast<std::uint64_t>(detail::parse_int(val, line));
      else if (key == "file") ic.file = val;
      else throw unknown();
    } else if (section == "output") {
      if (key == "cadence") cfg.cadence = detail::parse_int(val, line);
      else if (key == "dir") cfg.out_dir = val;
      else if (key == "snapshots") {
        cfg.snapshot_times.clear();
        std::size_t p2 = 0;
        while (p2 <= val.size() && !val.empty()) {
          const std::size_t c2 = val.find(',', p2);
          const std::string tok = detail::trim(
              val.substr(p2, c2 == std::string::npos ? std::string::npos
                                                     : c2 - p2));
          if (!tok.empty())
            cfg.snapshot_times.push_back(detail::parse_double(tok, line));
          if (c2 == std::string::npos) break;
          p2 = c2 + 1;
        }
      } else throw unknown();
    }
  }

  if (!saw_kind) throw ConfigError("config: missing scenario.kind");
  if (cfg.physical && cfg.direct)
    throw ConfigError(
        "config: give either [physical] or [coefficients], not both");
  if (!cfg.physical && !cfg.direct)
    throw ConfigError("config: need a [physical] or [coefficients] section");
  if (cfg.cadence < 1) throw ConfigError("config: cadence must be >= 1");
  if (cfg.dim != 1 && cfg.dim != 2)
    throw ConfigError("config: grid dim must be 1 or 2");
  return cfg;
}

inline std::string canonical_dump(const RunConfig& cfg) {
  using detail::fmt_double;
  std::string o;
  auto kv = [&](const char* k, const std::string& v) {
    o += k;
    o += " = ";
    o += v;
    o += "\n";
  };
  o += "[scenario]\n";
  kv("kind", to_string(cfg.kind));
  const ZRCoefficients zc = cfg.resolve_coeffs();
  kv("eps", fmt_double(cfg.eps.value_or(zc.eps)));
  kv("dt", fmt_double(cfg.dt.value_or(
               Scenario::default_dt(cfg.resolve_grid(), zc))));
  kv("t_end", fmt_double(cfg.t_end));
  kv("comoving", cfg.comoving ? "true" : "false");
  if (cfg.physical) {
    const PhysicalParams& p = *cfg.physical;
    o += "\n[physical]\n";
    kv("gamma", fmt_double(p.gamma));
    kv("mu", fmt_double(p.mu));
    kv("k", fmt_double(p.k));
    kv("eps", fmt_double(p.eps));
    kv("sigma_st", fmt_double(p.sigma_st));
    if (p.alpha_override) kv("alpha", fmt_double(*p.alpha_override));
  } else {
    const RunConfig::DirectCoeffs& d = *cfg.direct;
    o += "\n[coefficients]\n";
    kv("sigma1", fmt_double(d.sigma1));
    kv("sigma2", fmt_double(d.sigma2));
    kv("sigma3", fmt_double(d.sigma3));
    kv("delta", fmt_double(d.delta));
    kv("W", fmt_double(d.W));
    kv("D", fmt_double(d.D));
    kv("M", fmt_double(d.M));
    kv("eps", fmt_double(d.eps));
  }
  if (cfg.soliton) {
    o += "\n[soliton]\n";
    if (cfg.soliton->family)
      kv("family",
         *cfg.soliton->family == SolitonFamily::bright ? "bright" : "dark");
    kv("c", fmt_double(cfg.soliton->c));
    kv("lambda", fmt_double(cfg.soliton->lambda));
  }
  if (cfg.initial.kind != RunConfig::InitialKind::def) {
    o += "\n[initial]\n";
    const char* names[] = {"",     "zero",    "trig", "bump",
                           "random", "soliton", "file"};
    kv("kind", names[static_cast<int>(cfg.initial.kind)]);
    kv("amplitude", fmt_double(cfg.initial.amplitude));
    kv("conc", fmt_double(cfg.initial.conc));
    kv("carrier", std::to_string(cfg.initial.carrier));
    kv("seed", std::to_string(cfg.initial.seed));
    if (cfg.initial.kind == RunConfig::InitialKind::file)
      kv("file", cfg.initial.file);
  }
  o += "\n[grid]\n";
  kv("dim", std::to_string(cfg.dim));
  kv("nx", std::to_string(cfg.nx));
  if (cfg.dim == 2) kv("ny", std::to_string(cfg.ny));
  kv("lx", fmt_double(cfg.lx));
  if (cfg.dim == 2) kv("ly", fmt_double(cfg.ly));
  o += "\n[output]\n";
  kv("cadence", std::to_string(cfg.cadence));
  std::string times;
  for (std::size_t i = 0; i < cfg.snapshot_times.size(); ++i) {
    if (i) times += ",";
    times += fmt_double(cfg.snapshot_times[i]);
  }
  kv("snapshots", times);
  kv("dir", cfg.out_dir);
  return o;
}

}  // namespace zr
