#pragma once

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "collapse/flow.hpp"
#include "collapse/functionals.hpp"

namespace collapse {

/// Configuration or usage errors; the CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  double out = 0.0;
  const char* begin = v.data();
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(begin, end, out);
  if (res.ec != std::errc{} || res.ptr != end)
    throw ConfigError("invalid number for key '" + key + "': '" + raw +
                      "' (plain decimal literals only, no expressions)");
  return out;
}

inline long parse_long(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError("invalid integer for key '" + key + "': '" + raw + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError("invalid boolean for key '" + key + "': '" + raw + "'");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError("empty list for key '" + key + "'");
  return out;
}

}  // namespace detail

/// Fully resolved run description: file values overridden by command-line
/// pairs, validated against the module preconditions before any compute.
struct RunConfig {
  std::string command;
  std::filesystem::path out_dir = "out";

  double box_half_width = 8.0;
  int grid_n = 256;

  ModelParams params;
  FlowSettings flow;
  double init_width = 1.2;

  // sweeps
  std::vector<double> epsilons;  // explicit list wins over the generator
  double eps_first = 0.1, eps_ratio = 0.5;
  int eps_count = 6;

  // gn
  double r_max = 20.0;
  double gn_tol = 1e-8;
  std::vector<double> p_list{2.0};

  // check suites
  long gn_trials = 200, interaction_trials = 200, onsager_trials = 1000;
  std::vector<double> onsager_widths{0.5, 1.0, 2.0};

  // hartree-gap
  std::vector<double> n_list{64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384};
  std::vector<double> gap_widths{0.5, 1.0};

  int threads = 1;
  bool traps_on = true;

  std::map<std::string, std::string> raw;  // every accepted key = value pair
};

namespace detail {

inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "L",           "n",          "c1",          "a1",         "a2",
      "a12",         "p1",         "p2",          "z1x",        "z1y",
      "z2x",         "z2y",        "traps",       "mode",       "beta",
      "N",           "s1",         "s2",          "s12",        "dt",
      "max_steps",   "energy_tol", "residual_tol", "seed",      "init_width",
      "epsilons",    "eps_first",  "eps_ratio",   "eps_count",  "r_max",
      "tol",         "p_list",     "gn_trials",   "interaction_trials",
      "onsager_trials", "onsager_widths", "n_list", "gap_widths", "threads"};
  return keys;
}

inline Trap& trap_of(RunConfig& cfg, int i) {
  auto& t = i == 0 ? cfg.params.trap1 : cfg.params.trap2;
  if (!t) t = Trap{};
  return *t;
}

inline void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end())
    throw ConfigError("unknown key: " + key);
  cfg.raw[key] = trim(value);

  if (key == "L") cfg.box_half_width = parse_double(key, value);
  else if (key == "n") cfg.grid_n = static_cast<int>(parse_long(key, value));
  else if (key == "c1") {
    cfg.params.c1 = parse_double(key, value);
    cfg.params.c2 = 1.0 - cfg.params.c1;
  } else if (key == "a1") cfg.params.a1 = parse_double(key, value);
  else if (key == "a2") cfg.params.a2 = parse_double(key, value);
  else if (key == "a12") cfg.params.a12 = parse_double(key, value);
  else if (key == "p1") trap_of(cfg, 0).p = parse_double(key, value);
  else if (key == "p2") trap_of(cfg, 1).p = parse_double(key, value);
  else if (key == "z1x") trap_of(cfg, 0).z[0] = parse_double(key, value);
  else if (key == "z1y") trap_of(cfg, 0).z[1] = parse_double(key, value);
  else if (key == "z2x") trap_of(cfg, 1).z[0] = parse_double(key, value);
  else if (key == "z2y") trap_of(cfg, 1).z[1] = parse_double(key, value);
  else if (key == "traps") cfg.traps_on = parse_bool(key, value);
  else if (key == "mode") {
    const std::string v = trim(value);
    if (v == "nls") cfg.params.mode = InteractionMode::NLS;
    else if (v == "hartree") cfg.params.mode = InteractionMode::Hartree;
    else if (v == "modified-hartree") cfg.params.mode = InteractionMode::ModifiedHartree;
    else throw ConfigError("invalid mode '" + v + "' (nls | hartree | modified-hartree)");
  } else if (key == "beta") cfg.params.beta = parse_double(key, value);
  else if (key == "N") cfg.params.particle_count = parse_double(key, value);
  else if (key == "s1") cfg.params.s1 = parse_double(key, value);
  else if (key == "s2") cfg.params.s2 = parse_double(key, value);
  else if (key == "s12") cfg.params.s12 = parse_double(key, value);
  else if (key == "dt") cfg.flow.dt = parse_double(key, value);
  else if (key == "max_steps") cfg.flow.max_steps = parse_long(key, value);
  else if (key == "energy_tol") cfg.flow.energy_tol = parse_double(key, value);
  else if (key == "residual_tol") cfg.flow.residual_tol = parse_double(key, value);
  else if (key == "seed") cfg.flow.seed = static_cast<unsigned long long>(parse_long(key, value));
  else if (key == "init_width") cfg.init_width = parse_double(key, value);
  else if (key == "epsilons") cfg.epsilons = parse_list(key, value);
  else if (key == "eps_first") cfg.eps_first = parse_double(key, value);
  else if (key == "eps_ratio") cfg.eps_ratio = parse_double(key, value);
  else if (key == "eps_count") cfg.eps_count = static_cast<int>(parse_long(key, value));
  else if (key == "r_max") cfg.r_max = parse_double(key, value);
  else if (key == "tol") cfg.gn_tol = parse_double(key, value);
  else if (key == "p_list") cfg.p_list = parse_list(key, value);
  else if (key == "gn_trials") cfg.gn_trials = parse_long(key, value);
  else if (key == "interaction_trials") cfg.interaction_trials = parse_long(key, value);
  else if (key == "onsager_trials") cfg.onsager_trials = parse_long(key, value);
  else if (key == "onsager_widths") cfg.onsager_widths = parse_list(key, value);
  else if (key == "n_list") cfg.n_list = parse_list(key, value);
  else if (key == "gap_widths") cfg.gap_widths = parse_list(key, value);
  else if (key == "threads") cfg.threads = static_cast<int>(parse_long(key, value));
}

}  // namespace detail

inline void load_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("malformed line " + std::to_string(lineno) + " in " +
                        path.string() + " (expected key = value)");
    detail::apply_key(cfg, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

/// Validates cross-key constraints against the module preconditions; throws
/// ConfigError naming the violated condition.
inline void validate_config(RunConfig& cfg, double a_star_hint = 0.0) {
  if (!cfg.traps_on) {
    cfg.params.trap1.reset();
    cfg.params.trap2.reset();
  }
  if (!(cfg.box_half_width > 0.0)) throw ConfigError("L must be positive");
  if (cfg.grid_n < 64 || (cfg.grid_n & (cfg.grid_n - 1)) != 0)
    throw ConfigError("n must be a power of two >= 64");
  if (!(cfg.params.c1 > 0.0) || !(cfg.params.c1 < 1.0))
    throw ConfigError("c1 must lie in (0, 1)");
  if (!(cfg.flow.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(cfg.flow.energy_tol > 0.0) || !(cfg.flow.residual_tol > 0.0))
    throw ConfigError("tolerances must be positive");
  if (cfg.flow.max_steps < 1) throw ConfigError("max_steps must be at least 1");
  if (cfg.threads < 1) throw ConfigError("threads must be at least 1");
  for (const auto* trap : {&cfg.params.trap1, &cfg.params.trap2})
    if (*trap && !((*trap)->p > 0.0)) throw ConfigError("trap exponents must be positive");
  if (cfg.params.mode != InteractionMode::NLS && !(cfg.params.particle_count > 0.0))
    throw ConfigError("Hartree modes require N > 0");
  if (a_star_hint > 0.0) {
    // existence region of the two-component functional
    const auto& p = cfg.params;
    if (cfg.command == "minimize") {
      if (!(p.a1 < a_star_hint) || !(p.a2 < a_star_hint))
        throw ConfigError("existence requires a1 < a* and a2 < a* (a* = " +
                          std::to_string(a_star_hint) + ")");
      if (p.a12 > 0.0 && p.a1 > 0.0 && p.a2 > 0.0) {
        const double bound = std::sqrt((a_star_hint - p.a1) * (a_star_hint - p.a2) /
                                       (p.c1 * p.c2));
        if (!(p.a12 < bound))
          throw ConfigError(
              "existence requires a12 < sqrt((a*-a1)(a*-a2)/(c1 c2)) for attractive "
              "cross interactions");
      }
    }
  }
  if (!cfg.epsilons.empty()) {
    for (double e : cfg.epsilons)
      if (!(e > 0.0)) throw ConfigError("epsilons must be positive");
  } else {
    if (!(cfg.eps_first > 0.0) || !(cfg.eps_ratio > 0.0) || cfg.eps_ratio >= 1.0 ||
        cfg.eps_count < 1)
      throw ConfigError("epsilon generator needs eps_first > 0, eps_ratio in (0,1), "
                        "eps_count >= 1");
  }
}

inline int env_default_threads() {
  if (const char* env = std::getenv("COLLAPSE_LAB_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Canonical echo of every accepted key, written into the output directory so
/// a run can be reproduced exactly from its artifacts.
inline std::string resolved_config_text(const RunConfig& cfg) {
  std::string s = "command = " + cfg.command + "\n";
  for (const auto& [k, v] : cfg.raw) s += k + " = " + v + "\n";
  return s;
}

}  // namespace collapse
