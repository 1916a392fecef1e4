#pragma once

// Run configuration for the experiment drivers.
//
// Sources, lowest to highest precedence: built-in defaults, a flat
// `key = value` file (with # comments), command-line settings. Unknown keys
// are errors. Frequencies given in MHz are ordinary frequencies and are
// converted to angular rad/us (x 2 pi) when models are built; `theta` is the
// thermal frequency k_B T / hbar and is already angular.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nmq/dephasing.hpp"

namespace nmq {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment { sweep, channels, decompose, trajectory };
enum class ChannelSelection { s, a, sa, all };

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// MHz (cycles per us) to rad/us.
constexpr double angular(double mhz) noexcept { return two_pi * mhz; }

struct FrequencyGrid {
  double lo = 0.02;
  double hi = 0.20;
  double step = 0.01;

  std::vector<double> values() const {
    std::vector<double> out;
    for (std::size_t i = 0;; ++i) {
      const double v = std::round((lo + step * static_cast<double>(i)) * 1e12) / 1e12;
      if (v > hi + 1e-9 * step) break;
      out.push_back(v);
    }
    return out;
  }
};

struct RunConfig {
  std::optional<Experiment> experiment;

  // Drude-Lorentz bath
  double lambda = 2e-4;         // MHz
  double gamma = 0.9;           // MHz
  double theta = 1.0e3;         // rad/us
  double omega0 = 0.05;         // MHz
  FrequencyGrid omega0_grid;    // MHz, sweep only
  double omega_cutoff = 5000.0; // MHz
  double tail_epsilon = 0.0;

  // channels experiment: comb spacing per qubit, MHz
  double system_omega0 = 0.05;
  double ancilla_omega0 = 0.19;
  double omega_s = 0.0;  // Zeeman, MHz
  double omega_a = 0.0;

  // ensemble and grid
  std::size_t ensemble = 150;
  std::uint64_t seed = 20240601;
  double dt = 0.01;  // us
  double tf = 5.0;   // us
  unsigned threads = 0;
  bool parallel_sweep = false;

  std::optional<ChannelSelection> channels;
  EvolutionMode mode = EvolutionMode::analytic;

  // measures
  double positive_threshold = 1e-12;
  std::size_t smoothing_window = 0;
  double rank_floor = 1e-10;
  double dtheta = 1e-5;

  std::string out;

  ChannelSelection resolved_channels() const {
    if (channels) return *channels;
    return experiment == Experiment::channels ? ChannelSelection::all : ChannelSelection::s;
  }

  std::string resolved_out() const;

  SpectralModel model_for(double omega0_mhz) const {
    auto m = SpectralModel::drude_lorentz_cutoff(angular(lambda), angular(gamma), theta, angular(omega0_mhz),
                                                 angular(omega_cutoff));
    m.tail_epsilon = tail_epsilon;
    m.validate();
    return m;
  }

  EnsembleConfig ensemble_config() const {
    return EnsembleConfig{ensemble, seed, TimeGrid::horizon(tf, dt), threads};
  }

  /// Resolved settings as (key, value) pairs, in file syntax.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

// ---------------------------------------------------------------------------
// value formatting and parsing

inline std::string format_number(double v) {
  char buf[64];
  // integral values print without exponent (100000, not 1e+05)
  if (v == std::trunc(v) && std::abs(v) < 0x1.0p53) {
    const auto res = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(v));
    return std::string(buf, res.ptr);
  }
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_number(std::uint64_t v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::sweep: return "sweep";
    case Experiment::channels: return "channels";
    case Experiment::decompose: return "decompose";
    case Experiment::trajectory: return "trajectory";
  }
  return "?";
}

inline const char* to_string(ChannelSelection c) {
  switch (c) {
    case ChannelSelection::s: return "s";
    case ChannelSelection::a: return "a";
    case ChannelSelection::sa: return "sa";
    case ChannelSelection::all: return "all";
  }
  return "?";
}

inline std::string RunConfig::resolved_out() const {
  if (!out.empty()) return out;
  return std::string(experiment ? to_string(*experiment) : "run") + ".csv";
}

inline std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  const auto& g = omega0_grid;
  return {
      {"experiment", experiment ? to_string(*experiment) : ""},
      {"lambda", format_number(lambda)},
      {"gamma", format_number(gamma)},
      {"theta", format_number(theta)},
      {"omega0", format_number(omega0)},
      {"omega0_grid", format_number(g.lo) + ":" + format_number(g.hi) + ":" + format_number(g.step)},
      {"omega_cutoff", format_number(omega_cutoff)},
      {"tail_epsilon", format_number(tail_epsilon)},
      {"system_omega0", format_number(system_omega0)},
      {"ancilla_omega0", format_number(ancilla_omega0)},
      {"omega_s", format_number(omega_s)},
      {"omega_a", format_number(omega_a)},
      {"ensemble", format_number(static_cast<std::uint64_t>(ensemble))},
      {"seed", format_number(seed)},
      {"dt", format_number(dt)},
      {"tf", format_number(tf)},
      {"parallel_sweep", parallel_sweep ? "true" : "false"},
      {"channels", to_string(resolved_channels())},
      {"mode", to_string(mode)},
      {"positive_threshold", format_number(positive_threshold)},
      {"smoothing_window", format_number(static_cast<std::uint64_t>(smoothing_window))},
      {"rank_floor", format_number(rank_floor)},
      {"dtheta", format_number(dtheta)},
      {"out", resolved_out()},
  };
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view text, const std::string& where) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v))
    throw ConfigError(where + ": malformed number '" + std::string(text) + "'");
  return v;
}

inline std::uint64_t parse_unsigned(std::string_view text, const std::string& where) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end)
    throw ConfigError(where + ": expected a non-negative integer, got '" + std::string(text) + "'");
  return v;
}

inline bool parse_bool(std::string_view text, const std::string& where) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(where + ": expected true or false, got '" + std::string(text) + "'");
}

inline double positive(double v, const std::string& where) {
  if (!(v > 0.0)) throw ConfigError(where + ": value must be positive");
  return v;
}

inline double non_negative(double v, const std::string& where) {
  if (!(v >= 0.0)) throw ConfigError(where + ": value must be non-negative");
  return v;
}

}  // namespace detail

/// Applies one setting. `where` names the source (file line or flag) for
/// error messages.
inline void apply_setting(RunConfig& cfg, std::string_view key_in, std::string_view value_in, const std::string& where_in) {
  using namespace detail;
  const std::string key(trim(key_in));
  const std::string_view value = trim(value_in);
  const std::string where = where_in + " (key '" + key + "')";

  if (key == "experiment") {
    if (value == "sweep") cfg.experiment = Experiment::sweep;
    else if (value == "channels") cfg.experiment = Experiment::channels;
    else if (value == "decompose") cfg.experiment = Experiment::decompose;
    else if (value == "trajectory") cfg.experiment = Experiment::trajectory;
    else throw ConfigError(where + ": unknown experiment '" + std::string(value) + "'");
  } else if (key == "lambda") {
    cfg.lambda = positive(parse_double(value, where), where);
  } else if (key == "gamma") {
    cfg.gamma = positive(parse_double(value, where), where);
  } else if (key == "theta") {
    cfg.theta = positive(parse_double(value, where), where);
  } else if (key == "omega0") {
    cfg.omega0 = positive(parse_double(value, where), where);
  } else if (key == "omega0_grid") {
    const auto c1 = value.find(':');
    const auto c2 = c1 == std::string_view::npos ? c1 : value.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw ConfigError(where + ": expected lo:hi:step");
    FrequencyGrid g{parse_double(trim(value.substr(0, c1)), where), parse_double(trim(value.substr(c1 + 1, c2 - c1 - 1)), where),
                    parse_double(trim(value.substr(c2 + 1)), where)};
    if (!(g.lo > 0.0)) throw ConfigError(where + ": grid start must be positive");
    if (!(g.step > 0.0) || !(g.hi >= g.lo)) throw ConfigError(where + ": grid must be strictly increasing");
    cfg.omega0_grid = g;
  } else if (key == "omega_cutoff") {
    cfg.omega_cutoff = positive(parse_double(value, where), where);
  } else if (key == "tail_epsilon") {
    const double eps = non_negative(parse_double(value, where), where);
    if (eps >= 1.0) throw ConfigError(where + ": value must be below 1");
    cfg.tail_epsilon = eps;
  } else if (key == "system_omega0") {
    cfg.system_omega0 = positive(parse_double(value, where), where);
  } else if (key == "ancilla_omega0") {
    cfg.ancilla_omega0 = positive(parse_double(value, where), where);
  } else if (key == "omega_s") {
    cfg.omega_s = parse_double(value, where);
  } else if (key == "omega_a") {
    cfg.omega_a = parse_double(value, where);
  } else if (key == "ensemble") {
    const auto n = parse_unsigned(value, where);
    if (n == 0) throw ConfigError(where + ": at least one realization is required");
    cfg.ensemble = static_cast<std::size_t>(n);
  } else if (key == "seed") {
    cfg.seed = parse_unsigned(value, where);
  } else if (key == "dt") {
    cfg.dt = positive(parse_double(value, where), where);
  } else if (key == "tf") {
    cfg.tf = positive(parse_double(value, where), where);
  } else if (key == "threads") {
    cfg.threads = static_cast<unsigned>(parse_unsigned(value, where));
  } else if (key == "parallel_sweep") {
    cfg.parallel_sweep = parse_bool(value, where);
  } else if (key == "channels") {
    if (value == "s") cfg.channels = ChannelSelection::s;
    else if (value == "a") cfg.channels = ChannelSelection::a;
    else if (value == "sa") cfg.channels = ChannelSelection::sa;
    else if (value == "all") cfg.channels = ChannelSelection::all;
    else throw ConfigError(where + ": expected s, a, sa or all");
  } else if (key == "mode") {
    if (value == "analytic") cfg.mode = EvolutionMode::analytic;
    else if (value == "bessel") cfg.mode = EvolutionMode::bessel;
    else if (value == "mc" || value == "monte_carlo") cfg.mode = EvolutionMode::monte_carlo;
    else throw ConfigError(where + ": expected analytic, bessel or mc");
  } else if (key == "positive_threshold") {
    cfg.positive_threshold = non_negative(parse_double(value, where), where);
  } else if (key == "smoothing_window") {
    const auto w = parse_unsigned(value, where);
    if (w >= 3 && w % 2 == 0) throw ConfigError(where + ": smoothing window must be odd");
    cfg.smoothing_window = static_cast<std::size_t>(w);
  } else if (key == "rank_floor") {
    cfg.rank_floor = non_negative(parse_double(value, where), where);
  } else if (key == "dtheta") {
    cfg.dtheta = positive(parse_double(value, where), where);
  } else if (key == "out") {
    if (value.empty()) throw ConfigError(where + ": empty output path");
    cfg.out = std::string(value);
  } else {
    throw ConfigError(where_in + ": unknown key '" + key + "'");
  }
}

/// Parses `key = value` lines into cfg. `source` names the input in messages.
inline void apply_config_text(RunConfig& cfg, std::istream& in, const std::string& source) {
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;
    const std::string where = source + ":" + std::to_string(number);
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
    apply_setting(cfg, view.substr(0, eq), view.substr(eq + 1), where);
  }
}

struct FlagSetting {
  std::string key;
  std::string value;
  std::string flag;  // as typed, for messages
};

inline void validate(const RunConfig& cfg) {
  if (!cfg.experiment) throw ConfigError("missing experiment name");
  if (cfg.tf < cfg.dt) throw ConfigError("tf must be at least one time step");
  if (cfg.resolved_channels() == ChannelSelection::all && cfg.experiment != Experiment::channels)
    throw ConfigError("channels = all is only valid for the channels experiment");
}

/// Defaults, then the optional file, then flag settings.
inline RunConfig parse_config(const std::optional<std::string>& path, const std::vector<FlagSetting>& flags) {
  RunConfig cfg;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot open config file '" + *path + "'");
    apply_config_text(cfg, in, *path);
  }
  for (const auto& f : flags) apply_setting(cfg, f.key, f.value, "flag " + f.flag);
  validate(cfg);
  return cfg;
}

}  // namespace nmq
