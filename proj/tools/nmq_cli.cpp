// Command-line driver: nmq <sweep|channels|decompose|trajectory> [flags]
//
// Exit codes: 0 success, 2 configuration error, 3 numeric failure, 4 I/O.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nmq/nmq.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_numeric = 3;
constexpr int exit_io = 4;

struct FlagValues {
  std::optional<std::string> config;
  std::vector<nmq::FlagSetting> settings;
  std::vector<std::string> raw_sets;
};

void add_flags(CLI::App& cmd, FlagValues& values) {
  cmd.add_option_function<std::string>("--config", [&values](const std::string& v) { values.config = v; },
                                       "flat key = value config file");
  struct Mapping {
    const char* flag;
    const char* key;
    const char* help;
  };
  static const Mapping mappings[] = {
      {"--out", "out", "output CSV path"},
      {"--seed", "seed", "master seed (u64)"},
      {"--ensemble", "ensemble", "realization count N"},
      {"--omega0", "omega0", "comb spacing, MHz"},
      {"--omega0-grid", "omega0_grid", "sweep grid lo:hi:step, MHz"},
      {"--tf", "tf", "horizon, us"},
      {"--dt", "dt", "grid step, us"},
      {"--channels", "channels", "s | a | sa (| all for channels)"},
      {"--mode", "mode", "analytic | bessel | mc"},
      {"--theta", "theta", "thermal frequency k_B T / hbar, rad/us"},
      {"--threads", "threads", "worker threads (0 = all cores)"},
  };
  for (const auto& m : mappings) {
    const std::string flag = m.flag;
    const std::string key = m.key;
    cmd.add_option_function<std::string>(
        flag, [&values, flag, key](const std::string& v) { values.settings.push_back({key, v, flag}); }, m.help);
  }
  cmd.add_option("--set", values.raw_sets, "additional KEY=VALUE settings");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-Markovian dephasing dynamics: simulation and measures"};
  app.set_version_flag("--version", nmq::tool_version);
  app.require_subcommand(1);

  FlagValues values;
  std::string experiment;
  for (const char* name : {"sweep", "channels", "decompose", "trajectory"}) {
    auto* cmd = app.add_subcommand(name);
    add_flags(*cmd, values);
    cmd->callback([&experiment, name] { experiment = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  try {
    std::vector<nmq::FlagSetting> settings{{"experiment", experiment, experiment}};
    settings.insert(settings.end(), values.settings.begin(), values.settings.end());
    for (const auto& raw : values.raw_sets) {
      const auto eq = raw.find('=');
      if (eq == std::string::npos) throw nmq::ConfigError("flag --set: expected KEY=VALUE, got '" + raw + "'");
      settings.push_back({raw.substr(0, eq), raw.substr(eq + 1), "--set " + raw.substr(0, eq)});
    }
    const auto cfg = nmq::parse_config(values.config, settings);
    for (const auto& path : nmq::run_experiment(cfg)) std::cerr << "wrote " << path << '\n';
  } catch (const nmq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const nmq::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return exit_io;
  } catch (const nmq::DomainError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return exit_numeric;
  } catch (const nmq::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return exit_numeric;
  }
  return 0;
}
