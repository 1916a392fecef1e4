#pragma once

// Experiment drivers: omega0 sweep of the global measures, per-channel QFI
// runs, SLD/flow decomposition and single trajectories, each emitting CSV.

#include <cstddef>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nmq/config.hpp"
#include "nmq/dephasing.hpp"
#include "nmq/measures.hpp"

namespace nmq {

inline constexpr const char* tool_version = "nmq 1.0.0";

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> notes;  // extra "# " lines after the config echo
};

inline void write_csv(std::ostream& out, const RunConfig& cfg, const CsvTable& table) {
  out << "# " << tool_version << '\n';
  for (const auto& [key, value] : cfg.entries()) out << "# " << key << " = " << value << '\n';
  for (const auto& note : table.notes) out << "# " << note << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
    out << '\n';
  }
}

inline void write_csv_file(const std::string& path, const RunConfig& cfg, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(out, cfg, table);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

/// "dir/name.csv" + "_s" -> "dir/name_s.csv"
inline std::string suffixed_path(const std::string& path, const std::string& suffix) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

inline ChannelConfig channel_config(const RunConfig& cfg, ChannelSelection sel, const SpectralModel& system,
                                    const SpectralModel& ancilla) {
  ChannelConfig c;
  switch (sel) {
    case ChannelSelection::s: c = ChannelConfig::system_only(system); break;
    case ChannelSelection::a: c = ChannelConfig::ancilla_only(ancilla); break;
    case ChannelSelection::sa: c = ChannelConfig::both(system, ancilla); break;
    case ChannelSelection::all: throw ConfigError("channel selection 'all' does not name a single configuration");
  }
  c.omega_s = angular(cfg.omega_s);
  c.omega_a = angular(cfg.omega_a);
  return c;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepRow {
  double omega0 = 0.0;  // MHz
  std::size_t modes = 0;
  double n0 = 0.0;
  double blp = 0.0;
  double rhp = 0.0;
};

inline std::vector<SweepRow> run_sweep(const RunConfig& cfg) {
  const auto freqs = cfg.omega0_grid.values();
  if (freqs.empty()) throw ConfigError("omega0 grid is empty");
  const auto sel = cfg.resolved_channels();
  const MeasureConfig mcfg{cfg.tf, cfg.positive_threshold};
  std::vector<SweepRow> rows(freqs.size());

  auto run_point = [&](std::size_t i, unsigned inner_threads) {
    const auto model = cfg.model_for(freqs[i]);
    auto ens = cfg.ensemble_config();
    ens.threads = inner_threads;
    const auto traj = evolve(channel_config(cfg, sel, model, model), ens, cfg.mode);
    rows[i] = SweepRow{freqs[i], model.size(), n0_measure(traj, mcfg), blp_measure(traj, mcfg), rhp_measure(traj, mcfg)};
  };

  if (cfg.parallel_sweep)
    parallel_for(freqs.size(), cfg.threads, [&](std::size_t i) { run_point(i, 1); });
  else
    for (std::size_t i = 0; i < freqs.size(); ++i) run_point(i, cfg.threads);
  return rows;
}

inline CsvTable sweep_table(const std::vector<SweepRow>& rows) {
  CsvTable t{{"omega0_mhz", "modes", "n0", "n_blp", "n_rhp"}, {}, {}};
  for (const auto& r : rows) t.rows.push_back({r.omega0, static_cast<double>(r.modes), r.n0, r.blp, r.rhp});
  return t;
}

// ---------------------------------------------------------------------------
// channels

struct ChannelRun {
  ChannelSelection selection = ChannelSelection::s;
  Trajectory analytic;
  Trajectory monte_carlo;
  std::vector<double> q;        // spectral QFI on the trajectory of the configured mode
  std::vector<double> flow;     // central-difference (or smoothed) dQ/dt
  std::vector<QfiPair> closed;  // closed forms from chi, chi'
};

inline ChannelRun run_channel(const RunConfig& cfg, ChannelSelection sel) {
  const auto system = cfg.model_for(cfg.system_omega0);
  const auto ancilla = cfg.model_for(cfg.ancilla_omega0);
  const auto config = channel_config(cfg, sel, system, ancilla);
  const auto ens = cfg.ensemble_config();
  const auto gen = Generator::collective_z();

  ChannelRun run;
  run.selection = sel;
  run.analytic = evolve(config, ens, EvolutionMode::analytic);
  run.monte_carlo = evolve(config, ens, EvolutionMode::monte_carlo);
  const Trajectory* source = &run.analytic;
  Trajectory bessel;
  if (cfg.mode == EvolutionMode::monte_carlo) {
    source = &run.monte_carlo;
  } else if (cfg.mode == EvolutionMode::bessel) {
    bessel = evolve(config, ens, EvolutionMode::bessel);
    source = &bessel;
  }
  run.q.resize(source->size());
  for (std::size_t k = 0; k < source->size(); ++k) run.q[k] = qfi(source->rho[k], gen);
  run.flow = qfi_flow(run.q, source->grid.dt, FlowOptions{cfg.smoothing_window});
  run.closed = closed_form_qfi(run.analytic);
  return run;
}

inline std::vector<ChannelRun> run_channels(const RunConfig& cfg) {
  const auto sel = cfg.resolved_channels();
  std::vector<ChannelSelection> list;
  if (sel == ChannelSelection::all)
    list = {ChannelSelection::s, ChannelSelection::a, ChannelSelection::sa};
  else
    list = {sel};
  std::vector<ChannelRun> runs;
  for (auto s : list) runs.push_back(run_channel(cfg, s));
  return runs;
}

inline CsvTable channel_table(const ChannelRun& run) {
  CsvTable t{{"t", "f_analytic", "f_mc", "f_stderr", "Q", "F", "Q_closed", "F_closed"}, {}, {}};
  t.notes.push_back(std::string("configuration = ") + to_string(run.selection));
  for (std::size_t k = 0; k < run.analytic.size(); ++k) {
    t.rows.push_back({run.analytic.time(k), run.analytic.f[k], run.monte_carlo.f[k], run.monte_carlo.f_stderr[k],
                      run.q[k], run.flow[k], run.closed[k].q, run.closed[k].flow});
  }
  return t;
}

// ---------------------------------------------------------------------------
// decomposition

struct DecompositionOptions {
  double rank_floor = 1e-10;
  double dtheta = 1e-5;
  FlowOptions flow;
};

struct Decomposition {
  std::vector<double> time;
  std::vector<double> q_spectral;
  std::vector<double> q_sld;     // Tr(rho L^2)
  std::vector<double> flow;      // dQ/dt of q_spectral
  std::vector<std::string> labels;
  std::vector<std::vector<double>> channel_flow;  // [channel][k]
  std::vector<double> channel_sum;
};

/// Per grid point: d rho / d theta by central differences of the unitary
/// phase encoding, the SLD, both QFI routes, and the split of the flow over
/// dephasing channels A = sigma_z / 2 with rate gamma(t) = 4 chi'(t), the
/// Lindblad rate that reproduces f = exp(-2 chi) for that operator.
inline Decomposition decompose_trajectory(const ChannelConfig& config, const EnsembleConfig& ens, EvolutionMode mode,
                                          const DecompositionOptions& opts = {}) {
  const auto traj = evolve(config, ens, mode);
  const auto gen = Generator::collective_z();
  const std::size_t n = traj.size();

  struct Channel {
    std::string label;
    Matrix op;
    std::vector<double> rate;
  };
  std::vector<Channel> channels;
  if (config.system_noisy) {
    const auto curve = analytic_chi_on_grid(config.system_model, traj.grid);
    std::vector<double> rate(n);
    for (std::size_t k = 0; k < n; ++k) rate[k] = 4.0 * curve.chi_rate[k];
    channels.push_back({"system", 0.5 * sigma_z_system(), std::move(rate)});
  }
  if (config.ancilla_noisy) {
    const auto curve = analytic_chi_on_grid(config.ancilla_model, traj.grid);
    std::vector<double> rate(n);
    for (std::size_t k = 0; k < n; ++k) rate[k] = 4.0 * curve.chi_rate[k];
    channels.push_back({"ancilla", 0.5 * sigma_z_ancilla(), std::move(rate)});
  }

  Decomposition d;
  d.time.resize(n);
  d.q_spectral.resize(n);
  d.q_sld.resize(n);
  d.channel_sum.assign(n, 0.0);
  d.channel_flow.assign(channels.size(), std::vector<double>(n, 0.0));
  for (const auto& c : channels) d.labels.push_back(c.label);

  for (std::size_t k = 0; k < n; ++k) {
    const DensityMatrix& rho = traj.rho[k];
    d.time[k] = traj.time(k);
    d.q_spectral[k] = qfi(rho, gen, opts.rank_floor);
    const auto d_rho = fd_param_derivative([&](double th) { return unitary_encode(rho, gen, th); }, 0.0, opts.dtheta);
    const auto l = sld(rho, d_rho, opts.rank_floor);
    d.q_sld[k] = sld_qfi(rho, l);
    ChannelSpec spec;
    for (const auto& c : channels) spec.add(c.op, c.rate[k], c.label);
    const auto flows = channel_flow_decomposition(rho, l, spec);
    for (std::size_t c = 0; c < flows.size(); ++c) {
      d.channel_flow[c][k] = flows[c];
      d.channel_sum[k] += flows[c];
    }
  }
  d.flow = qfi_flow(d.q_spectral, traj.grid.dt, opts.flow);
  return d;
}

inline Decomposition run_decompose(const RunConfig& cfg) {
  const auto system = cfg.model_for(cfg.system_omega0);
  const auto ancilla = cfg.model_for(cfg.ancilla_omega0);
  const auto sel = cfg.resolved_channels();
  // a single-channel decomposition uses the generic omega0
  const auto single = cfg.model_for(cfg.omega0);
  const auto config = sel == ChannelSelection::sa ? channel_config(cfg, sel, system, ancilla)
                                                  : channel_config(cfg, sel, single, single);
  return decompose_trajectory(config, cfg.ensemble_config(), cfg.mode,
                              DecompositionOptions{cfg.rank_floor, cfg.dtheta, FlowOptions{cfg.smoothing_window}});
}

inline CsvTable decomposition_table(const Decomposition& d) {
  CsvTable t{{"t", "Q_spectral", "Q_trL2", "F_total", "F_channel_sum"}, {}, {}};
  for (const auto& label : d.labels) t.columns.push_back("F_" + label);
  for (std::size_t k = 0; k < d.time.size(); ++k) {
    std::vector<double> row{d.time[k], d.q_spectral[k], d.q_sld[k], d.flow[k], d.channel_sum[k]};
    for (const auto& c : d.channel_flow) row.push_back(c[k]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------------------
// single trajectory

struct TrajectoryRun {
  Trajectory trajectory;
  MeasureReport report;
};

inline TrajectoryRun run_trajectory(const RunConfig& cfg) {
  const auto sel = cfg.resolved_channels();
  const auto model = cfg.model_for(cfg.omega0);
  const auto system = sel == ChannelSelection::sa ? cfg.model_for(cfg.system_omega0) : model;
  const auto ancilla = sel == ChannelSelection::sa ? cfg.model_for(cfg.ancilla_omega0) : model;
  TrajectoryRun run;
  run.trajectory = evolve(channel_config(cfg, sel, system, ancilla), cfg.ensemble_config(), cfg.mode);
  run.report = measure_report(run.trajectory, MeasureConfig{cfg.tf, cfg.positive_threshold}, Generator::collective_z(),
                              FlowOptions{cfg.smoothing_window});
  return run;
}

inline CsvTable trajectory_table(const TrajectoryRun& run) {
  const auto& tr = run.trajectory;
  const auto& c = run.report.curves;
  CsvTable t{{"t", "f", "f_stderr", "chi", "qmi", "qmi_rate", "trace_distance", "rhp_witness", "qfi", "qfi_flow"}, {}, {}};
  t.notes.push_back("n0 = " + format_number(run.report.n0));
  t.notes.push_back("n_blp = " + format_number(run.report.blp));
  t.notes.push_back("n_rhp = " + format_number(run.report.rhp));
  for (std::size_t k = 0; k < tr.size(); ++k) {
    t.rows.push_back({tr.time(k), tr.f[k], tr.f_stderr[k], tr.chi[k], c.qmi[k], c.qmi_rate[k], c.trace_distance[k],
                      c.rhp_witness[k], c.qfi[k], c.qfi_flow[k]});
  }
  return t;
}

// ---------------------------------------------------------------------------

/// Runs the configured experiment and writes its CSV file(s); returns the
/// paths written.
inline std::vector<std::string> run_experiment(const RunConfig& cfg) {
  validate(cfg);
  const std::string out = cfg.resolved_out();
  switch (*cfg.experiment) {
    case Experiment::sweep:
      write_csv_file(out, cfg, sweep_table(run_sweep(cfg)));
      return {out};
    case Experiment::channels: {
      std::vector<std::string> written;
      for (const auto& run : run_channels(cfg)) {
        const auto path = suffixed_path(out, std::string("_") + to_string(run.selection));
        write_csv_file(path, cfg, channel_table(run));
        written.push_back(path);
      }
      return written;
    }
    case Experiment::decompose:
      write_csv_file(out, cfg, decomposition_table(run_decompose(cfg)));
      return {out};
    case Experiment::trajectory:
      write_csv_file(out, cfg, trajectory_table(run_trajectory(cfg)));
      return {out};
  }
  return {};
}

}  // namespace nmq
