// Acceptance suite: one PASS/FAIL line per criterion, plus indented note
// lines. Exit status is non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nmq/nmq.hpp"

using namespace nmq;

namespace {

int failures = 0;

void note(const std::string& s) { std::printf("    %s\n", s.c_str()); }

void report(int id, const std::string& title, bool ok) {
  std::printf("criterion %d [%s]: %s\n", id, title.c_str(), ok ? "PASS" : "FAIL");
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// reference bath with the comb spacing given in MHz
SpectralModel reference_bath(double theta, double omega0_mhz = 0.05) {
  return SpectralModel::drude_lorentz(angular(2e-4), angular(0.9), theta, angular(omega0_mhz), 100000);
}

constexpr double theta_room = 3.93e9;

bool valid_state(const DensityMatrix& rho) {
  const Matrix& m = rho.matrix();
  return hermiticity_defect(m) <= tolerance::hermitian && std::abs(m.trace().real() - 1.0) <= tolerance::trace &&
         eigh(rho).values.minCoeff() >= -tolerance::psd;
}

EnsembleConfig grid_ensemble(double dt, std::size_t n = 1) {
  EnsembleConfig e;
  e.realizations = n;
  e.master_seed = 20240601;
  e.grid = TimeGrid::horizon(5.0, dt);
  e.threads = 0;
  return e;
}

// ---------------------------------------------------------------------------

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto model = reference_bath(theta_room);
  const auto ens = grid_ensemble(0.01, 150);
  const auto est = mc_coherence(model, ens);
  const auto oracle = bessel_f_on_grid(model, ens.grid);
  std::size_t inside = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < oracle.size(); ++k) {
    const double diff = std::abs(est.mean[k] - oracle[k]);
    inside += diff <= 3.0 * est.standard_error[k];
    if (est.standard_error[k] > 0) worst = std::max(worst, diff / est.standard_error[k]);
  }
  const double frac = static_cast<double>(inside) / oracle.size();
  note("points within 3 standard errors: " + std::to_string(inside) + " / " + std::to_string(oracle.size()));
  note(fmt("largest deviation in standard errors: %.3f", worst));
  note(fmt("runtime %.1f s", seconds_since(t0)));
  report(1, "Monte Carlo vs Bessel oracle, N = 150", frac >= 0.99);
}

void criterion2() {
  const auto model = reference_bath(theta_room);
  EnsembleConfig ens = grid_ensemble(0.01);
  const auto traj = evolve(ChannelConfig::system_only(model), ens, EvolutionMode::analytic);
  double identity_err = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k)
    identity_err = std::max(identity_err, std::abs(traj.f[k] - std::exp(-2.0 * analytic_chi(model, traj.time(k)))));
  const auto b = bessel_f_on_grid(model, ens.grid);
  double bessel_err = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) bessel_err = std::max(bessel_err, std::abs(b[k] - traj.f[k]));
  note(fmt("max |f_analytic - exp(-2 chi)| = %.3e (limit 1e-12)", identity_err));
  note(fmt("max |bessel_f - exp(-2 chi)| = %.3e (limit 1e-4)", bessel_err));
  report(2, "analytic identity and Bessel small-amplitude agreement", identity_err <= 1e-12 && bessel_err <= 1e-4);
}

bool sign_pattern(const std::vector<SweepRow>& rows, std::string& first_positive) {
  bool ok = true;
  first_positive = "none";
  for (const auto& r : rows) {
    const bool zero = r.n0 == 0.0 && r.blp == 0.0 && r.rhp == 0.0;
    const bool positive = r.n0 > 0.0 && r.blp > 0.0 && r.rhp > 0.0;
    if (positive && first_positive == "none") first_positive = format_number(r.omega0);
    ok = ok && (r.omega0 <= 0.10 + 1e-9 ? zero : positive);
  }
  return ok;
}

void criterion3() {
  RunConfig cfg;
  cfg.experiment = Experiment::sweep;
  const auto rows = run_sweep(cfg);
  for (const auto& r : rows)
    note("omega0 = " + format_number(r.omega0) + " MHz: N0 = " + format_number(r.n0) +
           ", N_BLP = " + format_number(r.blp) + ", N_RHP = " + format_number(r.rhp));
  std::string first;
  const bool ok = sign_pattern(rows, first);
  note("first grid point with all three measures positive: " + first + " MHz");
  for (double theta : {100.0, 3000.0}) {
    RunConfig alt = cfg;
    alt.theta = theta;
    std::string f;
    const bool alt_ok = sign_pattern(run_sweep(alt), f);
    note("robustness, theta = " + format_number(theta) + " rad/us: transition after 0.10 MHz " +
           (alt_ok ? "holds" : "does not hold") + " (first positive " + f + ")");
  }
  report(3, "phase-diagram transition between 0.10 and 0.11 MHz", ok);
}

struct FlowCheck {
  double q_err = 0.0;
  double flow_err = 0.0;
  double flow_err_t = 0.0;
  double flow_err_late = 0.0;  // restricted to t >= 0.05 us
};

FlowCheck check_qfi(const Trajectory& traj) {
  const auto gen = Generator::collective_z();
  std::vector<double> q(traj.size());
  FlowCheck c;
  for (std::size_t k = 0; k < q.size(); ++k) {
    q[k] = qfi(traj.rho[k], gen);
    c.q_err = std::max(c.q_err, std::abs(q[k] - 4.0 * std::exp(-4.0 * traj.chi[k])));
  }
  const auto flow = qfi_flow(q, traj.grid.dt);
  const auto closed = closed_form_qfi(traj);
  for (std::size_t k = 1; k + 1 < q.size(); ++k) {
    const double e = std::abs(flow[k] - closed[k].flow);
    if (e > c.flow_err) {
      c.flow_err = e;
      c.flow_err_t = traj.time(k);
    }
    if (traj.time(k) >= 0.05 - 1e-12) c.flow_err_late = std::max(c.flow_err_late, e);
  }
  return c;
}

void criterion4() {
  const RunConfig cfg;
  const auto s = cfg.model_for(cfg.system_omega0);
  const auto a = cfg.model_for(cfg.ancilla_omega0);
  bool ok = true;
  std::vector<Trajectory> trajs;
  const char* names[] = {"s", "a", "sa"};
  const ChannelConfig configs[] = {ChannelConfig::system_only(s), ChannelConfig::ancilla_only(a),
                                   ChannelConfig::both(s, a)};
  for (int i = 0; i < 3; ++i) {
    trajs.push_back(evolve(configs[i], grid_ensemble(1e-3), EvolutionMode::analytic));
    const auto c = check_qfi(trajs.back());
    const auto coarse = check_qfi(evolve(configs[i], grid_ensemble(2e-3), EvolutionMode::analytic));
    note(std::string(names[i]) + fmt(": max |Q - 4 exp(-4 chi)| = %.3e", c.q_err) +
           fmt(", max |F_fd - F_closed| = %.3e", c.flow_err) + fmt(" at t = %.3f us", c.flow_err_t) +
           fmt(" (dt = 2e-3 gives %.3e", coarse.flow_err) +
           fmt(", observed order %.2f)", std::log2(coarse.flow_err / c.flow_err)));
    note(fmt("   same comparison restricted to t >= 0.05 us: %.3e", c.flow_err_late));
    ok = ok && c.q_err <= 1e-10 && c.flow_err <= 1e-6;
  }
  double product_err = 0.0;
  const auto qs = closed_form_qfi(trajs[0]), qa = closed_form_qfi(trajs[1]), qsa = closed_form_qfi(trajs[2]);
  const auto gen = Generator::collective_z();
  for (std::size_t k = 0; k < trajs[2].size(); ++k)
    product_err = std::max(product_err, std::abs(qfi(trajs[2].rho[k], gen) - qs[k].q * qa[k].q / 4.0));
  note(fmt("max |Q_sa - Q_s Q_a / 4| = %.3e (limit 1e-9)", product_err));
  report(4, "closed-form QFI and flow at dt = 1e-3 us", ok && product_err <= 1e-9);
}

void criterion5() {
  RunConfig cfg;
  cfg.experiment = Experiment::channels;
  cfg.ensemble = 1;  // analytic mode drives Q and F; the Monte Carlo column is unused here
  const auto runs = run_channels(cfg);
  const auto& s = runs[0].flow;
  const auto& a = runs[1].flow;
  const auto& sa = runs[2].flow;
  std::size_t witness = 0, s_positive = 0, a_positive = 0;
  double first = -1.0;
  for (std::size_t k = 0; k < sa.size(); ++k) {
    s_positive += s[k] > 0.0;
    a_positive += a[k] > 0.0;
    if (s[k] + a[k] > 0.0 && sa[k] < 0.0) {
      if (witness == 0) first = runs[2].analytic.time(k);
      ++witness;
    }
  }
  note("grid points with F_s > 0: " + std::to_string(s_positive) + ", with F_a > 0: " + std::to_string(a_positive));
  note("grid points with F_s + F_a > 0 and F_sa < 0: " + std::to_string(witness) + fmt(" (first at t = %.2f us)", first));
  report(5, "non-additivity of the QFI flow", witness >= 1 && s_positive == 0 && a_positive > 0);
}

void criterion6() {
  bool ok = true;
  // closed-form QMI rate against central differences of the entropic QMI on random
  // analytic trajectories of the default bath
  std::mt19937_64 rng(6);
  auto grid_values = RunConfig{}.omega0_grid.values();
  std::shuffle(grid_values.begin(), grid_values.end(), rng);
  const RunConfig cfg;
  double worst_rate = 0.0;
  for (int trial = 0; trial < 4; ++trial) {
    const double w0 = grid_values[trial];
    const auto traj = evolve(ChannelConfig::system_only(cfg.model_for(w0)), grid_ensemble(1e-3), EvolutionMode::analytic);
    const auto curve = qmi_curve(traj);
    double err = 0.0, at = 0.0, late = 0.0;
    for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
      const double fd = (curve[k + 1] - curve[k - 1]) / (2.0 * traj.grid.dt);
      const double e = std::abs(fd - qmi_rate(traj, k));
      if (e > err) {
        err = e;
        at = traj.time(k);
      }
      if (traj.time(k) >= 0.05 - 1e-12) late = std::max(late, e);
    }
    note("QMI rate, omega0 = " + format_number(w0) + fmt(" MHz: max |closed form - FD| = %.3e bits/us", err) +
           fmt(" at t = %.3f us", at) + fmt(", %.3e for t >= 0.05 us", late));
    worst_rate = std::max(worst_rate, err);
  }
  ok = ok && worst_rate <= 1e-6;

  // SLD on random full-rank states
  double recon = 0.0, trace_l = 0.0, q_match = 0.0;
  const auto gen = Generator::collective_z();
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 500; ++trial) {
    Matrix g(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) g(i, j) = cplx(normal(rng), normal(rng));
    Matrix m = g * g.adjoint() + 0.05 * identity(4);
    m /= m.trace().real();
    const DensityMatrix rho(hermitize(m));
    const auto d = unitary_derivative(rho, gen);
    const auto l = sld(rho, d);
    const Matrix rebuilt = 0.5 * (l.matrix() * rho.matrix() + rho.matrix() * l.matrix());
    recon = std::max(recon, (rebuilt - d.matrix()).cwiseAbs().maxCoeff());
    trace_l = std::max(trace_l, std::abs((rho.matrix() * l.matrix()).trace()));
    q_match = std::max(q_match, std::abs(sld_qfi(rho, l) - qfi(rho, gen)));
  }
  note(fmt("SLD reconstruction on random full-rank states: max error %.3e (limit 1e-8)", recon));
  note(fmt("max |Tr(rho L)| = %.3e (limit 1e-10)", trace_l));
  note(fmt("max |Tr(rho L^2) - Q| on random states = %.3e (limit 1e-8)", q_match));
  ok = ok && recon <= 1e-8 && trace_l <= 1e-10 && q_match <= 1e-8;

  // finite-difference d rho / d theta on the default decomposition run
  RunConfig dcfg;
  dcfg.experiment = Experiment::decompose;
  dcfg.channels = ChannelSelection::sa;
  const auto dec = run_decompose(dcfg);
  double dec_err = 0.0;
  for (std::size_t k = 0; k < dec.time.size(); ++k) dec_err = std::max(dec_err, std::abs(dec.q_sld[k] - dec.q_spectral[k]));
  note(fmt("decompose (sa): max |Q_trL2 - Q_spectral| with finite-difference derivative = %.3e (limit 1e-8)", dec_err));
  ok = ok && dec_err <= 1e-8;
  report(6, "gradient checks", ok);
}

void criterion7() {
  bool ok = true;
  RunConfig cfg;
  cfg.experiment = Experiment::channels;
  cfg.threads = 0;
  const auto runs = run_channels(cfg);
  std::size_t states = 0, bad = 0;
  for (const auto& r : runs)
    for (const auto* traj : {&r.analytic, &r.monte_carlo})
      for (const auto& rho : traj->rho) {
        ++states;
        bad += !valid_state(rho);
      }
  RunConfig scfg;
  scfg.experiment = Experiment::sweep;
  double most_negative = 0.0;
  for (double w0 : scfg.omega0_grid.values()) {
    const auto traj = evolve(ChannelConfig::system_only(scfg.model_for(w0)), scfg.ensemble_config(), EvolutionMode::analytic);
    for (const auto& rho : traj.rho) {
      ++states;
      bad += !valid_state(rho);
    }
    const auto rep = measure_report(traj);
    most_negative = std::min({most_negative, rep.n0, rep.blp, rep.rhp});
  }
  note("density-matrix invariants: " + std::to_string(bad) + " violations over " + std::to_string(states) + " states");
  note("smallest measure value on the sweep: " + format_number(most_negative));
  ok = ok && bad == 0 && most_negative >= 0.0;

  // monotone trajectory gives zero for all three measures
  const auto mono = evolve(ChannelConfig::system_only(scfg.model_for(0.05)), scfg.ensemble_config(), EvolutionMode::analytic);
  bool monotone = true;
  for (std::size_t k = 0; k + 1 < mono.size(); ++k) monotone = monotone && mono.f[k + 1] <= mono.f[k];
  const auto mrep = measure_report(mono);
  note(std::string("omega0 = 0.05 MHz trajectory is ") + (monotone ? "monotone" : "not monotone") +
         "; measures " + format_number(mrep.n0) + ", " + format_number(mrep.blp) + ", " + format_number(mrep.rhp));
  ok = ok && monotone && mrep.n0 == 0.0 && mrep.blp == 0.0 && mrep.rhp == 0.0;

  double mult = 0.0;
  for (std::size_t k = 0; k < runs[2].analytic.size(); ++k)
    mult = std::max(mult, std::abs(runs[2].analytic.f[k] - runs[0].analytic.f[k] * runs[1].analytic.f[k]));
  note(fmt("analytic multiplicativity max |f_sa - f_s f_a| = %.3e (limit 1e-12)", mult));
  ok = ok && mult <= 1e-12;

  // CSV bytes under 1 and 3 workers
  RunConfig tcfg;
  tcfg.experiment = Experiment::trajectory;
  tcfg.mode = EvolutionMode::monte_carlo;
  tcfg.omega0 = 0.15;
  std::string csv[2];
  const unsigned workers[2] = {1, 3};
  for (int i = 0; i < 2; ++i) {
    tcfg.threads = workers[i];
    std::ostringstream out;
    write_csv(out, tcfg, trajectory_table(run_trajectory(tcfg)));
    csv[i] = out.str();
  }
  note(std::string("trajectory CSV (Monte Carlo, N = 150) with 1 vs 3 workers: ") +
         (csv[0] == csv[1] ? "bit-identical" : "differs") + ", " + std::to_string(csv[0].size()) + " bytes");
  ok = ok && csv[0] == csv[1] && !csv[0].empty();
  report(7, "property suites", ok);
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  void (*criteria[])() = {criterion1, criterion2, criterion3, criterion4, criterion5, criterion6, criterion7};
  int id = 1;
  for (auto* c : criteria) {
    try {
      c();
    } catch (const std::exception& e) {
      note(std::string("exception: ") + e.what());
      report(id, "aborted", false);
    }
    ++id;
  }
  std::printf("%d of 7 criteria failed (%.0f s)\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
