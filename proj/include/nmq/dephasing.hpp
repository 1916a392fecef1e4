#pragma once

// Two-qubit dephasing dynamics starting from the Bell state
// (|00> + |11>)/sqrt(2). Noise on either qubit only scales the |00><11|
// coherence by g(t) with |g| = f(t); three routes produce f(t):
//
//   analytic     f = exp(-2 chi), chi the Drude-Lorentz partial sum
//   bessel       exact large-ensemble phase average, prod_j J0(x_j(t))
//   monte_carlo  ensemble average of exp(-2i * int beta) over sampled fields

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "nmq/core_quantum.hpp"
#include "nmq/noise_engine.hpp"
#include "nmq/parallel.hpp"

namespace nmq {

/// Uniform grid t_k = k dt, k = 0..steps.
struct TimeGrid {
  double dt = 0.01;
  std::size_t steps = 500;

  static TimeGrid horizon(double t_final, double dt) {
    if (!(dt > 0.0) || !(t_final >= 0.0)) throw DomainError("time grid: dt must be positive and t_final non-negative");
    return TimeGrid{dt, static_cast<std::size_t>(std::floor(t_final / dt + 1e-9))};
  }

  std::size_t size() const noexcept { return steps + 1; }
  double time(std::size_t k) const noexcept { return dt * static_cast<double>(k); }
  double end() const noexcept { return time(steps); }

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("time grid: dt must be positive");
  }
};

struct ChannelConfig {
  bool system_noisy = false;
  bool ancilla_noisy = false;
  SpectralModel system_model;
  SpectralModel ancilla_model;
  double omega_s = 0.0;  // Zeeman frequencies; 0 is the interaction picture
  double omega_a = 0.0;

  static ChannelConfig noiseless() { return {}; }

  static ChannelConfig system_only(SpectralModel m) {
    ChannelConfig c;
    c.system_noisy = true;
    c.system_model = std::move(m);
    return c;
  }

  static ChannelConfig ancilla_only(SpectralModel m) {
    ChannelConfig c;
    c.ancilla_noisy = true;
    c.ancilla_model = std::move(m);
    return c;
  }

  static ChannelConfig both(SpectralModel system, SpectralModel ancilla) {
    ChannelConfig c;
    c.system_noisy = c.ancilla_noisy = true;
    c.system_model = std::move(system);
    c.ancilla_model = std::move(ancilla);
    return c;
  }

  void validate() const {
    if (system_noisy) system_model.validate();
    if (ancilla_noisy) ancilla_model.validate();
    if (!std::isfinite(omega_s) || !std::isfinite(omega_a)) throw DomainError("channel config: non-finite Zeeman frequency");
  }
};

struct EnsembleConfig {
  std::size_t realizations = 150;
  std::uint64_t master_seed = 0;
  TimeGrid grid;
  unsigned threads = 0;  // 0 = hardware concurrency

  void validate() const {
    if (realizations == 0) throw DomainError("ensemble: at least one realization is required");
    grid.validate();
  }
};

enum class EvolutionMode { analytic, bessel, monte_carlo };

inline const char* to_string(EvolutionMode m) {
  switch (m) {
    case EvolutionMode::analytic: return "analytic";
    case EvolutionMode::bessel: return "bessel";
    case EvolutionMode::monte_carlo: return "mc";
  }
  return "?";
}

struct Trajectory {
  TimeGrid grid;
  EvolutionMode kind = EvolutionMode::analytic;
  std::vector<double> f;
  std::vector<double> f_stderr;
  // Analytic decoherence factor and its time derivative (summed over noisy
  // channels), stored for every kind.
  std::vector<double> chi;
  std::vector<double> chi_rate;
  std::vector<DensityMatrix> rho;

  std::size_t size() const noexcept { return f.size(); }
  double time(std::size_t k) const noexcept { return grid.time(k); }
};

// ---------------------------------------------------------------------------
// analytic decoherence factor

/// Weights a_j with chi(t) = sum_j a_j sin^2(omega_j t / 2). For
/// Drude-Lorentz models these are the closed-form coefficients
/// lambda gamma omega0 coth(omega_j / 2 theta) / (omega_j (omega_j^2 + gamma^2)).
inline std::vector<double> decoherence_weights(const SpectralModel& model) {
  model.validate();
  std::vector<double> a(model.size());
  if (model.kind == SpectralKind::custom_modes) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double r = model.custom[j].amplitude / model.custom[j].omega;
      a[j] = 2.0 * r * r;
    }
    return a;
  }
  const double prefactor = model.lambda * model.gamma * model.omega0;
  const double gamma2 = model.gamma * model.gamma;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double w = model.frequency(j);
    a[j] = prefactor * coth_stable(w / (2.0 * model.theta)) / (w * (w * w + gamma2));
  }
  return a;
}

inline double analytic_chi(const SpectralModel& model, double t) {
  if (!(t >= 0.0)) throw DomainError("analytic_chi: t must be non-negative");
  const auto a = decoherence_weights(model);
  double chi = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double s = std::sin(0.5 * model.frequency(j) * t);
    chi += a[j] * s * s;
  }
  return chi;
}

/// d chi / dt = sum_j a_j (omega_j / 2) sin(omega_j t).
inline double analytic_chi_rate(const SpectralModel& model, double t) {
  if (!(t >= 0.0)) throw DomainError("analytic_chi_rate: t must be non-negative");
  const auto a = decoherence_weights(model);
  double rate = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double w = model.frequency(j);
    rate += 0.5 * a[j] * w * std::sin(w * t);
  }
  return rate;
}

struct DecoherenceCurve {
  std::vector<double> chi;
  std::vector<double> chi_rate;
};

inline DecoherenceCurve analytic_chi_on_grid(const SpectralModel& model, const TimeGrid& grid) {
  grid.validate();
  const auto a = decoherence_weights(model);
  const std::size_t n = grid.size();
  DecoherenceCurve out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double w = model.frequency(j);
    // z = exp(i w t / 2): sin^2(w t / 2) = Im(z)^2, sin(w t) = 2 Im(z) Re(z)
    detail::rotate_on_grid(0.5 * w, 0.0, grid.dt, n, [&](std::size_t k, cplx z) {
      out.chi[k] += a[j] * z.imag() * z.imag();
      out.chi_rate[k] += a[j] * w * z.imag() * z.real();
    });
  }
  out.chi[0] = 0.0;
  out.chi_rate[0] = 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// large-ensemble oracle

namespace detail {

inline double bessel_j0(double x) {
  const double x2 = x * x;
  if (std::abs(x) < 1e-2) return 1.0 - x2 / 4.0 + x2 * x2 / 64.0 - x2 * x2 * x2 / 2304.0;
  return std::cyl_bessel_j(0.0, std::abs(x));  // even; the library rejects x < 0
}

}  // namespace detail

/// Signed phase average prod_j J0(4 (c_j / omega_j) sin(omega_j t / 2)).
inline double bessel_coherence(const ModeTable& modes, double t) {
  double p = 1.0;
  for (std::size_t j = 0; j < modes.size() && p != 0.0; ++j)
    p *= detail::bessel_j0(4.0 * modes.amplitude[j] / modes.omega[j] * std::sin(0.5 * modes.omega[j] * t));
  return p;
}

inline double bessel_f(const SpectralModel& model, double t) {
  if (!(t >= 0.0)) throw DomainError("bessel_f: t must be non-negative");
  return std::abs(bessel_coherence(mode_table(model), t));
}

inline std::vector<double> bessel_f_on_grid(const SpectralModel& model, const TimeGrid& grid) {
  grid.validate();
  const ModeTable modes = mode_table(model);
  const std::size_t n = grid.size();
  std::vector<double> p(n, 1.0);
  for (std::size_t j = 0; j < modes.size(); ++j) {
    const double scale = 4.0 * modes.amplitude[j] / modes.omega[j];
    detail::rotate_on_grid(0.5 * modes.omega[j], 0.0, grid.dt, n, [&](std::size_t k, cplx z) {
      if (p[k] != 0.0) p[k] *= detail::bessel_j0(scale * z.imag());
    });
  }
  for (auto& v : p) v = std::abs(v);
  p[0] = 1.0;
  return p;
}

// ---------------------------------------------------------------------------
// Monte Carlo ensemble

/// One independent noise process entering the coherence phase.
struct NoiseSource {
  const ModeTable* modes = nullptr;
  StreamTag stream = StreamTag::single;
};

struct CoherenceEstimate {
  std::vector<double> mean;
  std::vector<double> standard_error;
};

/// f(t_k) = |(1/N) sum_n exp(-2i Phi_n(t_k))| with Phi_n the summed
/// integrated fields of every source for realization n. The standard error is
/// sqrt(s^2 / N) with s^2 the complex sample variance.
inline CoherenceEstimate mc_coherence(const std::vector<NoiseSource>& sources, const EnsembleConfig& ens) {
  ens.validate();
  const std::size_t n_real = ens.realizations;
  const std::size_t points = ens.grid.size();
  std::vector<std::vector<cplx>> samples(n_real);

  parallel_for(n_real, ens.threads, [&](std::size_t n) {
    std::vector<double> phase(points, 0.0);
    for (const auto& src : sources) {
      const RngKey key{ens.master_seed, src.stream, n};
      const auto r = sample_realization(*src.modes, key);
      const auto integral = integrated_field_on_grid(r, *src.modes, ens.grid.dt, points);
      for (std::size_t k = 0; k < points; ++k) phase[k] += integral[k];
    }
    auto& z = samples[n];
    z.resize(points);
    for (std::size_t k = 0; k < points; ++k) z[k] = cplx(std::cos(2.0 * phase[k]), -std::sin(2.0 * phase[k]));
  });

  // Reduction in realization order keeps results independent of the worker count.
  CoherenceEstimate out{std::vector<double>(points), std::vector<double>(points, 0.0)};
  const double inv_n = 1.0 / static_cast<double>(n_real);
  for (std::size_t k = 0; k < points; ++k) {
    cplx mean = 0.0;
    for (std::size_t n = 0; n < n_real; ++n) mean += samples[n][k];
    mean *= inv_n;
    double f = std::abs(mean);
    if (f > 1.0 + 1e-12) throw NumericError("mc_coherence: ensemble coherence exceeds 1");
    out.mean[k] = std::min(f, 1.0);
    if (n_real >= 2) {
      double var = 0.0;
      for (std::size_t n = 0; n < n_real; ++n) var += std::norm(samples[n][k] - mean);
      var /= static_cast<double>(n_real - 1);
      out.standard_error[k] = std::sqrt(var * inv_n);
    }
  }
  return out;
}

inline CoherenceEstimate mc_coherence(const SpectralModel& model, const EnsembleConfig& ens) {
  const ModeTable modes = mode_table(model);
  return mc_coherence({NoiseSource{&modes, StreamTag::single}}, ens);
}

// ---------------------------------------------------------------------------
// trajectories

/// Evolves the Bell state under the configured channel noise. With both
/// channels noisy the total coherence is the product of the per-channel
/// factors; Monte Carlo draws use distinct streams per channel so the two
/// fields are independent.
inline Trajectory evolve(const ChannelConfig& config, const EnsembleConfig& ens, EvolutionMode mode) {
  config.validate();
  ens.validate();
  const TimeGrid& grid = ens.grid;
  const std::size_t n = grid.size();

  Trajectory traj;
  traj.grid = grid;
  traj.kind = mode;
  traj.chi.assign(n, 0.0);
  traj.chi_rate.assign(n, 0.0);
  traj.f.assign(n, 1.0);
  traj.f_stderr.assign(n, 0.0);

  std::vector<const SpectralModel*> noisy;
  if (config.system_noisy) noisy.push_back(&config.system_model);
  if (config.ancilla_noisy) noisy.push_back(&config.ancilla_model);

  for (const auto* model : noisy) {
    const auto curve = analytic_chi_on_grid(*model, grid);
    for (std::size_t k = 0; k < n; ++k) {
      traj.chi[k] += curve.chi[k];
      traj.chi_rate[k] += curve.chi_rate[k];
    }
  }

  switch (mode) {
    case EvolutionMode::analytic:
      for (std::size_t k = 0; k < n; ++k) traj.f[k] = std::exp(-2.0 * traj.chi[k]);
      break;
    case EvolutionMode::bessel:
      for (const auto* model : noisy) {
        const auto b = bessel_f_on_grid(*model, grid);
        for (std::size_t k = 0; k < n; ++k) traj.f[k] *= b[k];
      }
      break;
    case EvolutionMode::monte_carlo: {
      if (noisy.empty()) break;
      std::vector<ModeTable> tables;
      tables.reserve(noisy.size());
      for (const auto* model : noisy) tables.push_back(mode_table(*model));
      std::vector<NoiseSource> sources;
      if (tables.size() == 1) {
        sources.push_back({&tables[0], StreamTag::single});
      } else {
        sources.push_back({&tables[0], StreamTag::system});
        sources.push_back({&tables[1], StreamTag::ancilla});
      }
      auto est = mc_coherence(sources, ens);
      traj.f = std::move(est.mean);
      traj.f_stderr = std::move(est.standard_error);
      break;
    }
  }

  const double zeeman = config.omega_s + config.omega_a;
  traj.rho.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(traj.f[k])) throw NumericError("evolve: non-finite coherence");
    traj.rho.push_back(bell_dephased_state(traj.f[k], zeeman * grid.time(k)));
  }
  return traj;
}

}  // namespace nmq
