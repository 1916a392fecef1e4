#pragma once

// Classical dephasing fields synthesized as sums of sinusoids with random
// phases:
//
//   beta(t) = sum_j c_j sin(omega_j t + psi_j)
//
// Frequencies are angular (rad/us) and times are in us throughout.
// Amplitudes c_j are fixed so that the ensemble variance of the accumulated
// phase, Var[int_0^t beta] = sum_j (2 c_j^2 / omega_j^2) sin^2(omega_j t / 2),
// reproduces the Drude-Lorentz decoherence factor term by term.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "nmq/core_quantum.hpp"
#include "nmq/counter_rng.hpp"

namespace nmq {

enum class SpectralKind { drude_lorentz, custom_modes };

struct CustomMode {
  double omega = 0.0;
  double amplitude = 0.0;
};

struct SpectralModel {
  SpectralKind kind = SpectralKind::drude_lorentz;
  double lambda = 0.0;  // reorganization energy
  double gamma = 0.0;   // relaxation rate
  double theta = 0.0;   // thermal frequency k_B T / hbar
  double omega0 = 0.0;  // comb spacing, omega_j = j * omega0
  std::size_t mode_count = 0;
  std::vector<CustomMode> custom;
  // Modes whose phase variance weight c^2/omega^2 falls below
  // tail_epsilon * max weight are dropped (0 keeps every mode).
  double tail_epsilon = 0.0;

  static SpectralModel drude_lorentz(double lambda, double gamma, double theta, double omega0,
                                     std::size_t mode_count) {
    SpectralModel m;
    m.lambda = lambda;
    m.gamma = gamma;
    m.theta = theta;
    m.omega0 = omega0;
    m.mode_count = mode_count;
    m.validate();
    return m;
  }

  /// Mode count J = floor(omega_cutoff / omega0).
  static SpectralModel drude_lorentz_cutoff(double lambda, double gamma, double theta, double omega0,
                                            double omega_cutoff) {
    if (!(omega0 > 0.0) || !(omega_cutoff > 0.0)) throw DomainError("drude_lorentz: frequencies must be positive");
    const auto count = static_cast<std::size_t>(std::floor(omega_cutoff / omega0 + 1e-9));
    return drude_lorentz(lambda, gamma, theta, omega0, count);
  }

  static SpectralModel custom_modes(std::vector<CustomMode> modes) {
    SpectralModel m;
    m.kind = SpectralKind::custom_modes;
    m.custom = std::move(modes);
    m.mode_count = m.custom.size();
    m.validate();
    return m;
  }

  std::size_t size() const noexcept { return mode_count; }

  /// Angular frequency of mode j (zero-based).
  double frequency(std::size_t j) const {
    return kind == SpectralKind::drude_lorentz ? static_cast<double>(j + 1) * omega0 : custom[j].omega;
  }

  void validate() const {
    if (!(tail_epsilon >= 0.0 && tail_epsilon < 1.0)) throw DomainError("spectral model: tail_epsilon must lie in [0, 1)");
    if (kind == SpectralKind::drude_lorentz) {
      if (!(lambda > 0.0 && gamma > 0.0 && theta > 0.0 && omega0 > 0.0))
        throw DomainError("spectral model: lambda, gamma, theta and omega0 must be positive");
      if (!std::isfinite(lambda * gamma * theta * omega0)) throw DomainError("spectral model: non-finite parameter");
      if (mode_count < 1) throw DomainError("spectral model: at least one mode is required");
      return;
    }
    if (custom.empty()) throw DomainError("spectral model: custom mode table is empty");
    if (custom.size() != mode_count) throw DomainError("spectral model: mode_count does not match the custom table");
    double previous = 0.0;
    for (const auto& m : custom) {
      if (!(m.omega > previous) || !std::isfinite(m.omega))
        throw DomainError("spectral model: custom frequencies must be positive and strictly increasing");
      if (!(m.amplitude >= 0.0) || !std::isfinite(m.amplitude))
        throw DomainError("spectral model: custom amplitudes must be finite and non-negative");
      previous = m.omega;
    }
  }
};

/// coth(x) for x > 0, switching to the Laurent series near zero.
inline double coth_stable(double x) {
  if (!(x > 0.0)) throw DomainError("coth_stable: argument must be positive");
  if (x < 1e-4) return 1.0 / x + x / 3.0;
  if (x > 20.0) return 1.0;
  return 1.0 / std::tanh(x);
}

struct ModeAmplitudes {
  std::vector<double> c;
};

/// Per-mode field amplitudes c_j (same units as the frequencies).
inline ModeAmplitudes mode_amplitudes(const SpectralModel& model) {
  model.validate();
  ModeAmplitudes out;
  out.c.resize(model.size());
  if (model.kind == SpectralKind::custom_modes) {
    for (std::size_t j = 0; j < model.size(); ++j) out.c[j] = model.custom[j].amplitude;
    return out;
  }
  const double prefactor = model.lambda * model.gamma * model.omega0;
  const double gamma2 = model.gamma * model.gamma;
  for (std::size_t j = 0; j < model.size(); ++j) {
    const double w = model.frequency(j);
    const double coth = coth_stable(w / (2.0 * model.theta));
    out.c[j] = w * std::sqrt(prefactor * coth / (2.0 * w * (w * w + gamma2)));
    if (!std::isfinite(out.c[j])) throw NumericError("mode_amplitudes: non-finite amplitude");
  }
  return out;
}

/// Resolved modes after the optional tail cutoff. `index` holds each kept
/// mode's position in the full model; it is the counter used for phase draws.
struct ModeTable {
  std::vector<double> omega;
  std::vector<double> amplitude;
  std::vector<std::size_t> index;
  // Upper bound on the decoherence-factor error from dropped modes.
  double chi_error_bound = 0.0;
  std::size_t dropped = 0;

  std::size_t size() const noexcept { return omega.size(); }

  double amplitude_sum() const {
    double s = 0.0;
    for (double c : amplitude) s += c;
    return s;
  }
};

inline ModeTable mode_table(const SpectralModel& model) {
  const ModeAmplitudes amps = mode_amplitudes(model);
  const std::size_t n = model.size();
  std::vector<double> weight(n);
  double max_weight = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double r = amps.c[j] / model.frequency(j);
    weight[j] = r * r;
    max_weight = std::max(max_weight, weight[j]);
  }
  const double cutoff = model.tail_epsilon * max_weight;
  ModeTable table;
  table.omega.reserve(n);
  table.amplitude.reserve(n);
  table.index.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (model.tail_epsilon > 0.0 && weight[j] < cutoff) {
      table.chi_error_bound += 2.0 * weight[j];
      ++table.dropped;
      continue;
    }
    table.omega.push_back(model.frequency(j));
    table.amplitude.push_back(amps.c[j]);
    table.index.push_back(j);
  }
  return table;
}

struct NoiseRealization {
  std::vector<double> phases;
  RngKey key;

  std::uint64_t seed() const noexcept { return key.seed; }
};

inline NoiseRealization sample_realization(const ModeTable& modes, const RngKey& key) {
  NoiseRealization r{std::vector<double>(modes.size()), key};
  for (std::size_t k = 0; k < modes.size(); ++k) r.phases[k] = uniform_phase(key, modes.index[k]);
  return r;
}

inline NoiseRealization sample_realization(const SpectralModel& model, std::uint64_t seed) {
  return sample_realization(mode_table(model), RngKey{seed, StreamTag::single, 0});
}

namespace detail {

inline void check_shapes(const NoiseRealization& r, const ModeTable& modes) {
  if (r.phases.size() != modes.size()) throw DomainError("realization and mode table sizes differ");
}

inline constexpr std::size_t reanchor_period = 64;

/// Calls fn(k, exp(i (omega k dt + offset))) for k in [0, n) by repeated
/// rotation, recomputing the phasor exactly every reanchor_period steps.
template <class Fn>
void rotate_on_grid(double omega, double offset, double dt, std::size_t n, Fn&& fn) {
  const double step_re = std::cos(omega * dt);
  const double step_im = std::sin(omega * dt);
  double re = 1.0, im = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k % reanchor_period == 0) {
      const double angle = omega * dt * static_cast<double>(k) + offset;
      re = std::cos(angle);
      im = std::sin(angle);
    } else {
      const double next_re = re * step_re - im * step_im;
      im = re * step_im + im * step_re;
      re = next_re;
    }
    fn(k, cplx(re, im));
  }
}

}  // namespace detail

/// beta(t) for one realization.
inline double field_value(const NoiseRealization& r, const ModeTable& modes, double t) {
  detail::check_shapes(r, modes);
  double v = 0.0;
  for (std::size_t j = 0; j < modes.size(); ++j) v += modes.amplitude[j] * std::sin(modes.omega[j] * t + r.phases[j]);
  return v;
}

/// Closed-form int_0^t beta(s) ds. Uses
/// cos(psi) - cos(w t + psi) = 2 sin(w t / 2) sin(w t / 2 + psi),
/// which stays accurate for small w t.
inline double integrated_field(const NoiseRealization& r, const ModeTable& modes, double t) {
  detail::check_shapes(r, modes);
  double v = 0.0;
  for (std::size_t j = 0; j < modes.size(); ++j) {
    const double half = 0.5 * modes.omega[j] * t;
    v += 2.0 * modes.amplitude[j] / modes.omega[j] * std::sin(half) * std::sin(half + r.phases[j]);
  }
  return v;
}

/// integrated_field at t_k = k dt for k in [0, points).
inline std::vector<double> integrated_field_on_grid(const NoiseRealization& r, const ModeTable& modes, double dt,
                                                    std::size_t points) {
  detail::check_shapes(r, modes);
  std::vector<double> out(points, 0.0);
  // Modes are advanced in interleaved lanes so the rotation recurrences are
  // independent within a time step.
  constexpr std::size_t lanes = 8;
  double scale[lanes], base[lanes], omega[lanes], phase[lanes];
  double step_re[lanes], step_im[lanes], re[lanes] = {}, im[lanes] = {};
  for (std::size_t j0 = 0; j0 < modes.size(); j0 += lanes) {
    const std::size_t width = std::min(lanes, modes.size() - j0);
    for (std::size_t l = 0; l < lanes; ++l) {
      const bool active = l < width;
      omega[l] = active ? modes.omega[j0 + l] : 0.0;
      phase[l] = active ? r.phases[j0 + l] : 0.0;
      scale[l] = active ? modes.amplitude[j0 + l] / modes.omega[j0 + l] : 0.0;
      base[l] = std::cos(phase[l]);
      step_re[l] = std::cos(omega[l] * dt);
      step_im[l] = std::sin(omega[l] * dt);
    }
    for (std::size_t k = 0; k < points; ++k) {
      if (k % detail::reanchor_period == 0) {
        for (std::size_t l = 0; l < lanes; ++l) {
          const double angle = omega[l] * dt * static_cast<double>(k) + phase[l];
          re[l] = std::cos(angle);
          im[l] = std::sin(angle);
        }
      } else {
        for (std::size_t l = 0; l < lanes; ++l) {
          const double next_re = re[l] * step_re[l] - im[l] * step_im[l];
          im[l] = re[l] * step_im[l] + im[l] * step_re[l];
          re[l] = next_re;
        }
      }
      double acc = 0.0;
      for (std::size_t l = 0; l < lanes; ++l) acc += scale[l] * (base[l] - re[l]);
      out[k] += acc;
    }
  }
  out[0] = 0.0;
  return out;
}

/// Ensemble- and time-averaged <beta(t + tau) beta(t)> over t in [0, window).
inline double autocorrelation_check(std::span<const NoiseRealization> realizations, const ModeTable& modes, double tau,
                                    double window) {
  if (realizations.empty()) throw DomainError("autocorrelation_check: need at least one realization");
  if (!(window > 0.0)) throw DomainError("autocorrelation_check: window must be positive");
  if (modes.size() == 0) return 0.0;
  const double omega_max = *std::max_element(modes.omega.begin(), modes.omega.end());
  const auto samples = std::max<std::size_t>(1024, static_cast<std::size_t>(std::ceil(window * 8.0 * omega_max / std::numbers::pi)));
  const double h = window / static_cast<double>(samples);
  double acc = 0.0;
  for (const auto& r : realizations) {
    double sum = 0.0;
    for (std::size_t m = 0; m < samples; ++m) {
      const double t = h * static_cast<double>(m);
      sum += field_value(r, modes, t + tau) * field_value(r, modes, t);
    }
    acc += sum / static_cast<double>(samples);
  }
  return acc / static_cast<double>(realizations.size());
}

/// Large-ensemble limit of the autocorrelation: (1/2) sum_j c_j^2 cos(omega_j tau).
inline double autocorrelation_limit(const ModeTable& modes, double tau) {
  double v = 0.0;
  for (std::size_t j = 0; j < modes.size(); ++j)
    v += 0.5 * modes.amplitude[j] * modes.amplitude[j] * std::cos(modes.omega[j] * tau);
  return v;
}

}  // namespace nmq
