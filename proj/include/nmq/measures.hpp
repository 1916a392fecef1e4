#pragma once

// Global and local non-Markovianity quantities on dephasing trajectories.
//
// Global: quantum mutual information I(t) and its accumulated rises N0, the
// trace-distance (BLP) and divisibility (RHP) witnesses.
// Local: quantum Fisher information Q of a phase imprinted by a generator,
// its flow dQ/dt, the symmetric logarithmic derivative and the split of the
// flow into per-channel contributions gamma_ij * J_ij.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nmq/core_quantum.hpp"
#include "nmq/dephasing.hpp"

namespace nmq {

struct MeasureConfig {
  double horizon = 5.0;              // t_f, us
  double positive_threshold = 1e-12;  // rates at or below this count as non-positive

  void validate() const {
    if (!(horizon >= 0.0)) throw DomainError("measure config: horizon must be non-negative");
    if (!(positive_threshold >= 0.0)) throw DomainError("measure config: positive threshold must be non-negative");
  }
};

/// Number of grid points with t_k <= horizon.
inline std::size_t points_within(const TimeGrid& grid, double horizon) {
  if (horizon > grid.end() + 1e-9 * std::max(1.0, horizon))
    throw DomainError("measure horizon lies beyond the trajectory grid");
  return static_cast<std::size_t>(std::floor(horizon / grid.dt + 1e-9)) + 1;
}

// ---------------------------------------------------------------------------
// mutual information

/// S(rho_s) + S(rho_a) - S(rho_sa), in bits.
inline double qmi(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw DomainError("qmi: two-qubit state required");
  return von_neumann_entropy(partial_trace(rho, Subsystem::system)) +
         von_neumann_entropy(partial_trace(rho, Subsystem::ancilla)) - von_neumann_entropy(rho);
}

/// Closed form on the dephased Bell family: 2 - h2((1 + f) / 2).
inline double qmi_from_coherence(double f) { return 2.0 - binary_entropy(0.5 * (1.0 + f)); }

/// dI/dt = -chi' f log2((1 + f) / (1 - f)); zero at f = 1, where chi' = 0.
inline double qmi_rate_closed_form(double f, double chi_rate) {
  if (f >= 1.0 || f <= 0.0) return 0.0;
  return -chi_rate * f * std::log2((1.0 + f) / (1.0 - f));
}

inline std::vector<double> qmi_curve(const Trajectory& traj) {
  std::vector<double> out(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) out[k] = qmi(traj.rho[k]);
  return out;
}

namespace detail {

inline double central_difference(std::span<const double> y, std::size_t k, double dt) {
  const std::size_t n = y.size();
  if (n < 2) throw DomainError("finite difference needs at least two points");
  if (k == 0) return (y[1] - y[0]) / dt;
  if (k == n - 1) return (y[n - 1] - y[n - 2]) / dt;
  return (y[k + 1] - y[k - 1]) / (2.0 * dt);
}

/// Sum of the increments of y whose slope exceeds `threshold`.
inline double rising_sum(std::span<const double> y, double dt, double threshold) {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < y.size(); ++k) {
    const double step = y[k + 1] - y[k];
    if (step / dt > threshold) total += step;
  }
  return total;
}

}  // namespace detail

/// Rate of change of the mutual information at grid index k. Analytic
/// trajectories use the closed form; other kinds fall back to central
/// differences of I over the grid.
inline double qmi_rate(const Trajectory& traj, std::size_t k) {
  if (k >= traj.size()) throw DomainError("qmi_rate: index outside the trajectory");
  if (traj.kind == EvolutionMode::analytic) return qmi_rate_closed_form(traj.f[k], traj.chi_rate[k]);
  const auto curve = qmi_curve(traj);
  return detail::central_difference(curve, k, traj.grid.dt);
}

/// N0: accumulated rise of the mutual information over [0, t_f].
inline double n0_measure(const Trajectory& traj, const MeasureConfig& cfg = {}) {
  cfg.validate();
  const std::size_t n = points_within(traj.grid, cfg.horizon);
  std::vector<double> curve(n);
  for (std::size_t k = 0; k < n; ++k) curve[k] = qmi(traj.rho[k]);
  return detail::rising_sum(curve, traj.grid.dt, cfg.positive_threshold);
}

// ---------------------------------------------------------------------------
// trace distance (BLP)

/// Single-qubit states (I +- Re(g) sigma_x +- Im(g) sigma_y) / 2, the |+>, |->
/// pair after its coherence has been scaled by g.
inline std::pair<DensityMatrix, DensityMatrix> dephased_pair(cplx g) {
  Matrix plus(2, 2), minus(2, 2);
  plus << 0.5, 0.5 * g, 0.5 * std::conj(g), 0.5;
  minus << 0.5, -0.5 * g, -0.5 * std::conj(g), 0.5;
  return {DensityMatrix(std::move(plus)), DensityMatrix(std::move(minus))};
}

inline std::vector<double> pair_distance_curve(std::span<const DensityMatrix> first,
                                               std::span<const DensityMatrix> second) {
  if (first.size() != second.size()) throw DomainError("pair trajectories differ in length");
  std::vector<double> d(first.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = trace_distance(first[k], second[k]);
  return d;
}

/// BLP measure for an arbitrary pair of evolved states sampled on one grid.
inline double blp_measure(std::span<const DensityMatrix> first, std::span<const DensityMatrix> second,
                          const TimeGrid& grid, const MeasureConfig& cfg = {}) {
  cfg.validate();
  const std::size_t n = points_within(grid, cfg.horizon);
  if (first.size() < n || second.size() < n) throw DomainError("blp_measure: pair shorter than the horizon");
  const auto d = pair_distance_curve(first.first(n), second.first(n));
  return detail::rising_sum(d, grid.dt, cfg.positive_threshold);
}

/// BLP measure for a dephasing coherence curve using the |+>, |-> pair on the
/// noisy qubit, for which D(t) = f(t).
inline double blp_measure(std::span<const double> f, double dt, const MeasureConfig& cfg = {}) {
  cfg.validate();
  std::vector<double> d(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const auto [plus, minus] = dephased_pair(cplx(f[k], 0.0));
    d[k] = trace_distance(plus, minus);
  }
  return detail::rising_sum(d, dt, cfg.positive_threshold);
}

inline double blp_measure(const Trajectory& traj, const MeasureConfig& cfg = {}) {
  const std::size_t n = points_within(traj.grid, cfg.horizon);
  return blp_measure(std::span<const double>(traj.f).first(n), traj.grid.dt, cfg);
}

// ---------------------------------------------------------------------------
// divisibility (RHP)

/// Per-step witness max(0, d ln f / dt); the intermediate dephasing map over
/// [t_k, t_k+1] scales coherences by f_k+1 / f_k and fails complete
/// positivity exactly when that ratio exceeds one.
inline std::vector<double> rhp_witness(std::span<const double> f, double dt, double threshold = 0.0) {
  for (double v : f)
    if (!(v > 0.0)) throw DomainError("rhp: coherence must stay positive to form the intermediate map");
  std::vector<double> g(f.size(), 0.0);
  for (std::size_t k = 0; k + 1 < f.size(); ++k) {
    const double rate = std::log(f[k + 1] / f[k]) / dt;
    g[k] = rate > threshold ? rate : 0.0;
  }
  return g;
}

inline double rhp_measure(std::span<const double> f, double dt, const MeasureConfig& cfg = {}) {
  cfg.validate();
  const auto g = rhp_witness(f, dt, cfg.positive_threshold);
  double total = 0.0;
  for (double v : g) total += v * dt;
  return total;
}

inline double rhp_measure(const Trajectory& traj, const MeasureConfig& cfg = {}) {
  const std::size_t n = points_within(traj.grid, cfg.horizon);
  return rhp_measure(std::span<const double>(traj.f).first(n), traj.grid.dt, cfg);
}

// ---------------------------------------------------------------------------
// quantum Fisher information

struct Generator {
  HermitianOperator op;

  /// (sigma_z^s + sigma_z^a) / 2
  static Generator collective_z() { return {HermitianOperator(0.5 * (sigma_z_system() + sigma_z_ancilla()))}; }
};

/// Q = 2 sum_{P_i + P_j > floor} (P_i - P_j)^2 / (P_i + P_j) |<psi_i|O|psi_j>|^2.
inline double qfi(const DensityMatrix& rho, const Generator& gen, double floor = 1e-12) {
  if (gen.op.dim() != rho.dim()) throw DomainError("qfi: generator dimension mismatch");
  const Spectrum s = eigh(rho);
  const Matrix o = s.vectors.adjoint() * gen.op.matrix() * s.vectors;
  double q = 0.0;
  for (Eigen::Index i = 0; i < s.values.size(); ++i) {
    for (Eigen::Index j = 0; j < s.values.size(); ++j) {
      const double sum = s.values[i] + s.values[j];
      if (sum <= floor) continue;
      const double diff = s.values[i] - s.values[j];
      q += 2.0 * diff * diff / sum * std::norm(o(i, j));
    }
  }
  return q;
}

struct FlowOptions {
  // Odd window length for local quadratic least-squares smoothing; values
  // below 3 disable smoothing.
  std::size_t smoothing_window = 0;
};

namespace detail {

inline double local_quadratic_slope(std::span<const double> y, std::size_t k, double dt, std::size_t window) {
  const std::size_t n = y.size();
  const std::size_t w = std::min(window, n);
  const std::size_t half = w / 2;
  std::size_t lo = k > half ? k - half : 0;
  if (lo + w > n) lo = n - w;
  Eigen::MatrixXd design(w, 3);
  Eigen::VectorXd rhs(w);
  for (std::size_t i = 0; i < w; ++i) {
    const double x = (static_cast<double>(lo + i) - static_cast<double>(k)) * dt;
    design(i, 0) = 1.0;
    design(i, 1) = x;
    design(i, 2) = x * x;
    rhs[i] = y[lo + i];
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);
  return coef[1];
}

}  // namespace detail

/// dQ/dt on a uniform grid: central differences, one-sided at the ends, or a
/// local quadratic fit when smoothing is enabled.
inline std::vector<double> qfi_flow(std::span<const double> q, double dt, const FlowOptions& opts = {}) {
  if (q.size() < 3) throw DomainError("qfi_flow: at least three samples are required");
  if (!(dt > 0.0)) throw DomainError("qfi_flow: dt must be positive");
  std::vector<double> flow(q.size());
  const bool smooth = opts.smoothing_window >= 3;
  if (smooth && opts.smoothing_window % 2 == 0) throw DomainError("qfi_flow: smoothing window must be odd");
  for (std::size_t k = 0; k < q.size(); ++k)
    flow[k] = smooth ? detail::local_quadratic_slope(q, k, dt, opts.smoothing_window)
                     : detail::central_difference(q, k, dt);
  return flow;
}

struct QfiPair {
  double q = 4.0;
  double flow = 0.0;
};

/// Q = 4 exp(-4 chi) and F = -16 chi' exp(-4 chi) with chi summed over the
/// noisy channels.
inline QfiPair closed_form_qfi(const ChannelConfig& config, double t) {
  config.validate();
  double chi = 0.0, rate = 0.0;
  if (config.system_noisy) {
    chi += analytic_chi(config.system_model, t);
    rate += analytic_chi_rate(config.system_model, t);
  }
  if (config.ancilla_noisy) {
    chi += analytic_chi(config.ancilla_model, t);
    rate += analytic_chi_rate(config.ancilla_model, t);
  }
  const double decay = std::exp(-4.0 * chi);
  return {4.0 * decay, -16.0 * rate * decay};
}

/// closed_form_qfi evaluated from a trajectory's stored chi and chi'.
inline std::vector<QfiPair> closed_form_qfi(const Trajectory& traj) {
  std::vector<QfiPair> out(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double decay = std::exp(-4.0 * traj.chi[k]);
    out[k] = {4.0 * decay, -16.0 * traj.chi_rate[k] * decay};
  }
  return out;
}

// ---------------------------------------------------------------------------
// symmetric logarithmic derivative

/// Solves d_rho = (L rho + rho L) / 2 in the eigenbasis of rho:
/// L_ij = 2 <psi_i|d_rho|psi_j> / (p_i + p_j), zero where p_i + p_j < floor.
inline HermitianOperator sld(const DensityMatrix& rho, const HermitianOperator& d_rho, double floor = 1e-10) {
  if (d_rho.dim() != rho.dim()) throw DomainError("sld: derivative dimension mismatch");
  if (std::abs(d_rho.matrix().trace()) > 1e-10) throw DomainError("sld: parameter derivative must be traceless");
  const Spectrum s = eigh(rho);
  const Matrix d = s.vectors.adjoint() * d_rho.matrix() * s.vectors;
  const Eigen::Index n = rho.dim();
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double sum = s.values[i] + s.values[j];
      if (sum >= floor) l(i, j) = 2.0 * d(i, j) / sum;
    }
  }
  return HermitianOperator(hermitize(s.vectors * l * s.vectors.adjoint()));
}

/// Tr(rho L^2).
inline double sld_qfi(const DensityMatrix& rho, const HermitianOperator& l) {
  return (rho.matrix() * l.matrix() * l.matrix()).trace().real();
}

/// exp(-i theta O) rho exp(i theta O).
inline DensityMatrix unitary_encode(const DensityMatrix& rho, const Generator& gen, double theta) {
  const Spectrum s = eigh(gen.op);
  Vector phases(s.values.size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases[i] = std::polar(1.0, -theta * s.values[i]);
  const Matrix u = s.vectors * phases.asDiagonal() * s.vectors.adjoint();
  return DensityMatrix(hermitize(u * rho.matrix() * u.adjoint()));
}

/// -i [O, rho], the exact derivative of unitary_encode at theta = 0.
inline HermitianOperator unitary_derivative(const DensityMatrix& rho, const Generator& gen) {
  return HermitianOperator(hermitize(cplx(0.0, -1.0) * commutator(gen.op.matrix(), rho.matrix())));
}

/// Central difference (rho(theta0 + d) - rho(theta0 - d)) / (2 d), Hermitized.
template <class EvolveFn>
HermitianOperator fd_param_derivative(EvolveFn&& evolve_fn, double theta0, double dtheta) {
  if (!(dtheta > 0.0)) throw DomainError("fd_param_derivative: step must be positive");
  const DensityMatrix plus = evolve_fn(theta0 + dtheta);
  const DensityMatrix minus = evolve_fn(theta0 - dtheta);
  return HermitianOperator(hermitize((plus.matrix() - minus.matrix()) / (2.0 * dtheta)));
}

// ---------------------------------------------------------------------------
// channel decomposition of the flow

/// Jump operators A_k with instantaneous rates gamma_k.
struct ChannelSpec {
  std::vector<Matrix> operators;
  std::vector<double> rates;
  std::vector<std::string> labels;

  void add(Matrix op, double rate, std::string label) {
    operators.push_back(std::move(op));
    rates.push_back(rate);
    labels.push_back(std::move(label));
  }
};

/// Channels A_ij = |e_i><e_j| for the requested (i, j) pairs of the
/// orthonormal basis held in the columns of `basis`.
inline ChannelSpec matrix_unit_channels(const Matrix& basis, const std::vector<std::pair<int, int>>& pairs,
                                        const std::vector<double>& rates) {
  if (pairs.size() != rates.size()) throw DomainError("matrix_unit_channels: one rate per pair is required");
  if ((basis.adjoint() * basis - identity(basis.cols())).cwiseAbs().maxCoeff() > 1e-10)
    throw DomainError("matrix_unit_channels: basis is not orthonormal");
  ChannelSpec spec;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    if (i < 0 || j < 0 || i >= basis.cols() || j >= basis.cols()) throw DomainError("matrix_unit_channels: index out of range");
    spec.add(basis.col(i) * basis.col(j).adjoint(), rates[k], "A" + std::to_string(i) + std::to_string(j));
  }
  return spec;
}

/// J_k = -Tr(rho [L, A_k]^dagger [L, A_k]) <= 0.
inline std::vector<double> channel_information_terms(const DensityMatrix& rho, const HermitianOperator& l,
                                                     const ChannelSpec& channels) {
  std::vector<double> terms;
  terms.reserve(channels.operators.size());
  for (const auto& a : channels.operators) {
    if (a.rows() != rho.dim() || a.cols() != rho.dim()) throw DomainError("channel operator dimension mismatch");
    const Matrix c = commutator(l.matrix(), a);
    terms.push_back(-(rho.matrix() * c.adjoint() * c).trace().real());
  }
  return terms;
}

/// Per-channel flows F_k = gamma_k J_k; their sum is the total QFI flow under
/// the corresponding Lindblad dynamics.
inline std::vector<double> channel_flow_decomposition(const DensityMatrix& rho, const HermitianOperator& l,
                                                      const ChannelSpec& channels) {
  if (channels.rates.size() != channels.operators.size())
    throw DomainError("channel_flow_decomposition: rate and operator counts differ");
  if (l.dim() != rho.dim()) throw DomainError("channel_flow_decomposition: SLD dimension mismatch");
  auto flows = channel_information_terms(rho, l, channels);
  for (std::size_t k = 0; k < flows.size(); ++k) flows[k] *= channels.rates[k];
  return flows;
}

// ---------------------------------------------------------------------------
// report

struct MeasureCurves {
  std::vector<double> qmi;
  std::vector<double> qmi_rate;
  std::vector<double> trace_distance;
  std::vector<double> rhp_witness;
  std::vector<double> qfi;
  std::vector<double> qfi_flow;
};

struct MeasureReport {
  double n0 = 0.0;
  double blp = 0.0;
  double rhp = 0.0;
  MeasureCurves curves;
};

inline MeasureReport measure_report(const Trajectory& traj, const MeasureConfig& cfg = {},
                                    const Generator& gen = Generator::collective_z(), const FlowOptions& flow = {}) {
  MeasureReport r;
  r.n0 = n0_measure(traj, cfg);
  r.blp = blp_measure(traj, cfg);
  r.rhp = rhp_measure(traj, cfg);
  const std::size_t n = traj.size();
  r.curves.qmi = qmi_curve(traj);
  r.curves.qmi_rate.resize(n);
  r.curves.trace_distance.resize(n);
  r.curves.qfi.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    r.curves.qmi_rate[k] = traj.kind == EvolutionMode::analytic
                               ? qmi_rate_closed_form(traj.f[k], traj.chi_rate[k])
                               : detail::central_difference(r.curves.qmi, k, traj.grid.dt);
    const auto [plus, minus] = dephased_pair(cplx(traj.f[k], 0.0));
    r.curves.trace_distance[k] = trace_distance(plus, minus);
    r.curves.qfi[k] = qfi(traj.rho[k], gen);
  }
  r.curves.rhp_witness = rhp_witness(traj.f, traj.grid.dt, cfg.positive_threshold);
  if (n >= 3) r.curves.qfi_flow = qfi_flow(r.curves.qfi, traj.grid.dt, flow);
  return r;
}

}  // namespace nmq
