#pragma once

// Dense two-qubit state algebra: density matrices, spectra, partial traces,
// entropies and trace distances.
//
// Basis ordering is |s a>, index = 2*s + a, with the system qubit as the
// most significant bit.

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nmq {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Raised when an input violates an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a computation produces a value that cannot be trusted
/// (non-finite intermediate, clamping beyond tolerance, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace tolerance {
inline constexpr double hermitian = 1e-12;
inline constexpr double trace = 1e-12;
inline constexpr double psd = 1e-10;
}  // namespace tolerance

inline double hermiticity_defect(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

/// Hermitian operator of dimension 2 or 4 (generators, Pauli observables, SLDs).
class HermitianOperator {
 public:
  HermitianOperator() = default;

  explicit HermitianOperator(Matrix m, double tol = tolerance::hermitian) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw DomainError("operator must be square");
    if (hermiticity_defect(m_) > tol) throw DomainError("operator is not Hermitian");
  }

  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }

 private:
  Matrix m_;
};

/// Eigendecomposition with eigenvalues sorted in descending order; column i of
/// `vectors` is the eigenvector for `values[i]`.
struct Spectrum {
  Eigen::VectorXd values;
  Matrix vectors;
};

inline Spectrum eigh(const Matrix& m) {
  if (m.rows() != m.cols()) throw DomainError("eigh: matrix must be square");
  if (hermiticity_defect(m) > tolerance::hermitian) throw DomainError("eigh: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(m));
  if (solver.info() != Eigen::Success) throw NumericError("eigh: eigensolver did not converge");
  // Eigen returns ascending order.
  const Eigen::Index n = m.rows();
  Spectrum s{Eigen::VectorXd(n), Matrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    s.values[i] = solver.eigenvalues()[n - 1 - i];
    s.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return s;
}

inline Spectrum eigh(const HermitianOperator& op) { return eigh(op.matrix()); }

inline Matrix reconstruct(const Spectrum& s) {
  return s.vectors * s.values.cast<cplx>().asDiagonal() * s.vectors.adjoint();
}

/// Hermitian, unit-trace, positive semidefinite operator on one or two qubits.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix m) : m_(std::move(m)) {
    const auto n = m_.rows();
    if (m_.cols() != n || (n != 2 && n != 4)) throw DomainError("density matrix must be 2x2 or 4x4");
    if (!m_.allFinite()) throw DomainError("density matrix has non-finite entries");
    if (hermiticity_defect(m_) > tolerance::hermitian) throw DomainError("density matrix is not Hermitian");
    if (std::abs(m_.trace() - cplx(1.0)) > tolerance::trace) throw DomainError("density matrix trace is not 1");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m_, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -tolerance::psd)
      throw DomainError("density matrix is not positive semidefinite");
  }

  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }
  cplx operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Matrix m_;
};

inline Spectrum eigh(const DensityMatrix& rho) { return eigh(rho.matrix()); }

// ---------------------------------------------------------------------------
// operators

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Matrix identity(Eigen::Index n) { return Matrix::Identity(n, n); }

inline Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}

inline Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline Matrix sigma_z_system() { return kron(pauli_z(), identity(2)); }
inline Matrix sigma_z_ancilla() { return kron(identity(2), pauli_z()); }

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }
inline Matrix anticommutator(const Matrix& a, const Matrix& b) { return a * b + b * a; }

inline DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != 2 || b.dim() != 2) throw DomainError("tensor_product: both factors must be single-qubit");
  return DensityMatrix(kron(a.matrix(), b.matrix()));
}

// ---------------------------------------------------------------------------
// states

/// Bell state (|00> + |11>)/sqrt(2) whose |00><11| coherence is scaled by
/// f * exp(-i phase).
inline DensityMatrix bell_dephased_state(double f, double phase) {
  if (!(f >= 0.0 && f <= 1.0)) throw DomainError("bell_dephased_state: f must lie in [0, 1]");
  const cplx g = std::polar(f, -phase);
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = 0.5;
  m(3, 3) = 0.5;
  m(0, 3) = 0.5 * g;
  m(3, 0) = 0.5 * std::conj(g);
  return DensityMatrix(std::move(m));
}

inline DensityMatrix maximally_mixed(Eigen::Index dim) {
  return DensityMatrix(identity(dim) / static_cast<double>(dim));
}

inline DensityMatrix pure_state(const Vector& psi) {
  const double n = psi.norm();
  if (n == 0.0) throw DomainError("pure_state: zero vector");
  const Vector v = psi / n;
  return DensityMatrix(v * v.adjoint());
}

enum class Subsystem { system, ancilla };

/// Reduced state of one qubit of a two-qubit state.
inline DensityMatrix partial_trace(const DensityMatrix& rho, Subsystem keep) {
  if (rho.dim() != 4) throw DomainError("partial_trace: input must be a two-qubit state");
  Matrix out = Matrix::Zero(2, 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        if (keep == Subsystem::system)
          out(i, j) += rho(2 * i + k, 2 * j + k);
        else
          out(i, j) += rho(2 * k + i, 2 * k + j);
      }
    }
  }
  return DensityMatrix(std::move(out));
}

/// Eigenvalues in descending order with [-psd tolerance, 0) clamped to zero.
inline Eigen::VectorXd clamped_eigenvalues(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.matrix(), Eigen::EigenvaluesOnly);
  Eigen::VectorXd p = solver.eigenvalues().reverse();
  for (auto& v : p) {
    if (v < -tolerance::psd) throw NumericError("negative eigenvalue beyond clamping tolerance");
    v = std::max(v, 0.0);
  }
  return p;
}

/// Shannon entropy in bits of a probability vector, with 0 log 0 = 0.
inline double shannon_entropy_bits(const Eigen::VectorXd& p) {
  double s = 0.0;
  for (double v : p)
    if (v > 0.0) s -= v * std::log2(v);
  return s;
}

/// Binary entropy h2(p) in bits.
inline double binary_entropy(double p) {
  Eigen::VectorXd v(2);
  v << p, 1.0 - p;
  return shannon_entropy_bits(v);
}

/// von Neumann entropy -Tr(rho log2 rho) in bits.
inline double von_neumann_entropy(const DensityMatrix& rho) {
  const double s = shannon_entropy_bits(clamped_eigenvalues(rho));
  return std::clamp(s, 0.0, std::log2(static_cast<double>(rho.dim())));
}

inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DomainError("trace_distance: dimension mismatch");
  const Matrix diff = hermitize(rho.matrix() - sigma.matrix());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(diff, Eigen::EigenvaluesOnly);
  const double d = 0.5 * solver.eigenvalues().cwiseAbs().sum();
  return std::clamp(d, 0.0, 1.0);
}

}  // namespace nmq
