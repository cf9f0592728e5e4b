#pragma once

// Spin operators, canonical states and the spin-1/2 Bloch parameterization.
//
// Basis convention: e_0 is the eigenvector of J_z with the highest eigenvalue
// J, e_{2J} the one with the lowest (-J).

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "spinfb/errors.hpp"

namespace spinfb {

using Index = Eigen::Index;

template <typename Real>
using Matrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

template <typename Real>
using Vector3 = Eigen::Matrix<Real, 3, 1>;

/// Tolerance used by every density-matrix invariant check.
inline constexpr double kStateTolerance = 1e-10;

/// Returns a description of the first violated density-matrix invariant of
/// `m`, or nullopt if it is Hermitian, unit-trace and PSD within `tol`.
template <typename Derived>
std::optional<std::string> state_violation(
    const Eigen::MatrixBase<Derived>& m,
    typename Derived::RealScalar tol = kStateTolerance) {
  using Real = typename Derived::RealScalar;
  if (m.rows() != m.cols() || m.rows() < 2) {
    return std::string("not a square matrix of dimension >= 2");
  }
  const Matrix<Real> a = m;
  const Real herm = (a - a.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol) {
    std::ostringstream os;
    os << "not Hermitian (max |rho - rho*| = " << herm << ")";
    return os.str();
  }
  const Real trace_err = std::abs(a.trace() - std::complex<Real>(1));
  if (trace_err > tol) {
    std::ostringstream os;
    os << "trace differs from 1 by " << trace_err;
    return os.str();
  }
  const Matrix<Real> h = (a + a.adjoint()) / Real(2);
  Eigen::SelfAdjointEigenSolver<Matrix<Real>> es(h, Eigen::EigenvaluesOnly);
  const Real min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -tol) {
    std::ostringstream os;
    os << "not positive semidefinite (min eigenvalue " << min_eig << ")";
    return os.str();
  }
  return std::nullopt;
}

/// N x N positive unit-trace Hermitian matrix.
///
/// `checked` validates the invariants; `unchecked` is for values produced by
/// code that already guarantees them (e.g. the physicality projection).
template <typename Real>
class DensityMatrix {
 public:
  using MatrixType = Matrix<Real>;

  DensityMatrix() = default;

  static DensityMatrix checked(MatrixType m, Real tol = Real(kStateTolerance)) {
    if (auto v = state_violation(m, tol)) throw InvalidStateError(*v);
    return DensityMatrix(std::move(m));
  }

  static DensityMatrix unchecked(MatrixType m) noexcept {
    return DensityMatrix(std::move(m));
  }

  const MatrixType& matrix() const noexcept { return m_; }
  operator const MatrixType&() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }

  bool operator==(const DensityMatrix& other) const {
    return m_.rows() == other.m_.rows() && m_.cols() == other.m_.cols() &&
           m_ == other.m_;
  }

 private:
  explicit DensityMatrix(MatrixType m) : m_(std::move(m)) {}

  MatrixType m_;
};

template <typename Real>
struct BlochVector {
  Real x{};
  Real y{};
  Real z{};

  Vector3<Real> vec() const { return {x, y, z}; }
  Real norm_squared() const { return x * x + y * y + z * z; }

  static BlochVector from(const Vector3<Real>& v) { return {v(0), v(1), v(2)}; }
  bool operator==(const BlochVector&) const = default;
};

template <typename Real>
struct PauliMatrices {
  Matrix<Real> x;
  Matrix<Real> y;
  Matrix<Real> z;
};

template <typename Real>
PauliMatrices<Real> pauli_matrices() {
  using C = std::complex<Real>;
  PauliMatrices<Real> p{Matrix<Real>(2, 2), Matrix<Real>(2, 2),
                        Matrix<Real>(2, 2)};
  p.x << C(0), C(1), C(1), C(0);
  p.y << C(0), C(0, -1), C(0, 1), C(0);
  p.z << C(1), C(0), C(0), C(-1);
  return p;
}

/// c_m = 1/2 sqrt((2J + 1 - m) m), the off-diagonal magnitudes of J_y.
template <typename Real>
Real ladder_coefficient(Index dim, Index m) {
  return Real(0.5) * std::sqrt(Real((dim - m) * m));
}

template <typename Real>
struct SpinOperators {
  Index dim = 0;
  Matrix<Real> jz;
  Matrix<Real> jy;
  std::optional<PauliMatrices<Real>> pauli;  // set iff dim == 2

  Real spin() const { return Real(dim - 1) / Real(2); }
};

template <typename Real = double>
SpinOperators<Real> make_spin_operators(Index dim) {
  if (dim < 2) {
    throw DimensionError("spin operators need dimension >= 2, got " +
                         std::to_string(dim));
  }
  using C = std::complex<Real>;
  SpinOperators<Real> ops;
  ops.dim = dim;
  const Real j = Real(dim - 1) / Real(2);
  ops.jz = Matrix<Real>::Zero(dim, dim);
  ops.jy = Matrix<Real>::Zero(dim, dim);
  for (Index n = 0; n < dim; ++n) ops.jz(n, n) = C(j - Real(n));
  for (Index k = 0; k + 1 < dim; ++k) {
    const Real c = ladder_coefficient<Real>(dim, k + 1);
    ops.jy(k, k + 1) = C(0, -c);
    ops.jy(k + 1, k) = C(0, c);
  }
  if (dim == 2) ops.pauli = pauli_matrices<Real>();
  return ops;
}

/// rho_n = e_n e_n^*.
template <typename Real = double>
DensityMatrix<Real> basis_projector(Index dim, Index n) {
  if (dim < 2) throw DimensionError("dimension must be >= 2");
  if (n < 0 || n >= dim) {
    throw IndexError("basis index " + std::to_string(n) +
                     " out of range for dimension " + std::to_string(dim));
  }
  Matrix<Real> m = Matrix<Real>::Zero(dim, dim);
  m(n, n) = 1;
  return DensityMatrix<Real>::unchecked(std::move(m));
}

template <typename Real = double>
DensityMatrix<Real> maximally_mixed(Index dim) {
  if (dim < 2) throw DimensionError("dimension must be >= 2");
  return DensityMatrix<Real>::unchecked(Matrix<Real>::Identity(dim, dim) /
                                        Real(dim));
}

/// rho = (1 + x sigma_x + y sigma_y + z sigma_z) / 2.
template <typename Real>
DensityMatrix<Real> bloch_to_density(const BlochVector<Real>& v) {
  if (v.norm_squared() > Real(1) + Real(kStateTolerance)) {
    throw OutOfBallError("Bloch vector outside the unit ball (|v|^2 = " +
                         std::to_string(double(v.norm_squared())) + ")");
  }
  using C = std::complex<Real>;
  Matrix<Real> m(2, 2);
  m << C(Real(0.5) * (1 + v.z)), C(Real(0.5) * v.x, Real(-0.5) * v.y),
      C(Real(0.5) * v.x, Real(0.5) * v.y), C(Real(0.5) * (1 - v.z));
  return DensityMatrix<Real>::unchecked(std::move(m));
}

/// (Tr(sigma_x rho), Tr(sigma_y rho), Tr(sigma_z rho)) for a 2x2 matrix.
template <typename Derived>
auto density_to_bloch(const Eigen::MatrixBase<Derived>& rho)
    -> BlochVector<typename Derived::RealScalar> {
  if (rho.rows() != 2 || rho.cols() != 2) {
    throw DimensionError("Bloch coordinates need a 2x2 state, got " +
                         std::to_string(rho.rows()) + "x" +
                         std::to_string(rho.cols()));
  }
  const auto off = rho(1, 0) + std::conj(rho(0, 1));  // x + i y
  return {off.real(), off.imag(), (rho(0, 0) - rho(1, 1)).real()};
}

template <typename Real>
BlochVector<Real> density_to_bloch(const DensityMatrix<Real>& rho) {
  return density_to_bloch(rho.matrix());
}

/// Random full-rank state from the Ginibre ensemble: G G^* / Tr(G G^*).
template <typename Real, typename Rng>
DensityMatrix<Real> random_state(Index dim, Rng& rng) {
  std::normal_distribution<Real> normal(0, 1);
  Matrix<Real> g(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) g(i, j) = {normal(rng), normal(rng)};
  Matrix<Real> m = g * g.adjoint();
  m /= m.trace().real();
  m = (m + m.adjoint()).eval() / Real(2);
  return DensityMatrix<Real>::unchecked(std::move(m));
}

/// Uniform sample from the ball of radius `max_radius`.
template <typename Real, typename Rng>
BlochVector<Real> random_bloch(Rng& rng, Real max_radius = 1) {
  std::uniform_real_distribution<Real> u(-1, 1);
  for (;;) {
    Vector3<Real> v(u(rng), u(rng), u(rng));
    if (v.squaredNorm() <= 1) return BlochVector<Real>::from(max_radius * v);
  }
}

}  // namespace spinfb
