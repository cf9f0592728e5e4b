#pragma once

// Drift and diffusion of the coupled actual/estimated filter equations
//
//   d rho     = (F_u(rho) + L(rho)) dt + G(rho) dW
//   d rho_hat = (F_u(rho_hat) + L(rho_hat)
//                + 2 sqrt(eta M) G(rho_hat) Tr(A (rho - rho_hat))) dt
//               + G(rho_hat) dW
//
// with F_u(rho) = -i[omega A + u B, rho], L(rho) = M/2 (2 A rho A - A^2 rho -
// rho A^2) and G(rho) = sqrt(eta M) (A rho + rho A - 2 Tr(A rho) rho).
// (A, B) is (sigma_z, sigma_y) in the Pauli convention and (J_z, J_y) in the
// angular-momentum convention. For sigma_z, L reduces to M (sigma_z rho
// sigma_z - rho). Both conventions are kept apart; nothing converts between
// them.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "spinfb/errors.hpp"
#include "spinfb/operators.hpp"

namespace spinfb {

enum class Convention {
  Pauli,            // sigma_z / sigma_y, spin-1/2 only
  AngularMomentum,  // J_z / J_y, any dimension
};

template <typename Real>
struct PhysicalParams {
  Real omega = Real(0.3);
  Real eta = Real(0.3);
  Real M = Real(1);

  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (!(omega >= 0)) out.push_back("params.omega must be >= 0");
    if (!(eta >= 0 && eta <= 1)) out.push_back("params.eta must lie in [0, 1]");
    if (!(M > 0)) out.push_back("params.M must be > 0");
    return out;
  }

  void validate() const {
    const auto v = violations();
    if (!v.empty()) throw InvalidParameterError(v.front());
  }

  Real measurement_rate() const { return std::sqrt(eta * M); }
  bool operator==(const PhysicalParams&) const = default;
};

/// Operators entering the SME for a given convention. The measurement
/// operator is diagonal in the computational basis in both conventions and is
/// stored as its diagonal.
template <typename Real>
struct SmeOperators {
  Convention convention = Convention::AngularMomentum;
  SpinOperators<Real> spin;
  RealVector<Real> measurement;  // diag(A)
  Matrix<Real> drive;            // B

  Index dim() const { return spin.dim; }

  Matrix<Real> measurement_matrix() const {
    return measurement.template cast<std::complex<Real>>().asDiagonal();
  }
};

template <typename Real = double>
SmeOperators<Real> make_sme_operators(Index dim, Convention convention) {
  SmeOperators<Real> ops;
  ops.convention = convention;
  ops.spin = make_spin_operators<Real>(dim);
  if (convention == Convention::Pauli) {
    if (dim != 2) {
      throw DimensionError("the Pauli convention is spin-1/2 only (dim 2), got " +
                           std::to_string(dim));
    }
    ops.measurement = ops.spin.pauli->z.diagonal().real();
    ops.drive = ops.spin.pauli->y;
  } else {
    ops.measurement = ops.spin.jz.diagonal().real();
    ops.drive = ops.spin.jy;
  }
  return ops;
}

template <typename Real>
struct CoupledState {
  DensityMatrix<Real> rho;
  DensityMatrix<Real> rho_hat;

  Index dim() const { return rho.dim(); }
  bool operator==(const CoupledState&) const = default;
};

namespace detail {

template <typename Derived, typename Real>
void require_dim(const Eigen::MatrixBase<Derived>& rho,
                 const SmeOperators<Real>& ops) {
  if (rho.rows() != ops.dim() || rho.cols() != ops.dim()) {
    throw DimensionError("state is " + std::to_string(rho.rows()) + "x" +
                         std::to_string(rho.cols()) +
                         " but the operators have dimension " +
                         std::to_string(ops.dim()));
  }
}

}  // namespace detail

/// Tr(A rho).
template <typename Derived>
auto measurement_expectation(
    const Eigen::MatrixBase<Derived>& rho,
    const SmeOperators<typename Derived::RealScalar>& ops) ->
    typename Derived::RealScalar {
  detail::require_dim(rho, ops);
  return (ops.measurement.array() * rho.diagonal().real().array()).sum();
}

/// F_u(rho) = -i[omega A + u B, rho].
template <typename Derived>
auto hamiltonian_term(const Eigen::MatrixBase<Derived>& rho,
                      typename Derived::RealScalar u,
                      const PhysicalParams<typename Derived::RealScalar>& p,
                      const SmeOperators<typename Derived::RealScalar>& ops)
    -> Matrix<typename Derived::RealScalar> {
  using Real = typename Derived::RealScalar;
  using C = std::complex<Real>;
  detail::require_dim(rho, ops);
  const Matrix<Real> r = rho;
  Matrix<Real> out = C(0, -u) * (ops.drive * r - r * ops.drive);
  const auto& a = ops.measurement;
  for (Index k = 0; k < r.cols(); ++k)
    for (Index j = 0; j < r.rows(); ++j)
      out(j, k) += C(0, -p.omega * (a(j) - a(k))) * r(j, k);
  return out;
}

/// L(rho) = M/2 (2 A rho A - A^2 rho - rho A^2); entrywise this is the
/// dephasing -M/2 (a_j - a_k)^2 rho_jk since A is diagonal.
template <typename Derived>
auto lindblad_term(const Eigen::MatrixBase<Derived>& rho,
                   const PhysicalParams<typename Derived::RealScalar>& p,
                   const SmeOperators<typename Derived::RealScalar>& ops)
    -> Matrix<typename Derived::RealScalar> {
  using Real = typename Derived::RealScalar;
  detail::require_dim(rho, ops);
  const auto& a = ops.measurement;
  Matrix<Real> out(rho.rows(), rho.cols());
  for (Index k = 0; k < rho.cols(); ++k)
    for (Index j = 0; j < rho.rows(); ++j) {
      const Real d = a(j) - a(k);
      out(j, k) = (Real(-0.5) * p.M * d * d) * rho(j, k);
    }
  return out;
}

/// G(rho) = sqrt(eta M) (A rho + rho A - 2 Tr(A rho) rho).
template <typename Derived>
auto diffusion_term(const Eigen::MatrixBase<Derived>& rho,
                    const PhysicalParams<typename Derived::RealScalar>& p,
                    const SmeOperators<typename Derived::RealScalar>& ops)
    -> Matrix<typename Derived::RealScalar> {
  using Real = typename Derived::RealScalar;
  detail::require_dim(rho, ops);
  const Real s = p.measurement_rate();
  const Real tr = measurement_expectation(rho, ops);
  const auto& a = ops.measurement;
  Matrix<Real> out(rho.rows(), rho.cols());
  for (Index k = 0; k < rho.cols(); ++k)
    for (Index j = 0; j < rho.rows(); ++j)
      out(j, k) = (s * (a(j) + a(k) - 2 * tr)) * rho(j, k);
  return out;
}

/// Drift and diffusion of a single filter equation, sharing intermediate
/// results. `expectation` is Tr(A rho).
template <typename Real>
struct SmeTerms {
  Matrix<Real> drift;      // F_u + L
  Matrix<Real> diffusion;  // G
  Real expectation{};
};

template <typename Derived>
auto sme_terms(const Eigen::MatrixBase<Derived>& rho,
               typename Derived::RealScalar u,
               const PhysicalParams<typename Derived::RealScalar>& p,
               const SmeOperators<typename Derived::RealScalar>& ops)
    -> SmeTerms<typename Derived::RealScalar> {
  using Real = typename Derived::RealScalar;
  using C = std::complex<Real>;
  detail::require_dim(rho, ops);
  const Matrix<Real> r = rho;
  const auto& a = ops.measurement;
  SmeTerms<Real> t;
  t.expectation = (a.array() * r.diagonal().real().array()).sum();
  t.drift = C(0, -u) * (ops.drive * r - r * ops.drive);
  t.diffusion.resize(r.rows(), r.cols());
  const Real s = p.measurement_rate();
  for (Index k = 0; k < r.cols(); ++k)
    for (Index j = 0; j < r.rows(); ++j) {
      const Real d = a(j) - a(k);
      t.drift(j, k) += C(Real(-0.5) * p.M * d * d, -p.omega * d) * r(j, k);
      t.diffusion(j, k) = (s * (a(j) + a(k) - 2 * t.expectation)) * r(j, k);
    }
  return t;
}

/// Drifts of (rho, rho_hat). The estimate carries the extra innovation term
/// 2 sqrt(eta M) G(rho_hat) Tr(A (rho - rho_hat)).
template <typename Real>
std::pair<Matrix<Real>, Matrix<Real>> coupled_drift(
    const CoupledState<Real>& s, Real u, const PhysicalParams<Real>& p,
    const SmeOperators<Real>& ops) {
  if (s.rho.dim() != s.rho_hat.dim()) {
    throw DimensionError("rho and rho_hat have different dimensions");
  }
  auto actual = sme_terms(s.rho.matrix(), u, p, ops);
  auto estimate = sme_terms(s.rho_hat.matrix(), u, p, ops);
  const Real gain =
      2 * p.measurement_rate() * (actual.expectation - estimate.expectation);
  estimate.drift += gain * estimate.diffusion;
  return {std::move(actual.drift), std::move(estimate.drift)};
}

/// dY = dW + 2 sqrt(eta M) Tr(A rho) dt, always evaluated on the actual state.
template <typename Derived>
auto observation_increment(
    const Eigen::MatrixBase<Derived>& rho, typename Derived::RealScalar dW,
    typename Derived::RealScalar dt,
    const PhysicalParams<typename Derived::RealScalar>& p,
    const SmeOperators<typename Derived::RealScalar>& ops) ->
    typename Derived::RealScalar {
  return dW + 2 * p.measurement_rate() * measurement_expectation(rho, ops) * dt;
}

/// Ito drift of S(rho) = 1 - Tr(rho^2) under the actual-state equation:
/// -2 Tr(rho (F + L)) - Tr(G^2).
template <typename Derived>
auto purity_ito_drift(const Eigen::MatrixBase<Derived>& rho,
                      typename Derived::RealScalar u,
                      const PhysicalParams<typename Derived::RealScalar>& p,
                      const SmeOperators<typename Derived::RealScalar>& ops) ->
    typename Derived::RealScalar {
  const auto t = sme_terms(rho, u, p, ops);
  const auto r = rho.derived().eval();
  return -2 * (r * t.drift).trace().real() -
         (t.diffusion * t.diffusion).trace().real();
}

// ---------------------------------------------------------------------------
// Bloch-sphere form (spin-1/2). These are the scalar SDEs for (x, y, z) and
// (x_hat, y_hat, z_hat); they coincide with the matrix SME in the
// angular-momentum convention at dim 2 (A = sigma_z / 2, B = sigma_y / 2).

template <typename Real>
struct BlochPair {
  Vector3<Real> actual;
  Vector3<Real> estimate;
};

template <typename Real>
BlochPair<Real> bloch_drift(const BlochVector<Real>& v,
                            const BlochVector<Real>& vh, Real u,
                            const PhysicalParams<Real>& p) {
  const Real w = p.omega;
  const Real m = p.M;
  const Real em = p.eta * p.M;
  const Real dz = vh.z - v.z;
  BlochPair<Real> out;
  out.actual << -w * v.y - m / 2 * v.x + u * v.z,  //
      w * v.x - m / 2 * v.y,                       //
      -u * v.x;
  out.estimate << -w * vh.y - m / 2 * vh.x + u * vh.z + em * vh.x * vh.z * dz,
      w * vh.x - m / 2 * vh.y + em * vh.y * vh.z * dz,
      -u * vh.x - em * (1 - vh.z * vh.z) * dz;
  return out;
}

template <typename Real>
BlochPair<Real> bloch_diffusion(const BlochVector<Real>& v,
                                const BlochVector<Real>& vh,
                                const PhysicalParams<Real>& p) {
  const Real s = p.measurement_rate();
  BlochPair<Real> out;
  out.actual << -s * v.x * v.z, -s * v.y * v.z, s * (1 - v.z * v.z);
  out.estimate << -s * vh.x * vh.z, -s * vh.y * vh.z, s * (1 - vh.z * vh.z);
  return out;
}

}  // namespace spinfb
