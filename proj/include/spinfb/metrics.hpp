#pragma once

// Scalar diagnostics: fidelity, purity, Bures distance, Lyapunov candidates
// and the spin-1/2 closed forms used to cross-check the simulator.
//
// Fidelity is the squared Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma
// sqrt(rho)))^2; for two qubits it equals Tr(rho sigma) + 2 sqrt(det rho det
// sigma).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string_view>

#include "spinfb/errors.hpp"
#include "spinfb/operators.hpp"

namespace spinfb {

namespace detail {

template <typename Derived1, typename Derived2>
void require_same_dim(const Eigen::MatrixBase<Derived1>& a,
                      const Eigen::MatrixBase<Derived2>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw DimensionError("states must be square and of equal dimension");
  }
}

template <typename Real>
Matrix<Real> psd_sqrt(const Matrix<Real>& m) {
  Eigen::SelfAdjointEigenSolver<Matrix<Real>> es((m + m.adjoint()) / Real(2));
  const RealVector<Real> roots = es.eigenvalues().cwiseMax(Real(0)).cwiseSqrt();
  return es.eigenvectors() * roots.template cast<std::complex<Real>>().asDiagonal() *
         es.eigenvectors().adjoint();
}

}  // namespace detail

/// Squared Uhlmann fidelity. Eigenvalues of sqrt(rho) sigma sqrt(rho) down to
/// -kStateTolerance are treated as round-off and clamped; anything more
/// negative means an input was not a state.
template <typename Derived1, typename Derived2>
auto fidelity_general(const Eigen::MatrixBase<Derived1>& rho,
                      const Eigen::MatrixBase<Derived2>& sigma) ->
    typename Derived1::RealScalar {
  using Real = typename Derived1::RealScalar;
  detail::require_same_dim(rho, sigma);
  const Matrix<Real> s = detail::psd_sqrt<Real>(rho);
  const Matrix<Real> inner = s * sigma * s;
  Eigen::SelfAdjointEigenSolver<Matrix<Real>> es(
      (inner + inner.adjoint()) / Real(2), Eigen::EigenvaluesOnly);
  const auto& mu = es.eigenvalues();
  if (mu.minCoeff() < -Real(kStateTolerance)) {
    throw InvalidStateError("fidelity: sqrt(rho) sigma sqrt(rho) is not PSD");
  }
  const Real floor = Real(16) * Real(mu.size()) * std::numeric_limits<Real>::epsilon() *
                     mu.cwiseAbs().maxCoeff();
  const Real root = (mu.array() > floor).select(mu.array(), Real(0)).sqrt().sum();
  return root * root;
}

template <typename Real>
Real fidelity_general(const DensityMatrix<Real>& rho,
                      const DensityMatrix<Real>& sigma) {
  return fidelity_general(rho.matrix(), sigma.matrix());
}

/// Tr(rho sigma) + 2 sqrt(det(rho) det(sigma)) for 2x2 states.
template <typename Derived1, typename Derived2>
auto fidelity_qubit(const Eigen::MatrixBase<Derived1>& rho,
                    const Eigen::MatrixBase<Derived2>& sigma) ->
    typename Derived1::RealScalar {
  using Real = typename Derived1::RealScalar;
  detail::require_same_dim(rho, sigma);
  if (rho.rows() != 2) throw DimensionError("fidelity_qubit needs 2x2 states");
  const Real overlap = (rho * sigma).trace().real();
  const Real dets = rho.determinant().real() * sigma.determinant().real();
  return overlap + 2 * std::sqrt(std::max(dets, Real(0)));
}

/// 1/2 (1 + v.w + sqrt((1 - |v|^2)(1 - |w|^2))).
template <typename Real>
Real fidelity_bloch(const BlochVector<Real>& v, const BlochVector<Real>& w) {
  const Real mixed = std::max(Real(0), (1 - v.norm_squared())) *
                     std::max(Real(0), (1 - w.norm_squared()));
  return Real(0.5) * (1 + v.vec().dot(w.vec()) + std::sqrt(mixed));
}

/// S(rho) = 1 - Tr(rho^2).
template <typename Derived>
auto purity_deficit(const Eigen::MatrixBase<Derived>& rho) ->
    typename Derived::RealScalar {
  return 1 - rho.cwiseAbs2().sum();
}

template <typename Real>
Real purity_deficit(const DensityMatrix<Real>& rho) {
  return purity_deficit(rho.matrix());
}

/// d_B = sqrt(2 (1 - sqrt(F))).
template <typename Derived1, typename Derived2>
auto bures_distance(const Eigen::MatrixBase<Derived1>& rho,
                    const Eigen::MatrixBase<Derived2>& sigma) ->
    typename Derived1::RealScalar {
  using Real = typename Derived1::RealScalar;
  const Real f = std::clamp(fidelity_general(rho, sigma), Real(0), Real(1));
  return std::sqrt(2 * (1 - std::sqrt(f)));
}

/// Bures distance to the pure basis state rho_n: F(rho, rho_n) = rho_nn.
template <typename Derived>
auto bures_to_basis(const Eigen::MatrixBase<Derived>& rho, Index n) ->
    typename Derived::RealScalar {
  using Real = typename Derived::RealScalar;
  if (n < 0 || n >= rho.rows()) throw IndexError("target index out of range");
  const Real f = std::clamp(rho(n, n).real(), Real(0), Real(1));
  return std::sqrt(2 * (1 - std::sqrt(f)));
}

/// d_B(rho, rho_n) + d_B(rho_hat, rho_n).
template <typename Derived1, typename Derived2>
auto bures_coupled(const Eigen::MatrixBase<Derived1>& rho,
                   const Eigen::MatrixBase<Derived2>& rho_hat, Index target) ->
    typename Derived1::RealScalar {
  detail::require_same_dim(rho, rho_hat);
  return bures_to_basis(rho, target) + bures_to_basis(rho_hat, target);
}

/// V_0 = sqrt(1 - Tr(rho rho_n) Tr(rho_hat rho_n)).
template <typename Derived1, typename Derived2>
auto lyapunov_v0(const Eigen::MatrixBase<Derived1>& rho,
                 const Eigen::MatrixBase<Derived2>& rho_hat, Index target) ->
    typename Derived1::RealScalar {
  using Real = typename Derived1::RealScalar;
  detail::require_same_dim(rho, rho_hat);
  if (target < 0 || target >= rho.rows()) {
    throw IndexError("target index out of range");
  }
  const Real p = rho(target, target).real();
  const Real q = rho_hat(target, target).real();
  return std::sqrt(std::max(Real(0), 1 - p * q));
}

/// V_1 = sum_{k != n} (sqrt(Tr(rho rho_k)) + sqrt(Tr(rho_hat rho_k))).
template <typename Derived1, typename Derived2>
auto lyapunov_v1(const Eigen::MatrixBase<Derived1>& rho,
                 const Eigen::MatrixBase<Derived2>& rho_hat, Index target) ->
    typename Derived1::RealScalar {
  using Real = typename Derived1::RealScalar;
  detail::require_same_dim(rho, rho_hat);
  if (target < 0 || target >= rho.rows()) {
    throw IndexError("target index out of range");
  }
  Real sum = 0;
  for (Index k = 0; k < rho.rows(); ++k) {
    if (k == target) continue;
    sum += std::sqrt(std::max(Real(0), rho(k, k).real())) +
           std::sqrt(std::max(Real(0), rho_hat(k, k).real()));
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Spin-1/2 infinitesimal generator of F(rho, rho_hat) for the Bloch-form
// dynamics. v is the actual state, w the estimate. Defined on the interior
// only: Xi = sqrt((1 - |v|^2)(1 - |w|^2)) must exceed kInteriorGuard.

inline constexpr double kInteriorGuard = 1e-9;

namespace detail {

template <typename Real>
Real interior_xi(const BlochVector<Real>& v, const BlochVector<Real>& w) {
  const Real a = 1 - v.norm_squared();
  const Real b = 1 - w.norm_squared();
  const Real xi = (a > 0 && b > 0) ? std::sqrt(a * b) : Real(0);
  if (xi < Real(kInteriorGuard)) {
    throw SingularInputError(
        "fidelity generator is only defined for interior (mixed) states");
  }
  return xi;
}

}  // namespace detail

template <typename Real>
Real generator_fidelity_qubit(const BlochVector<Real>& v,
                              const BlochVector<Real>& w, Real eta, Real M) {
  const Real xi = detail::interior_xi(v, w);
  const Real z = v.z;
  const Real zh = w.z;
  const Real gap = 1 - v.vec().dot(w.vec()) - xi;
  const Real bracket = (1 - zh * zh) * (1 - v.norm_squared()) +
                       (1 - z * z) * (1 - w.norm_squared()) +
                       2 * zh * zh * gap * xi - 2 * (1 - z * zh) * xi;
  return M * (1 - eta) / (4 * xi) * bracket + M / 2 * (1 - zh * zh) * gap;
}

/// eta = 1 form: M (1 - z_hat^2) (1 - F).
template <typename Real>
Real generator_fidelity_qubit_eta1(const BlochVector<Real>& v,
                                   const BlochVector<Real>& w, Real M) {
  detail::interior_xi(v, w);
  return M * (1 - w.z * w.z) * (1 - fidelity_bloch(v, w));
}

/// eta = 0 form.
template <typename Real>
Real generator_fidelity_qubit_eta0(const BlochVector<Real>& v,
                                   const BlochVector<Real>& w, Real M) {
  const Real xi = detail::interior_xi(v, w);
  const Real z = v.z;
  const Real zh = w.z;
  const Real cross = (1 - zh * zh) * (1 - v.norm_squared()) +
                     (1 - z * z) * (1 - w.norm_squared());
  return M / 2 * (cross / (2 * xi) + z * zh - v.vec().dot(w.vec()) - xi);
}

template <typename Real>
Real generator_fidelity_qubit(const DensityMatrix<Real>& rho,
                              const DensityMatrix<Real>& rho_hat, Real eta,
                              Real M) {
  return generator_fidelity_qubit(density_to_bloch(rho),
                                  density_to_bloch(rho_hat), eta, M);
}

/// Drift of S(rho) for the spin-1/2 Bloch-form dynamics:
/// M ((1 - eta)(1 - z^2) / 2 - (1 - eta z^2) S).
template <typename Real>
Real purity_drift_closed_form(Real z, Real purity_deficit, Real eta, Real M) {
  return M * ((1 - eta) * (1 - z * z) / 2 - (1 - eta * z * z) * purity_deficit);
}

// ---------------------------------------------------------------------------
// Per-time metric record, with the fixed CSV channel names.

inline constexpr std::array<std::string_view, 9> kMetricNames = {
    "fidelity", "purity_rho", "purity_rhohat", "bures_coupled",   "v0",
    "v1",       "u",          "jz_expect_rho", "jz_expect_rhohat"};

inline std::optional<std::size_t> metric_index(std::string_view name) {
  for (std::size_t i = 0; i < kMetricNames.size(); ++i)
    if (kMetricNames[i] == name) return i;
  return std::nullopt;
}

struct MetricSample {
  double t = 0;
  double fidelity = 0;
  double purity_rho = 0;
  double purity_rhohat = 0;
  double bures_coupled = 0;
  double v0 = 0;
  double v1 = 0;
  double u = 0;
  double jz_expect_rho = 0;
  double jz_expect_rhohat = 0;

  /// Channel by position in kMetricNames.
  double operator[](std::size_t i) const {
    const std::array<double, 9> values = {
        fidelity, purity_rho, purity_rhohat,  bures_coupled,   v0,
        v1,       u,          jz_expect_rho,  jz_expect_rhohat};
    return values.at(i);
  }

  double value(std::string_view name) const {
    const auto i = metric_index(name);
    if (!i) throw InvalidParameterError("unknown metric '" + std::string(name) + "'");
    return (*this)[*i];
  }
};

/// `target` is the basis index used by the Bures and Lyapunov channels.
template <typename Real>
MetricSample sample_metrics(double t, const DensityMatrix<Real>& rho,
                            const DensityMatrix<Real>& rho_hat, double u,
                            const SpinOperators<Real>& ops, Index target) {
  const auto& r = rho.matrix();
  const auto& rh = rho_hat.matrix();
  const auto jz = ops.jz.diagonal().real();
  MetricSample s;
  s.t = t;
  s.fidelity = fidelity_general(r, rh);
  s.purity_rho = purity_deficit(r);
  s.purity_rhohat = purity_deficit(rh);
  s.bures_coupled = bures_coupled(r, rh, target);
  s.v0 = lyapunov_v0(r, rh, target);
  s.v1 = lyapunov_v1(r, rh, target);
  s.u = u;
  s.jz_expect_rho = (jz.array() * r.diagonal().real().array()).sum();
  s.jz_expect_rhohat = (jz.array() * rh.diagonal().real().array()).sum();
  return s;
}

}  // namespace spinfb
