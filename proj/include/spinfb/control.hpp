#pragma once

// Feedback laws. A law only ever sees the estimated state.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "spinfb/errors.hpp"
#include "spinfb/operators.hpp"

namespace spinfb {

struct Controller {
  enum class Kind { Off, Constant, Population, Expectation };

  Kind kind = Kind::Off;
  double c = 0.0;     // Constant
  Index target = 0;   // Population / Expectation
  double alpha = 1.0;
  double beta = 1.0;

  static Controller off() { return {}; }
  static Controller constant(double value) {
    Controller k;
    k.kind = Kind::Constant;
    k.c = value;
    return k;
  }
  /// alpha (1 - Tr(rho_hat rho_target))^beta
  static Controller population(Index target, double alpha, double beta) {
    return {Kind::Population, 0.0, target, alpha, beta};
  }
  /// alpha (J - target - Tr(J_z rho_hat))^beta
  static Controller expectation(Index target, double alpha, double beta) {
    return {Kind::Expectation, 0.0, target, alpha, beta};
  }

  bool has_target() const {
    return kind == Kind::Population || kind == Kind::Expectation;
  }

  std::vector<std::string> violations(Index dim) const {
    std::vector<std::string> out;
    if (!has_target()) return out;
    if (!(alpha > 0)) out.push_back("controller.alpha must be > 0");
    if (!(beta >= 1)) out.push_back("controller.beta must be >= 1");
    if (target < 0 || target >= dim) {
      out.push_back("controller.target must lie in [0, " +
                    std::to_string(dim - 1) + "]");
    }
    return out;
  }

  void validate(Index dim) const {
    const auto v = violations(dim);
    if (!v.empty()) throw InvalidParameterError(v.front());
  }

  bool operator==(const Controller&) const = default;
};

/// b^beta, extended as sign(b) |b|^beta for negative b when beta is not an
/// integer.
template <typename Real>
Real feedback_power(Real base, Real beta) {
  if (base >= 0 || std::floor(beta) == beta) return std::pow(base, beta);
  return -std::pow(-base, beta);
}

template <typename Derived>
auto evaluate(const Controller& ctrl, const Eigen::MatrixBase<Derived>& rho_hat,
              const SpinOperators<typename Derived::RealScalar>& ops) ->
    typename Derived::RealScalar {
  using Real = typename Derived::RealScalar;
  if (rho_hat.rows() != ops.dim || rho_hat.cols() != ops.dim) {
    throw DimensionError("controller: state dimension does not match operators");
  }
  if (ctrl.has_target() && (ctrl.target < 0 || ctrl.target >= ops.dim)) {
    throw IndexError("controller target " + std::to_string(ctrl.target) +
                     " out of range");
  }
  switch (ctrl.kind) {
    case Controller::Kind::Off:
      return Real(0);
    case Controller::Kind::Constant:
      return Real(ctrl.c);
    case Controller::Kind::Population: {
      const Real base = Real(1) - rho_hat(ctrl.target, ctrl.target).real();
      return Real(ctrl.alpha) * feedback_power(base, Real(ctrl.beta));
    }
    case Controller::Kind::Expectation: {
      const Real jz_mean =
          (ops.jz.diagonal().real().array() * rho_hat.diagonal().real().array())
              .sum();
      const Real base = ops.spin() - Real(ctrl.target) - jz_mean;
      return Real(ctrl.alpha) * feedback_power(base, Real(ctrl.beta));
    }
  }
  return Real(0);
}

}  // namespace spinfb
