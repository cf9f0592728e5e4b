#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spinfb/control.hpp"
#include "spinfb/dynamics.hpp"
#include "spinfb/operators.hpp"

namespace spinfb {

enum class Projection { None, Clip };

enum class Scheme {
  EulerMaruyama,
  /// rho' ∝ K rho K^* + (1 - eta) M A rho A dt with
  /// K = 1 + (-i H - M/2 A^2) dt + sqrt(eta M) A dY. Positive by construction
  /// and keeps pure states pure when eta = 1.
  Kraus,
};

struct IntegratorConfig {
  double dt = 1e-3;
  double T = 30.0;
  Projection projection = Projection::Clip;
  Scheme scheme = Scheme::EulerMaruyama;
  std::size_t record_stride = 10;

  /// ceil(T / dt), ignoring round-off in the ratio.
  std::size_t steps() const;
  std::vector<std::string> violations() const;
  bool operator==(const IntegratorConfig&) const = default;
};

/// How an initial state is written in a configuration.
struct StateSpec {
  enum class Kind { Basis, Diag, Bloch, MaximallyMixed };

  Kind kind = Kind::MaximallyMixed;
  Index index = 0;
  std::vector<double> diag;
  std::array<double, 3> bloch{};

  static StateSpec basis(Index n) { return {Kind::Basis, n, {}, {}}; }
  static StateSpec diagonal(std::vector<double> d) {
    return {Kind::Diag, 0, std::move(d), {}};
  }
  static StateSpec bloch_vector(double x, double y, double z) {
    return {Kind::Bloch, 0, {}, {x, y, z}};
  }
  static StateSpec mixed() { return {}; }

  /// Throws InvalidStateError / DimensionError if it is not a state of `dim`.
  DensityMatrix<double> build(Index dim) const;
  bool operator==(const StateSpec&) const = default;
};

enum class ModelKind {
  SpinHalf,  // Pauli convention, dim 2
  SpinJ,     // angular-momentum convention, any dim >= 2
};

struct OutputConfig {
  std::vector<std::string> metrics;  // empty = all channels
  std::string dir = ".";
  bool operator==(const OutputConfig&) const = default;
};

struct SimConfig {
  ModelKind model = ModelKind::SpinHalf;
  Index dim = 2;
  PhysicalParams<double> params;
  Controller controller = Controller::constant(1.0);
  StateSpec initial_rho = StateSpec::basis(1);
  StateSpec initial_rho_hat = StateSpec::basis(0);
  IntegratorConfig integrator;
  std::uint64_t seed = 1;
  /// Basis index for the Bures / Lyapunov channels; defaults to the
  /// controller target, else 0.
  std::optional<Index> metric_target;
  OutputConfig output;

  Convention convention() const {
    return model == ModelKind::SpinHalf ? Convention::Pauli
                                        : Convention::AngularMomentum;
  }
  Index resolved_metric_target() const;

  /// Every violated invariant; empty when the configuration is runnable.
  std::vector<std::string> violations() const;
  void validate() const;
  bool operator==(const SimConfig&) const = default;
};

}  // namespace spinfb
