#include "spinfb/sim_config.hpp"

#include <cmath>

#include "spinfb/metrics.hpp"

namespace spinfb {

std::size_t IntegratorConfig::steps() const {
  if (!(dt > 0) || !(T > 0)) return 0;
  return static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
}

std::vector<std::string> IntegratorConfig::violations() const {
  std::vector<std::string> out;
  if (!(dt > 0) || !std::isfinite(dt)) out.push_back("integrator.dt must be > 0");
  if (!(T > 0) || !std::isfinite(T)) out.push_back("integrator.T must be > 0");
  if (dt > 0 && T > 0 && dt > T) out.push_back("integrator.dt must not exceed integrator.T");
  if (record_stride < 1) {
    out.push_back("integrator.record_stride must be >= 1");
  } else if (out.empty() && steps() % record_stride != 0) {
    out.push_back("integrator.record_stride (" + std::to_string(record_stride) +
                  ") must divide the step count (" + std::to_string(steps()) + ")");
  }
  return out;
}

DensityMatrix<double> StateSpec::build(Index dim) const {
  switch (kind) {
    case Kind::Basis:
      return basis_projector<double>(dim, index);
    case Kind::Diag: {
      if (Index(diag.size()) != dim) {
        throw DimensionError("diag list has " + std::to_string(diag.size()) +
                             " entries but the model dimension is " +
                             std::to_string(dim));
      }
      Matrix<double> m = Matrix<double>::Zero(dim, dim);
      for (Index i = 0; i < dim; ++i) m(i, i) = diag[std::size_t(i)];
      return DensityMatrix<double>::checked(std::move(m));
    }
    case Kind::Bloch:
      if (dim != 2) throw DimensionError("Bloch initial states need dimension 2");
      return bloch_to_density(BlochVector<double>{bloch[0], bloch[1], bloch[2]});
    case Kind::MaximallyMixed:
      return maximally_mixed<double>(dim);
  }
  throw InvalidStateError("unknown state spec");
}

Index SimConfig::resolved_metric_target() const {
  if (metric_target) return *metric_target;
  if (controller.has_target()) return controller.target;
  return 0;
}

std::vector<std::string> SimConfig::violations() const {
  std::vector<std::string> out;
  const auto append = [&out](const std::vector<std::string>& v) {
    out.insert(out.end(), v.begin(), v.end());
  };
  bool dim_ok = true;
  if (dim < 2) {
    out.push_back("model.dim must be >= 2");
    dim_ok = false;
  } else if (model == ModelKind::SpinHalf && dim != 2) {
    out.push_back("model.dim must be 2 for spin_half");
    dim_ok = false;
  }
  append(params.violations());
  append(integrator.violations());
  if (dim_ok) {
    append(controller.violations(dim));
    const auto check_state = [&](const StateSpec& spec, const char* key) {
      try {
        (void)spec.build(dim);
      } catch (const Error& e) {
        out.push_back(std::string(key) + ": " + e.what());
      }
    };
    check_state(initial_rho, "initial.rho");
    check_state(initial_rho_hat, "initial.rho_hat");
    if (metric_target && (*metric_target < 0 || *metric_target >= dim)) {
      out.push_back("metrics.target must lie in [0, " + std::to_string(dim - 1) + "]");
    }
  }
  for (const auto& name : output.metrics) {
    if (!metric_index(name)) out.push_back("output.metrics: unknown metric '" + name + "'");
  }
  return out;
}

void SimConfig::validate() const {
  auto v = violations();
  if (!v.empty()) throw ConfigError(std::move(v));
}

}  // namespace spinfb
