#pragma once

// Fixed-step integration of the coupled filter equations. Both equations are
// driven by the same Wiener increment; the control is evaluated on the
// estimate at the start of each step.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "spinfb/dynamics.hpp"
#include "spinfb/metrics.hpp"
#include "spinfb/operators.hpp"
#include "spinfb/sim_config.hpp"

namespace spinfb {

struct WienerPath {
  std::uint64_t seed = 0;
  double dt = 0;
  std::vector<double> increments;  // i.i.d. N(0, dt)

  double duration() const { return dt * double(increments.size()); }
};

WienerPath generate_wiener(std::uint64_t seed, double dt, double T);

/// Sums consecutive blocks of `factor` increments: the same Brownian path
/// observed on a grid `factor` times coarser.
WienerPath coarsen(const WienerPath& path, std::size_t factor);

inline constexpr double kDivergenceThreshold = -0.1;

/// Hermitize, clip negative eigenvalues, renormalize the trace.
/// Throws DivergedError if an eigenvalue lies below `divergence_threshold`
/// before clipping (pass -infinity to disable), InvalidStateError if the input
/// is non-Hermitian beyond 1e-6.
DensityMatrix<double> project_to_physical(
    const Matrix<double>& m, double divergence_threshold = kDivergenceThreshold);

/// One integration step. Throws DivergedError (step index 0; simulate fills
/// in the real diagnostics).
CoupledState<double> step(const CoupledState<double>& s, double u, double dW,
                          const IntegratorConfig& cfg,
                          const PhysicalParams<double>& p,
                          const SmeOperators<double>& ops);

struct Trajectory {
  std::vector<double> times;
  std::vector<CoupledState<double>> states;
  std::vector<double> controls;
  std::vector<double> wiener;       // cumulative W_t
  std::vector<double> observation;  // cumulative Y_t
  std::vector<MetricSample> metrics;

  std::size_t size() const { return times.size(); }
};

/// Deterministic in `config` (noise drawn from config.seed).
Trajectory simulate(const SimConfig& config);

/// Runs on a supplied noise path; its dt must equal the integrator dt and it
/// must cover at least steps() increments.
Trajectory simulate(const SimConfig& config, const WienerPath& noise);

/// Euler-Maruyama on the Bloch-form SDEs (spin-1/2, angular-momentum
/// normalization). Vectors leaving the unit ball are scaled back onto it.
struct BlochTrajectory {
  std::vector<double> times;
  std::vector<BlochVector<double>> actual;
  std::vector<BlochVector<double>> estimate;
};

BlochTrajectory simulate_bloch(const SimConfig& config, const WienerPath& noise);

}  // namespace spinfb
