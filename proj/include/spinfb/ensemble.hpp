#pragma once

// Monte-Carlo ensembles of coupled trajectories and the statistical checks run
// on them. Trajectory i always uses seed base_seed + i, so results do not
// depend on scheduling.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spinfb/metrics.hpp"
#include "spinfb/sde.hpp"
#include "spinfb/sim_config.hpp"

namespace spinfb {

/// Sum with O(log n) error growth.
double pairwise_sum(std::span<const double> values);

/// Linear-interpolation quantile of already sorted data.
double sorted_quantile(std::span<const double> sorted, double q);

struct MetricStats {
  std::vector<double> mean;
  std::vector<double> var;  // unbiased
  std::vector<double> q05;
  std::vector<double> q50;
  std::vector<double> q95;
  std::vector<double> min;
  std::vector<double> max;

  double standard_error(std::size_t i, std::size_t n) const;
};

struct EnsembleStats {
  std::size_t n_traj = 0;      // requested
  std::size_t n_diverged = 0;  // excluded from every statistic
  std::vector<std::uint64_t> seeds;
  std::vector<std::uint64_t> diverged_seeds;
  std::vector<double> times;
  /// One (trajectories x times) matrix per channel in kMetricNames order.
  std::array<Eigen::MatrixXd, kMetricNames.size()> samples;
  std::array<MetricStats, kMetricNames.size()> stats;
  /// Nearest basis state of the terminal actual state, by fidelity.
  std::vector<Index> terminal_class;
  std::vector<double> terminal_class_fidelity;
  std::vector<CoupledState<double>> terminal_states;
  std::vector<Trajectory> trajectories;  // only with keep_trajectories

  std::size_t n_ok() const { return seeds.size(); }
  const MetricStats& metric(std::string_view name) const;
  const Eigen::MatrixXd& paths(std::string_view name) const;
};

struct EnsembleOptions {
  bool keep_trajectories = false;
  unsigned threads = 0;  // 0 = hardware concurrency
  double max_divergence_fraction = 0.1;
};

EnsembleStats run_ensemble(const SimConfig& config, std::size_t n_traj,
                           std::uint64_t base_seed,
                           const EnsembleOptions& options = {});

/// Recomputes per-time statistics from the sample matrices.
void aggregate(EnsembleStats& stats);

// ---------------------------------------------------------------------------

struct RateFit {
  double slope = 0;  // per unit time
  double intercept = 0;
  double t_begin = 0;
  double t_end = 0;
  double residual_rms = 0;
  std::size_t points = 0;
};

inline constexpr double kRateFloor = 1e-8;

/// Least-squares fit of log(series) against t over [t_begin, t_end], using
/// only points where series > floor. Throws InsufficientDataError with fewer
/// than 10 usable points.
RateFit fit_rate(std::span<const double> times, std::span<const double> series,
                 double t_begin, double t_end, double floor = kRateFloor);

/// Default window [0.2 T, 0.9 T].
RateFit fit_rate(std::span<const double> times, std::span<const double> series);

// ---------------------------------------------------------------------------

struct ZViolation {
  std::size_t index = 0;
  double t = 0;
  double value = 0;  // tested statistic
  double se = 0;
  double z = 0;
};

struct SubmartingaleReport {
  std::size_t n_traj = 0;
  double initial = 0;
  double worst_z = 0;  // min over grid of (mean - initial) / se
  std::vector<ZViolation> violations;
  bool passed() const { return violations.empty(); }
};

/// Checks E[F(t)] >= F(0) - sigmas * SE(t) at every grid point. Needs >= 100
/// paths (rows of `paths`).
SubmartingaleReport submartingale_test(const Eigen::MatrixXd& paths,
                                       std::span<const double> times,
                                       double sigmas = 3.0);

struct MonotonicityReport {
  double worst_z = 0;
  std::vector<ZViolation> violations;
  bool passed() const { return violations.empty(); }
};

/// Paired test that the ensemble mean does not decrease between consecutive
/// grid points by more than `sigmas` standard errors of the increment.
MonotonicityReport monotonicity_test(const Eigen::MatrixXd& paths,
                                     std::span<const double> times,
                                     double sigmas = 3.0);

struct QndReport {
  std::size_t n_traj = 0;
  std::size_t n_diverged = 0;
  double threshold = 0.99;
  double converged_fraction = 0;       // both fidelity criteria met
  std::vector<double> hit_frequency;   // per basis index
  std::vector<double> initial_population;
  std::vector<double> z_scores;        // binomial z of each frequency

  bool frequencies_within(double sigmas) const;
};

/// Needs the controller off and eta = 1.
QndReport qnd_convergence_test(const SimConfig& config, std::size_t n_traj,
                               std::uint64_t base_seed, double threshold = 0.99,
                               const EnsembleOptions& options = {});

/// Sample correlation of two equally long series.
double correlation(std::span<const double> a, std::span<const double> b);

}  // namespace spinfb
