#include "spinfb/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

namespace spinfb {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InsufficientDataError("quantile of empty data");
  const double pos = q * double(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - double(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double MetricStats::standard_error(std::size_t i, std::size_t n) const {
  return n > 0 ? std::sqrt(var.at(i) / double(n)) : 0.0;
}

const MetricStats& EnsembleStats::metric(std::string_view name) const {
  const auto i = metric_index(name);
  if (!i) throw InvalidParameterError("unknown metric '" + std::string(name) + "'");
  return stats[*i];
}

const Eigen::MatrixXd& EnsembleStats::paths(std::string_view name) const {
  const auto i = metric_index(name);
  if (!i) throw InvalidParameterError("unknown metric '" + std::string(name) + "'");
  return samples[*i];
}

void aggregate(EnsembleStats& e) {
  const std::size_t n = e.n_ok();
  const std::size_t nt = e.times.size();
  std::vector<double> column(n);
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    MetricStats& st = e.stats[m];
    st = MetricStats{};
    for (auto* v : {&st.mean, &st.var, &st.q05, &st.q50, &st.q95, &st.min, &st.max})
      v->assign(nt, 0.0);
    if (n == 0) continue;
    const Eigen::MatrixXd& s = e.samples[m];
    for (std::size_t t = 0; t < nt; ++t) {
      for (std::size_t i = 0; i < n; ++i) column[i] = s(Index(i), Index(t));
      const double mean = pairwise_sum(column) / double(n);
      double ss = 0;
      for (double x : column) ss += (x - mean) * (x - mean);
      std::sort(column.begin(), column.end());
      st.mean[t] = mean;
      st.var[t] = n > 1 ? ss / double(n - 1) : 0.0;
      st.min[t] = column.front();
      st.max[t] = column.back();
      st.q05[t] = sorted_quantile(column, 0.05);
      st.q50[t] = sorted_quantile(column, 0.50);
      st.q95[t] = sorted_quantile(column, 0.95);
    }
  }
}

namespace {

// Per-trajectory data kept until aggregation; full trajectories only on
// request.
struct Outcome {
  bool ok = false;
  bool diverged = false;
  std::vector<double> times;
  std::vector<MetricSample> metrics;
  CoupledState<double> terminal;
  std::optional<Trajectory> kept;
};

std::vector<Outcome> run_all(const SimConfig& config, std::size_t n_traj,
                             std::uint64_t base_seed, unsigned threads,
                             bool keep) {
  std::vector<Outcome> outcomes(n_traj);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_traj) return;
      SimConfig c = config;
      c.seed = base_seed + i;
      try {
        Trajectory tr = simulate(c);
        Outcome& out = outcomes[i];
        out.ok = true;
        out.times = tr.times;
        out.metrics = tr.metrics;
        out.terminal = tr.states.back();
        if (keep) out.kept = std::move(tr);
      } catch (const DivergedError&) {
        outcomes[i].diverged = true;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n_traj;
        return;
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = unsigned(std::min<std::size_t>(threads, n_traj));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return outcomes;
}

}  // namespace

EnsembleStats run_ensemble(const SimConfig& config, std::size_t n_traj,
                           std::uint64_t base_seed,
                           const EnsembleOptions& options) {
  if (n_traj < 1) throw InvalidParameterError("n_traj must be >= 1");
  config.validate();
  auto outcomes =
      run_all(config, n_traj, base_seed, options.threads, options.keep_trajectories);

  EnsembleStats e;
  e.n_traj = n_traj;
  for (std::size_t i = 0; i < n_traj; ++i) {
    if (outcomes[i].diverged) {
      ++e.n_diverged;
      e.diverged_seeds.push_back(base_seed + i);
    } else {
      e.seeds.push_back(base_seed + i);
    }
  }
  if (double(e.n_diverged) > options.max_divergence_fraction * double(n_traj)) {
    throw EnsembleError(std::to_string(e.n_diverged) + " of " +
                        std::to_string(n_traj) + " trajectories diverged");
  }

  const std::size_t n_ok = e.n_ok();
  const Index dim = config.dim;
  for (std::size_t i = 0, row = 0; i < n_traj; ++i) {
    Outcome& out = outcomes[i];
    if (!out.ok) continue;
    if (row == 0) {
      e.times = out.times;
      for (auto& m : e.samples) m.resize(Index(n_ok), Index(out.times.size()));
    }
    for (std::size_t t = 0; t < out.metrics.size(); ++t)
      for (std::size_t m = 0; m < kMetricNames.size(); ++m)
        e.samples[m](Index(row), Index(t)) = out.metrics[t][m];

    const auto& final_state = out.terminal;
    Index best = 0;
    double best_f = -1;
    for (Index n = 0; n < dim; ++n) {
      const double f = final_state.rho.matrix()(n, n).real();
      if (f > best_f) {
        best_f = f;
        best = n;
      }
    }
    e.terminal_class.push_back(best);
    e.terminal_class_fidelity.push_back(best_f);
    e.terminal_states.push_back(final_state);
    if (out.kept) e.trajectories.push_back(std::move(*out.kept));
    out = Outcome{};
    ++row;
  }
  aggregate(e);
  return e;
}

RateFit fit_rate(std::span<const double> times, std::span<const double> series,
                 double t_begin, double t_end, double floor) {
  if (times.size() != series.size()) {
    throw InvalidParameterError("fit_rate: times and series differ in length");
  }
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_begin || times[i] > t_end) continue;
    if (!(series[i] > floor)) continue;
    ts.push_back(times[i]);
    ys.push_back(std::log(series[i]));
  }
  if (ts.size() < 10) {
    throw InsufficientDataError("fit_rate: only " + std::to_string(ts.size()) +
                                " usable points in the window");
  }
  const double n = double(ts.size());
  const double t_mean = pairwise_sum(ts) / n;
  const double y_mean = pairwise_sum(ys) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sxx += (ts[i] - t_mean) * (ts[i] - t_mean);
    sxy += (ts[i] - t_mean) * (ys[i] - y_mean);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = y_mean - fit.slope * t_mean;
  fit.t_begin = t_begin;
  fit.t_end = t_end;
  fit.points = ts.size();
  double rss = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * ts[i]);
    rss += r * r;
  }
  fit.residual_rms = std::sqrt(rss / n);
  return fit;
}

RateFit fit_rate(std::span<const double> times, std::span<const double> series) {
  if (times.empty()) throw InsufficientDataError("fit_rate: empty series");
  const double T = times.back();
  return fit_rate(times, series, 0.2 * T, 0.9 * T);
}

SubmartingaleReport submartingale_test(const Eigen::MatrixXd& paths,
                                       std::span<const double> times,
                                       double sigmas) {
  if (paths.rows() < 100) {
    throw InsufficientDataError("submartingale_test needs at least 100 paths");
  }
  if (std::size_t(paths.cols()) != times.size()) {
    throw InvalidParameterError("submartingale_test: grid size mismatch");
  }
  const double n = double(paths.rows());
  SubmartingaleReport rep;
  rep.n_traj = std::size_t(paths.rows());
  rep.initial = paths.col(0).mean();
  rep.worst_z = std::numeric_limits<double>::infinity();
  for (Index t = 0; t < paths.cols(); ++t) {
    const auto col = paths.col(t);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / (n - 1);
    const double se = std::sqrt(var / n);
    const double diff = mean - rep.initial;
    double z;
    if (se > 0) {
      z = diff / se;
    } else {
      z = diff < -1e-12 ? -std::numeric_limits<double>::infinity()
                        : std::numeric_limits<double>::infinity();
    }
    rep.worst_z = std::min(rep.worst_z, z);
    if (diff < -sigmas * se - 1e-12) {
      rep.violations.push_back({std::size_t(t), times[std::size_t(t)], mean, se, z});
    }
  }
  return rep;
}

MonotonicityReport monotonicity_test(const Eigen::MatrixXd& paths,
                                     std::span<const double> times,
                                     double sigmas) {
  if (paths.rows() < 2) throw InsufficientDataError("monotonicity_test needs >= 2 paths");
  if (std::size_t(paths.cols()) != times.size()) {
    throw InvalidParameterError("monotonicity_test: grid size mismatch");
  }
  const double n = double(paths.rows());
  MonotonicityReport rep;
  rep.worst_z = std::numeric_limits<double>::infinity();
  for (Index t = 1; t < paths.cols(); ++t) {
    const Eigen::VectorXd inc = paths.col(t) - paths.col(t - 1);
    const double mean = inc.mean();
    const double var = (inc.array() - mean).square().sum() / (n - 1);
    const double se = std::sqrt(var / n);
    const double z = se > 0 ? mean / se
                            : (mean < -1e-12 ? -std::numeric_limits<double>::infinity()
                                             : std::numeric_limits<double>::infinity());
    rep.worst_z = std::min(rep.worst_z, z);
    if (mean < -sigmas * se - 1e-12) {
      rep.violations.push_back({std::size_t(t), times[std::size_t(t)], mean, se, z});
    }
  }
  return rep;
}

bool QndReport::frequencies_within(double sigmas) const {
  return std::all_of(z_scores.begin(), z_scores.end(),
                     [sigmas](double z) { return std::abs(z) <= sigmas; });
}

QndReport qnd_convergence_test(const SimConfig& config, std::size_t n_traj,
                               std::uint64_t base_seed, double threshold,
                               const EnsembleOptions& options) {
  if (config.controller.kind != Controller::Kind::Off) {
    throw InvalidParameterError("qnd_convergence_test needs the controller off");
  }
  if (config.params.eta != 1.0) {
    throw InvalidParameterError("qnd_convergence_test needs eta = 1");
  }
  const EnsembleStats e = run_ensemble(config, n_traj, base_seed, options);
  const Index dim = config.dim;
  const auto rho0 = config.initial_rho.build(dim);

  QndReport rep;
  rep.n_traj = e.n_ok();
  rep.n_diverged = e.n_diverged;
  rep.threshold = threshold;
  rep.hit_frequency.assign(std::size_t(dim), 0.0);
  const auto& fidelity = e.paths("fidelity");
  std::size_t converged = 0;
  for (std::size_t i = 0; i < e.n_ok(); ++i) {
    rep.hit_frequency[std::size_t(e.terminal_class[i])] += 1.0;
    const double pair_f = fidelity(Index(i), fidelity.cols() - 1);
    if (e.terminal_class_fidelity[i] >= threshold && pair_f >= threshold) ++converged;
  }
  const double n = double(e.n_ok());
  rep.converged_fraction = n > 0 ? double(converged) / n : 0.0;
  for (Index k = 0; k < dim; ++k) {
    const double p = rho0.matrix()(k, k).real();
    double& freq = rep.hit_frequency[std::size_t(k)];
    freq /= n;
    rep.initial_population.push_back(p);
    const double sd = std::sqrt(p * (1 - p) / n);
    rep.z_scores.push_back(sd > 0 ? (freq - p) / sd
                                  : (std::abs(freq - p) < 1e-12 ? 0.0 : 1e9));
  }
  return rep;
}

double correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw InvalidParameterError("correlation needs two equal series of length >= 2");
  }
  const double n = double(a.size());
  const double ma = pairwise_sum(a) / n;
  const double mb = pairwise_sum(b) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace spinfb
