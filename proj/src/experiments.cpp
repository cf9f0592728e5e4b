#include "spinfb/experiments.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "spinfb/config.hpp"
#include "spinfb/io.hpp"

namespace spinfb {

void apply_overrides(SimConfig& config, const Overrides& o) {
  if (o.seed) config.seed = *o.seed;
  if (o.dt) config.integrator.dt = *o.dt;
  if (o.T) config.integrator.T = *o.T;
  const std::size_t steps = config.integrator.steps();
  auto& stride = config.integrator.record_stride;
  if (steps > 0 && stride > 0 && steps % stride != 0) stride = std::gcd(steps, stride);
}

Trajectory cmd_simulate(const SimConfig& config, const std::filesystem::path& out_dir) {
  auto traj = simulate(config);
  auto out = open_output(out_dir / "trajectory.csv");
  write_trajectory_csv(out, traj, config.output.metrics);
  return traj;
}

namespace {

std::string seed_list(const std::vector<std::uint64_t>& seeds) {
  std::string s;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(seeds[i]);
  }
  return s.empty() ? "none" : s;
}

}  // namespace

EnsembleReport cmd_ensemble(const SimConfig& config, std::size_t n_traj,
                            std::uint64_t base_seed, const std::filesystem::path& out_dir,
                            const EnsembleOptions& options) {
  EnsembleReport rep;
  rep.stats = run_ensemble(config, n_traj, base_seed, options);
  const auto& e = rep.stats;
  {
    auto csv = open_output(out_dir / "ensemble.csv");
    write_ensemble_csv(csv, e, config.output.metrics);
  }

  std::ostringstream t;
  t << "trajectories requested: " << e.n_traj << "\n"
    << "trajectories diverged: " << e.n_diverged << "\n"
    << "diverged seeds: " << seed_list(e.diverged_seeds) << "\n"
    << "base seed: " << base_seed << "\n";
  const auto& f = e.metric("fidelity");
  const std::size_t last = e.times.size() - 1;
  t << "terminal time: " << format_real(e.times[last]) << "\n"
    << "terminal mean fidelity: " << format_real(f.mean[last]) << " +- "
    << format_real(f.standard_error(last, e.n_ok())) << " (1 SE)\n";

  const auto& paths = e.paths("fidelity");
  if (e.n_ok() >= 100) {
    rep.submartingale = submartingale_test(paths, e.times);
    rep.monotonicity = monotonicity_test(paths, e.times);
    t << "submartingale test (3 sigma): "
      << (rep.submartingale->passed() ? "PASS" : "FAIL") << ", violations "
      << rep.submartingale->violations.size() << ", worst z "
      << format_real(rep.submartingale->worst_z) << "\n"
      << "monotone mean fidelity (3 sigma): "
      << (rep.monotonicity->passed() ? "PASS" : "FAIL") << ", violations "
      << rep.monotonicity->violations.size() << ", worst z "
      << format_real(rep.monotonicity->worst_z) << "\n";
  } else {
    t << "submartingale test: skipped (needs at least 100 trajectories)\n";
  }

  for (const char* name : {"v0", "v1", "bures_coupled"}) {
    try {
      auto fit = fit_rate(e.times, e.metric(name).mean);
      t << "rate fit of mean " << name << " on [" << format_real(fit.t_begin) << ", "
        << format_real(fit.t_end) << "]: slope " << format_real(fit.slope)
        << ", residual rms " << format_real(fit.residual_rms) << "\n";
      rep.rates.emplace_back(name, fit);
    } catch (const InsufficientDataError& err) {
      t << "rate fit of mean " << name << ": " << err.what() << "\n";
    }
  }

  std::vector<std::size_t> counts(std::size_t(config.dim), 0);
  for (auto c : e.terminal_class) ++counts[std::size_t(c)];
  t << "terminal nearest basis state counts:";
  for (std::size_t n = 0; n < counts.size(); ++n) t << " " << n << ":" << counts[n];
  t << "\n";

  rep.text = t.str();
  auto out = open_output(out_dir / "report.txt");
  out << rep.text;
  if (!out) throw IoError("cannot write report");
  return rep;
}

std::optional<Figure> parse_figure(std::string_view name) {
  if (name == "fig1") return Figure::Fig1;
  if (name == "fig2") return Figure::Fig2;
  if (name == "fig3") return Figure::Fig3;
  if (name == "fig4") return Figure::Fig4;
  return std::nullopt;
}

std::string figure_name(Figure f) {
  return "fig" + std::to_string(int(f) + 1);
}

SimConfig figure_config(Figure f) {
  SimConfig c;
  c.params = {0.3, 0.3, 1.0};
  c.integrator.dt = 1e-3;
  c.integrator.record_stride = 10;
  switch (f) {
    case Figure::Fig1:
    case Figure::Fig2:
      c.model = ModelKind::SpinHalf;
      c.dim = 2;
      c.controller = Controller::constant(1.0);
      c.initial_rho = StateSpec::basis(1);
      c.initial_rho_hat = StateSpec::basis(0);
      c.integrator.T = 30;
      break;
    case Figure::Fig3:
      c.model = ModelKind::SpinJ;
      c.dim = 3;
      c.controller = Controller::population(0, 5, 2);
      c.initial_rho = StateSpec::basis(2);
      c.initial_rho_hat = StateSpec::basis(1);
      c.integrator.T = 20;
      break;
    case Figure::Fig4:
      c.model = ModelKind::SpinJ;
      c.dim = 3;
      c.controller = Controller::expectation(1, 2, 2);
      c.initial_rho = StateSpec::diagonal({0.2, 0.2, 0.6});
      c.initial_rho_hat = StateSpec::diagonal({0.8, 0.1, 0.1});
      c.integrator.T = 20;
      break;
  }
  return c;
}

namespace {

std::vector<Trajectory> figure_samples(const SimConfig& base, std::size_t n,
                                       ReproduceResult& result) {
  std::vector<Trajectory> out;
  SimConfig c = base;
  for (std::uint64_t seed = base.seed; out.size() < n; ++seed) {
    if (result.skipped_seeds.size() > 10 * n) {
      throw EnsembleError("too many diverged samples while reproducing a figure");
    }
    c.seed = seed;
    try {
      out.push_back(simulate(c));
      result.seeds.push_back(seed);
    } catch (const DivergedError&) {
      result.skipped_seeds.push_back(seed);
    }
  }
  return out;
}

std::string slope_label(double s) { return "ref_exp_" + format_real(s); }

}  // namespace

ReproduceResult cmd_reproduce(Figure f, const std::filesystem::path& out_dir,
                              const Overrides& overrides) {
  SimConfig config = figure_config(f);
  config.seed = kFigureBaseSeed;
  apply_overrides(config, overrides);
  config.validate();

  ReproduceResult result;
  const std::string name = figure_name(f);
  result.csv = out_dir / (name + ".csv");
  result.meta = out_dir / (name + "_meta.txt");

  const double eta_m = config.params.eta * config.params.M;
  std::vector<std::vector<double>> columns;

  if (f == Figure::Fig2) {
    auto traj = figure_samples(config, 1, result).front();
    result.columns = {"t", "x", "y", "z", "x_hat", "y_hat", "z_hat"};
    columns.resize(result.columns.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const auto v = density_to_bloch(traj.states[i].rho);
      const auto w = density_to_bloch(traj.states[i].rho_hat);
      const double row[] = {traj.times[i], v.x, v.y, v.z, w.x, w.y, w.z};
      for (std::size_t k = 0; k < 7; ++k) columns[k].push_back(row[k]);
    }
  } else {
    const auto samples = figure_samples(config, kFigureSamples, result);
    const char* metric = f == Figure::Fig1 ? "fidelity" : f == Figure::Fig3 ? "v0" : "v1";
    const std::string prefix = f == Figure::Fig1 ? "sample" : metric;
    const std::size_t channel = *metric_index(metric);
    const std::size_t bures = *metric_index("bures_coupled");
    const std::size_t rows = samples.front().size();

    result.columns.push_back("t");
    columns.push_back(samples.front().times);
    std::vector<double> mean(rows, 0.0), bures_mean(rows, 0.0);
    for (std::size_t s = 0; s < samples.size(); ++s) {
      result.columns.push_back(prefix + "_" + std::to_string(s + 1));
      std::vector<double> col(rows);
      for (std::size_t i = 0; i < rows; ++i) {
        col[i] = samples[s].metrics[i][channel];
        mean[i] += col[i] / double(samples.size());
        bures_mean[i] += samples[s].metrics[i][bures] / double(samples.size());
      }
      columns.push_back(std::move(col));
    }
    result.columns.push_back(f == Figure::Fig1 ? "mean" : prefix + "_mean");
    columns.push_back(mean);
    if (f != Figure::Fig1) {
      result.columns.push_back("bures_mean");
      columns.push_back(bures_mean);
      std::vector<double> slopes{-eta_m / 2};
      if (f == Figure::Fig3) slopes.push_back(-eta_m);
      for (double s : slopes) {
        result.columns.push_back(slope_label(s));
        std::vector<double> ref(rows);
        for (std::size_t i = 0; i < rows; ++i) ref[i] = std::exp(s * columns[0][i]);
        columns.push_back(std::move(ref));
      }
    }
  }

  {
    auto out = open_output(result.csv);
    CsvWriter csv(out, result.columns);
    std::vector<double> row(columns.size());
    for (std::size_t i = 0; i < columns[0].size(); ++i) {
      for (std::size_t k = 0; k < columns.size(); ++k) row[k] = columns[k][i];
      csv.row(row);
    }
  }
  auto meta = open_output(result.meta);
  meta << "# " << name << "\n"
       << "# seeds: " << seed_list(result.seeds) << "\n"
       << "# diverged seeds skipped: " << seed_list(result.skipped_seeds) << "\n"
       << serialize_config(config);
  if (!meta) throw IoError("cannot write '" + result.meta.string() + "'");
  return result;
}

}  // namespace spinfb
