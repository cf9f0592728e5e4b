// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "spinfb/config.hpp"
#include "spinfb/ensemble.hpp"
#include "spinfb/experiments.hpp"
#include "spinfb/sde.hpp"

using namespace spinfb;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x, int digits = 4) {
  std::ostringstream s;
  s << std::setprecision(digits) << x;
  return s.str();
}

EnsembleOptions quiet() {
  EnsembleOptions o;
  o.max_divergence_fraction = 0.1;
  return o;
}

SimConfig fidelity_setting() {
  auto c = figure_config(Figure::Fig1);
  c.integrator.record_stride = 100;  // grid spacing 0.1
  return c;
}

// One-step estimate of the Ito drift of f at a state pair. Antithetic pairs
// remove the dW term; (dW^2 - h) / h, whose mean is zero, serves as a control
// variate for the quadratic-variation term.
struct DriftEstimate {
  double mean = 0;
  double se = 0;
};

template <class F>
DriftEstimate one_step_drift(const CoupledState<double>& s, double u, double h,
                             std::size_t replicas, std::mt19937_64& rng,
                             const PhysicalParams<double>& p,
                             const SmeOperators<double>& ops, F&& f) {
  IntegratorConfig cfg;
  cfg.dt = h;
  cfg.T = h;
  cfg.record_stride = 1;
  cfg.projection = Projection::None;
  std::normal_distribution<double> normal(0.0, std::sqrt(h));
  const double f0 = f(s);
  const auto pairs = Index(replicas / 2);
  Eigen::VectorXd x(pairs), c(pairs);
  for (Index i = 0; i < pairs; ++i) {
    const double dw = normal(rng);
    const double a = (f(step(s, u, dw, cfg, p, ops)) - f0) / h;
    const double b = (f(step(s, u, -dw, cfg, p, ops)) - f0) / h;
    x(i) = (a + b) / 2;
    c(i) = (dw * dw - h) / h;
  }
  const double n = double(pairs);
  const Eigen::VectorXd xc = x.array() - x.mean();
  const Eigen::VectorXd cc = c.array() - c.mean();
  const double beta = xc.dot(cc) / cc.squaredNorm();
  const Eigen::VectorXd adjusted = x - beta * c;
  const double mean = adjusted.mean();
  const double var = (adjusted.array() - mean).square().sum() / (n - 2);
  return {mean, std::sqrt(var / n)};
}

// ---------------------------------------------------------------------------

EnsembleStats& fidelity_ensemble() {
  static EnsembleStats e = run_ensemble(fidelity_setting(), 500, 1000, quiet());
  return e;
}

Outcome fidelity_convergence() {
  const auto& e = fidelity_ensemble();
  const auto& f = e.metric("fidelity");
  const double final_mean = f.mean.back();
  const auto mono = monotonicity_test(e.paths("fidelity"), e.times, 3.0);
  const bool pass = final_mean >= 0.95 && mono.passed() && e.n_diverged == 0;
  return {pass, "n=" + std::to_string(e.n_ok()) + " diverged=" +
                    std::to_string(e.n_diverged) + " mean F(30)=" + num(final_mean, 6) +
                    " (>= 0.95), monotone violations=" +
                    std::to_string(mono.violations.size()) +
                    " worst increment z=" + num(mono.worst_z)};
}

Outcome submartingale() {
  const auto& e = fidelity_ensemble();
  const auto a = submartingale_test(e.paths("fidelity"), e.times, 3.0);

  auto c = figure_config(Figure::Fig4);
  c.integrator.record_stride = 100;
  const auto e3 = run_ensemble(c, 500, 2000, quiet());
  const auto b = submartingale_test(e3.paths("fidelity"), e3.times, 3.0);
  return {a.passed() && b.passed(),
          "spin-1/2 violations=" + std::to_string(a.violations.size()) +
              " worst z=" + num(a.worst_z) + "; N=3 expectation law n=" +
              std::to_string(e3.n_ok()) + " violations=" +
              std::to_string(b.violations.size()) + " worst z=" + num(b.worst_z)};
}

Outcome generator_cross_check() {
  const auto ops = make_sme_operators<double>(2, Convention::AngularMomentum);
  const double h = 1e-4;
  const double M = 1.0;
  std::mt19937_64 rng(3000);
  std::uniform_real_distribution<double> control(-2.0, 2.0);
  std::size_t failures = 0, cases = 0;
  double worst_ratio = 0, closed_form_gap = 0;
  for (int pair = 0; pair < 200; ++pair) {
    const auto v = random_bloch<double>(rng, 0.9);
    const auto w = random_bloch<double>(rng, 0.9);
    const CoupledState<double> s{bloch_to_density(v), bloch_to_density(w)};
    const double u = control(rng);
    for (double eta : {0.0, 0.3, 1.0}) {
      const PhysicalParams<double> p{0.3, eta, M};
      const double expected = generator_fidelity_qubit(v, w, eta, M);
      const auto est = one_step_drift(s, u, h, 10000, rng, p, ops, [](const auto& x) {
        return fidelity_qubit(x.rho.matrix(), x.rho_hat.matrix());
      });
      const double allowed = 3 * est.se + 5 * h * M;
      const double gap = std::abs(est.mean - expected);
      worst_ratio = std::max(worst_ratio, gap / allowed);
      if (gap > allowed) ++failures;
      ++cases;
      if (eta == 1.0) {
        closed_form_gap = std::max(
            closed_form_gap, std::abs(expected - generator_fidelity_qubit_eta1(v, w, M)));
      }
    }
  }
  return {failures == 0 && closed_form_gap <= 1e-10,
          std::to_string(cases) + " cases, outside 3 SE + 5hM: " +
              std::to_string(failures) + ", worst gap/allowance=" + num(worst_ratio) +
              "; eta=1 closed form max gap=" + num(closed_form_gap, 3)};
}

Outcome purity_dynamics() {
  // Pure starts stay pure.
  SimConfig c;
  c.model = ModelKind::SpinJ;
  c.dim = 2;
  c.params = {0.3, 1.0, 1.0};
  c.controller = Controller::off();
  c.initial_rho_hat = StateSpec::mixed();
  c.integrator.T = 10;
  c.integrator.dt = 1e-3;
  c.integrator.record_stride = 1;
  c.integrator.scheme = Scheme::Kraus;
  std::mt19937_64 rng(4000);
  double max_s = 0;
  for (int i = 0; i < 20; ++i) {
    const auto b = random_bloch<double>(rng, 1.0);
    const double r = std::sqrt(b.norm_squared());
    c.initial_rho = StateSpec::bloch_vector(b.x / r, b.y / r, b.z / r);
    c.seed = 4100 + std::uint64_t(i);
    const auto t = simulate(c);
    for (const auto& m : t.metrics) max_s = std::max(max_s, m.purity_rho);
  }

  // Empirical drift of S against the closed form on interior states.
  const auto ops = make_sme_operators<double>(2, Convention::AngularMomentum);
  const double h = 1e-4;
  std::size_t failures = 0, cases = 0;
  double worst_ratio = 0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const auto v = random_bloch<double>(rng, 0.9);
    const double eta = unit(rng);
    const PhysicalParams<double> p{0.3, eta, 1.0};
    const CoupledState<double> s{bloch_to_density(v), bloch_to_density(v)};
    const double expected = purity_drift_closed_form(v.z, 1 - (1 + v.norm_squared()) / 2,
                                                     eta, 1.0);
    const auto est = one_step_drift(s, 0.0, h, 10000, rng, p, ops, [](const auto& x) {
      return purity_deficit(x.rho.matrix());
    });
    const double allowed = 3 * est.se + 5 * h * p.M;
    const double gap = std::abs(est.mean - expected);
    worst_ratio = std::max(worst_ratio, gap / allowed);
    if (gap > allowed) ++failures;
    ++cases;
  }
  return {max_s <= 1e-5 && failures == 0,
          "max S over 20 pure starts, T=10: " + num(max_s, 3) + " (<= 1e-5); drift " +
              std::to_string(cases) + " cases outside 3 SE + 5hM: " +
              std::to_string(failures) + ", worst gap/allowance=" + num(worst_ratio)};
}

Outcome qnd_convergence() {
  SimConfig c;
  c.model = ModelKind::SpinJ;
  c.dim = 3;
  c.params = {0.3, 1.0, 1.0};
  c.controller = Controller::off();
  c.initial_rho = StateSpec::mixed();
  c.initial_rho_hat = StateSpec::diagonal({0.5, 0.3, 0.2});
  c.integrator.T = 20;
  c.integrator.record_stride = 1000;
  const auto r = qnd_convergence_test(c, 500, 5000, 0.99, quiet());
  std::string freq;
  for (std::size_t k = 0; k < r.hit_frequency.size(); ++k) {
    freq += (k ? " " : "") + num(r.hit_frequency[k]) + " (z=" + num(r.z_scores[k], 3) + ")";
  }
  return {r.converged_fraction >= 0.95 && r.frequencies_within(3.0),
          "n=" + std::to_string(r.n_traj) + " converged=" + num(r.converged_fraction) +
              " (>= 0.95), hit frequencies " + freq};
}

// Diagnostic only: median over paths of the individual log-linear slopes.
double median_path_slope(const EnsembleStats& e, const char* metric) {
  const auto& paths = e.paths(metric);
  std::vector<double> slopes;
  for (Index r = 0; r < paths.rows(); ++r) {
    std::vector<double> y(std::size_t(paths.cols()));
    for (Index k = 0; k < paths.cols(); ++k) y[std::size_t(k)] = paths(r, k);
    try {
      slopes.push_back(fit_rate(e.times, y, 4.0, 18.0).slope);
    } catch (const InsufficientDataError&) {
    }
  }
  std::sort(slopes.begin(), slopes.end());
  return slopes.empty() ? 0.0 : sorted_quantile(slopes, 0.5);
}

Outcome conjecture_rates() {
  auto c3 = figure_config(Figure::Fig3);
  c3.integrator.record_stride = 100;
  const auto e3 = run_ensemble(c3, 100, 6000, quiet());
  const auto fit3 = fit_rate(e3.times, e3.metric("v0").mean, 4.0, 18.0);

  auto c4 = figure_config(Figure::Fig4);
  c4.integrator.record_stride = 100;
  const auto e4 = run_ensemble(c4, 100, 7000, quiet());
  const auto fit4 = fit_rate(e4.times, e4.metric("v1").mean, 4.0, 18.0);
  return {fit3.slope <= -0.20 && fit4.slope <= -0.10,
          "population law V0 slope of the mean on [4,18]=" + num(fit3.slope) +
              " (<= -0.20), per-path median slope " + num(median_path_slope(e3, "v0")) +
              "; expectation law V1 slope of the mean on [4,18]=" + num(fit4.slope) +
              " (<= -0.10), per-path median slope " + num(median_path_slope(e4, "v1"))};
}

Outcome bloch_matrix_agreement() {
  SimConfig c = figure_config(Figure::Fig1);
  c.model = ModelKind::SpinJ;
  c.integrator.dt = 1e-4;
  c.integrator.T = 1;
  c.integrator.record_stride = 1;
  double worst = 0;
  for (std::uint64_t seed = 8000; seed < 8010; ++seed) {
    const auto noise = generate_wiener(seed, c.integrator.dt, c.integrator.T);
    const auto m = simulate(c, noise);
    const auto b = simulate_bloch(c, noise);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto v = density_to_bloch(m.states[i].rho).vec();
      const auto vh = density_to_bloch(m.states[i].rho_hat).vec();
      worst = std::max({worst, (v - b.actual[i].vec()).cwiseAbs().maxCoeff(),
                        (vh - b.estimate[i].vec()).cwiseAbs().maxCoeff()});
    }
  }
  return {worst <= 5e-3, "sup-norm gap over 10 paths=" + num(worst, 3) + " (<= 5e-3)"};
}

Outcome strong_order() {
  SimConfig c = figure_config(Figure::Fig1);
  c.initial_rho = StateSpec::bloch_vector(0.3, -0.2, 0.5);
  c.initial_rho_hat = StateSpec::bloch_vector(-0.4, 0.1, -0.3);
  c.integrator.T = 1;
  const double ref_dt = 1e-5;
  const std::vector<double> dts{1e-2, 1e-3, 1e-4};
  std::vector<double> err(dts.size(), 0.0);
  const int paths = 16;
  for (int k = 0; k < paths; ++k) {
    const auto fine = generate_wiener(9000 + std::uint64_t(k), ref_dt, 1.0);
    SimConfig cr = c;
    cr.integrator.dt = ref_dt;
    cr.integrator.record_stride = fine.increments.size();
    const auto ref = simulate(cr, fine).states.back();
    for (std::size_t j = 0; j < dts.size(); ++j) {
      SimConfig cj = c;
      cj.integrator.dt = dts[j];
      const auto noise = coarsen(fine, std::size_t(std::llround(dts[j] / ref_dt)));
      cj.integrator.record_stride = noise.increments.size();
      const auto s = simulate(cj, noise).states.back();
      err[j] += ((s.rho.matrix() - ref.rho.matrix()).norm() +
                 (s.rho_hat.matrix() - ref.rho_hat.matrix()).norm()) /
                paths;
    }
  }
  std::vector<double> lx, ly;
  for (std::size_t j = 0; j < dts.size(); ++j) {
    lx.push_back(std::log(dts[j]));
    ly.push_back(std::log(err[j]));
  }
  const double mx = (lx[0] + lx[1] + lx[2]) / 3, my = (ly[0] + ly[1] + ly[2]) / 3;
  double sxy = 0, sxx = 0;
  for (std::size_t j = 0; j < 3; ++j) {
    sxy += (lx[j] - mx) * (ly[j] - my);
    sxx += (lx[j] - mx) * (lx[j] - mx);
  }
  const double order = sxy / sxx;
  return {std::abs(order - 0.5) <= 0.15,
          "errors " + num(err[0], 3) + ", " + num(err[1], 3) + ", " + num(err[2], 3) +
              "; fitted order=" + num(order) + " (0.5 +- 0.15)"};
}

Outcome determinism() {
  bool same = true;
  for (auto f : {Figure::Fig1, Figure::Fig3, Figure::Fig4}) {
    auto c = figure_config(f);
    c.integrator.T = 5;
    const auto a = simulate(c);
    const auto b = simulate(c);
    for (std::size_t i = 0; i < a.size(); ++i) {
      same = same && a.states[i] == b.states[i] && a.controls[i] == b.controls[i] &&
             a.observation[i] == b.observation[i];
    }
  }
  auto c = figure_config(Figure::Fig4);
  c.integrator.T = 2;
  EnsembleOptions one, many;
  one.threads = 1;
  many.threads = 4;
  const auto e1 = run_ensemble(c, 24, 42, one);
  const auto e2 = run_ensemble(c, 24, 42, many);
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    same = same && e1.samples[m] == e2.samples[m];
  }
  return {same, same ? "reruns and 1-vs-4-thread ensembles bit-identical"
                     : "reruns differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"fidelity_convergence", fidelity_convergence},
      {"submartingale", submartingale},
      {"generator_cross_check", generator_cross_check},
      {"purity_dynamics", purity_dynamics},
      {"qnd_convergence", qnd_convergence},
      {"conjecture_rates", conjecture_rates},
      {"bloch_matrix_agreement", bloch_matrix_agreement},
      {"strong_order", strong_order},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " ["
              << num(secs, 3) << " s]" << std::endl;
    if (!o.pass) ++failed;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criteria failed"
                       : std::string("acceptance: all criteria passed"))
            << std::endl;
  return failed ? 1 : 0;
}
