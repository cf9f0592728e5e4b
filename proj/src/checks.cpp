#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "spinfb/config.hpp"
#include "spinfb/experiments.hpp"

namespace spinfb {

namespace {

using Check = std::pair<const char*, std::function<std::string()>>;

std::string expect(bool ok, const std::string& detail) { return ok ? "" : detail; }

std::string sme_terms_preserve_states() {
  std::mt19937_64 rng(11);
  for (Index dim = 2; dim <= 5; ++dim) {
    const auto ops = make_sme_operators<double>(dim, Convention::AngularMomentum);
    const PhysicalParams<double> p{0.3, 0.3, 1.0};
    for (int i = 0; i < 50; ++i) {
      const auto rho = random_state<double>(dim, rng);
      const auto t = sme_terms(rho.matrix(), 0.7, p, ops);
      for (const auto* m : {&t.drift, &t.diffusion}) {
        if (std::abs(m->trace()) > 1e-12) return "trace not preserved at dim " + std::to_string(dim);
        if ((*m - m->adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
          return "Hermiticity not preserved at dim " + std::to_string(dim);
        }
      }
    }
  }
  return "";
}

std::string purity_drift_matches_closed_form() {
  std::mt19937_64 rng(12);
  const auto ops = make_sme_operators<double>(2, Convention::AngularMomentum);
  double worst = 0;
  for (int i = 0; i < 200; ++i) {
    const double eta = std::uniform_real_distribution<double>(0, 1)(rng);
    const PhysicalParams<double> p{0.3, eta, 1.3};
    const auto rho = random_state<double>(2, rng);
    const double got = purity_ito_drift(rho.matrix(), 0.4, p, ops);
    const double want = purity_drift_closed_form(density_to_bloch(rho).z,
                                                 purity_deficit(rho), eta, p.M);
    worst = std::max(worst, std::abs(got - want));
  }
  return expect(worst <= 1e-10, "max deviation " + format_real(worst));
}

std::string generator_forms_agree() {
  std::mt19937_64 rng(13);
  double worst = 0;
  for (int i = 0; i < 200; ++i) {
    const auto v = random_bloch<double>(rng, 0.95);
    const auto w = random_bloch<double>(rng, 0.95);
    const double eta = std::uniform_real_distribution<double>(0, 1)(rng);
    const double g1 = generator_fidelity_qubit(v, w, 1.0, 1.0);
    const double g0 = generator_fidelity_qubit(v, w, 0.0, 1.0);
    const double g = generator_fidelity_qubit(v, w, eta, 1.0);
    worst = std::max({worst, std::abs(g1 - generator_fidelity_qubit_eta1(v, w, 1.0)),
                      std::abs(g0 - generator_fidelity_qubit_eta0(v, w, 1.0)),
                      std::abs(g - (eta * g1 + (1 - eta) * g0))});
  }
  return expect(worst <= 1e-10, "max deviation " + format_real(worst));
}

std::string bloch_form_matches_matrix_form() {
  std::mt19937_64 rng(14);
  const auto ops = make_sme_operators<double>(2, Convention::AngularMomentum);
  double worst = 0;
  for (int i = 0; i < 200; ++i) {
    const PhysicalParams<double> p{0.3, 0.6, 1.0};
    const CoupledState<double> s{random_state<double>(2, rng), random_state<double>(2, rng)};
    const double u = 0.8;
    const auto [d, dh] = coupled_drift(s, u, p, ops);
    const auto v = density_to_bloch(s.rho);
    const auto vh = density_to_bloch(s.rho_hat);
    const auto bd = bloch_drift(v, vh, u, p);
    const auto bg = bloch_diffusion(v, vh, p);
    const auto g = diffusion_term(s.rho.matrix(), p, ops);
    const auto gh = diffusion_term(s.rho_hat.matrix(), p, ops);
    const auto as_bloch = [](const Matrix<double>& m) {
      return Vector3<double>(2 * m(1, 0).real(), 2 * m(1, 0).imag(),
                             (m(0, 0) - m(1, 1)).real());
    };
    worst = std::max({worst, (as_bloch(d) - bd.actual).norm(),
                      (as_bloch(dh) - bd.estimate).norm(),
                      (as_bloch(g) - bg.actual).norm(),
                      (as_bloch(gh) - bg.estimate).norm()});
  }
  return expect(worst <= 1e-12, "max deviation " + format_real(worst));
}

std::string fidelity_properties() {
  std::mt19937_64 rng(15);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_state<double>(2, rng);
    const auto b = random_state<double>(2, rng);
    const double f = fidelity_general(a, b);
    if (!(f >= -1e-12 && f <= 1 + 1e-12)) return "fidelity out of [0, 1]";
    if (std::abs(f - fidelity_general(b, a)) > 1e-10) return "fidelity not symmetric";
    if (std::abs(f - fidelity_qubit(a.matrix(), b.matrix())) > 1e-10) {
      return "qubit closed form disagrees with the general formula";
    }
    if (std::abs(fidelity_general(a, a) - 1) > 1e-8) return "F(rho, rho) != 1";
  }
  return "";
}

std::string lyapunov_bounds() {
  std::mt19937_64 rng(16);
  for (int i = 0; i < 500; ++i) {
    const auto a = random_state<double>(3, rng);
    const auto b = random_state<double>(3, rng);
    const double d0 = bures_coupled(a.matrix(), b.matrix(), 0);
    const double v0 = lyapunov_v0(a.matrix(), b.matrix(), 0);
    if (d0 < std::sqrt(2.0) / 4 * v0 - 1e-12 || d0 > 2 * std::sqrt(2.0) * v0 + 1e-12) {
      return "V0 bounds violated";
    }
    const double d1 = bures_coupled(a.matrix(), b.matrix(), 1);
    const double v1 = lyapunov_v1(a.matrix(), b.matrix(), 1);
    if (d1 < std::sqrt(2.0) / 2 * v1 - 1e-12 || d1 > std::sqrt(2.0) * v1 + 1e-12) {
      return "V1 bounds violated";
    }
  }
  return "";
}

std::string projection_returns_states() {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0, 0.02);
  for (int i = 0; i < 200; ++i) {
    Matrix<double> m = random_state<double>(3, rng).matrix();
    for (Index j = 0; j < 3; ++j)
      for (Index k = 0; k <= j; ++k) {
        const std::complex<double> e(noise(rng), j == k ? 0 : noise(rng));
        m(j, k) += e;
        if (j != k) m(k, j) += std::conj(e);
      }
    const auto out = project_to_physical(m);
    if (auto v = state_violation(out.matrix(), 1e-10)) return *v;
  }
  return "";
}

SimConfig short_config(Figure f) {
  auto c = figure_config(f);
  c.integrator.T = 2;
  return c;
}

std::string simulation_is_deterministic() {
  for (auto f : {Figure::Fig1, Figure::Fig4}) {
    const auto c = short_config(f);
    const auto a = simulate(c);
    const auto b = simulate(c);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!(a.states[i] == b.states[i]) || a.observation[i] != b.observation[i]) {
        return figure_name(f) + " rerun differs at record " + std::to_string(i);
      }
    }
  }
  return "";
}

std::string matched_estimate_stays_matched() {
  auto c = short_config(Figure::Fig3);
  c.initial_rho_hat = c.initial_rho = StateSpec::diagonal({0.5, 0.3, 0.2});
  const auto t = simulate(c);
  for (const auto& s : t.states) {
    if (!(s.rho == s.rho_hat)) return "estimate separated from an identical start";
  }
  return "";
}

std::string config_round_trip() {
  for (auto f : {Figure::Fig1, Figure::Fig2, Figure::Fig3, Figure::Fig4}) {
    auto c = figure_config(f);
    c.params.omega = 0.1 + 0.2;
    c.metric_target = 1;
    if (!(parse_config(serialize_config(c)) == c)) return figure_name(f) + " config changed";
  }
  return "";
}

}  // namespace

bool cmd_check(std::ostream& out) {
  const std::vector<Check> checks = {
      {"sme_terms_preserve_trace_and_hermiticity", sme_terms_preserve_states},
      {"purity_ito_drift_matches_closed_form", purity_drift_matches_closed_form},
      {"fidelity_generator_forms_agree", generator_forms_agree},
      {"bloch_form_matches_matrix_form", bloch_form_matches_matrix_form},
      {"fidelity_symmetric_bounded_consistent", fidelity_properties},
      {"lyapunov_bures_bounds", lyapunov_bounds},
      {"projection_returns_density_matrices", projection_returns_states},
      {"simulation_deterministic", simulation_is_deterministic},
      {"matched_estimate_stays_matched", matched_estimate_stays_matched},
      {"config_round_trip", config_round_trip},
  };
  bool all = true;
  for (const auto& [name, run] : checks) {
    std::string failure;
    try {
      failure = run();
    } catch (const std::exception& e) {
      failure = std::string("threw: ") + e.what();
    }
    all = all && failure.empty();
    out << (failure.empty() ? "PASS " : "FAIL ") << name;
    if (!failure.empty()) out << ": " << failure;
    out << '\n';
  }
  return all;
}

}  // namespace spinfb
