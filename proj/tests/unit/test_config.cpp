#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "spinfb/config.hpp"

using namespace spinfb;

namespace {

bool mentions(const ConfigError& e, const std::string& needle) {
  return std::any_of(e.violations().begin(), e.violations().end(),
                     [&](const std::string& v) { return v.find(needle) != std::string::npos; });
}

ConfigError parse_error(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected a configuration error");
  return ConfigError({});
}

}  // namespace

TEST_CASE("an empty configuration gives the spin-1/2 defaults") {
  const auto c = parse_config("");
  CHECK(c == SimConfig{});
  CHECK(parse_config("# comment only\n\n  model.kind = spin_half  # trailing\n") == SimConfig{});
}

TEST_CASE("full configuration") {
  const auto c = parse_config(R"(
model.kind = spin_j
model.dim = 3
params.omega = 0.3
params.eta = 0.3
params.M = 1
controller.kind = expectation
controller.target = 1
controller.alpha = 2
controller.beta = 2
initial.rho = diag:0.2,0.2,0.6
initial.rho_hat = diag: 0.8, 0.1, 0.1
integrator.dt = 0.001
integrator.T = 20
integrator.scheme = kraus
integrator.projection = none
integrator.record_stride = 100
seed = 18446744073709551615
metrics.target = 2
output.metrics = v1, fidelity
output.dir = out/fig4
)");
  CHECK(c.model == ModelKind::SpinJ);
  CHECK(c.dim == 3);
  CHECK(c.controller == Controller::expectation(1, 2, 2));
  CHECK(c.initial_rho == StateSpec::diagonal({0.2, 0.2, 0.6}));
  CHECK(c.initial_rho_hat == StateSpec::diagonal({0.8, 0.1, 0.1}));
  CHECK(c.integrator.scheme == Scheme::Kraus);
  CHECK(c.integrator.projection == Projection::None);
  CHECK(c.integrator.record_stride == 100);
  CHECK(c.seed == 18446744073709551615ull);
  CHECK(c.metric_target == Index(2));
  CHECK(c.output.metrics == std::vector<std::string>{"v1", "fidelity"});
  CHECK(c.output.dir == "out/fig4");
}

TEST_CASE("spin_j dimension is inferred from a diag list") {
  const auto c = parse_config("model.kind = spin_j\ninitial.rho = diag:0.2,0.2,0.6\n"
                              "initial.rho_hat = mixed\ncontroller.kind = off\n");
  CHECK(c.dim == 3);
  CHECK(c.initial_rho.build(3).matrix()(2, 2).real() == doctest::Approx(0.6));
  CHECK(mentions(parse_error("model.kind = spin_j\n"), "model.dim"));
}

TEST_CASE("validation errors name the offending key") {
  const auto e = parse_error("params.eta = 1.5\n");
  REQUIRE(e.violations().size() == 1);
  CHECK(mentions(e, "eta"));
  CHECK(std::string(e.what()).find("eta") != std::string::npos);
}

TEST_CASE("all problems are reported together") {
  const auto e = parse_error(R"(
params.eta = 1.5
params.M = abc
colour = blue
seed = 1
seed = 2
integrator.scheme = rk4
initial.rho = basis:x
this line has no equals sign
)");
  CHECK(mentions(e, "params.M"));
  CHECK(mentions(e, "unknown key 'colour'"));
  CHECK(mentions(e, "duplicate key 'seed'"));
  CHECK(mentions(e, "integrator.scheme"));
  CHECK(mentions(e, "initial.rho"));
  CHECK(mentions(e, "line 9"));
  CHECK(e.violations().size() >= 6);

  const auto v = parse_error("params.eta = 1.5\nparams.M = -1\nintegrator.dt = 0\n");
  CHECK(v.violations().size() == 3);
}

TEST_CASE("invalid state specs report the failed invariant") {
  CHECK(mentions(parse_error("initial.rho = diag:0.5,0.6\n"), "trace"));
  CHECK(mentions(parse_error("initial.rho = bloch:1,1,0\n"), "initial.rho"));
  CHECK(mentions(parse_error("initial.rho = basis:2\n"), "initial.rho"));
  CHECK(mentions(parse_error("initial.rho_hat = diag:0.5,0.5,0\n"), "dimension"));
  CHECK(mentions(parse_error("initial.rho = pure\n"), "initial.rho"));
  CHECK_THROWS_AS(parse_state_spec("diag:1"), ConfigError);
  CHECK(parse_state_spec("bloch:0,0,1") == StateSpec::bloch_vector(0, 0, 1));
  CHECK(parse_state_spec("maximally_mixed") == StateSpec::mixed());
}

TEST_CASE("other validation rules") {
  CHECK(mentions(parse_error("integrator.record_stride = 7\n"), "record_stride"));
  CHECK(mentions(parse_error("model.dim = 3\n"), "spin_half"));
  CHECK(mentions(parse_error("output.metrics = fidelity,nope\n"), "nope"));
  CHECK(mentions(parse_error("controller.kind = population\ncontroller.target = 4\n"), "target"));
  CHECK(mentions(parse_error("metrics.target = 2\n"), "metrics.target"));
  CHECK(mentions(parse_error("controller.kind = bang_bang\n"), "controller.kind"));
}

TEST_CASE("serialization round trip") {
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int i = 0; i < 200; ++i) {
    SimConfig c;
    const bool qubit = i % 2 == 0;
    c.model = qubit ? ModelKind::SpinHalf : ModelKind::SpinJ;
    c.dim = qubit ? 2 : 2 + i % 4;
    c.params = {unit(rng), unit(rng), 0.1 + unit(rng)};
    switch (i % 4) {
      case 0: c.controller = Controller::off(); break;
      case 1: c.controller = Controller::constant(unit(rng) - 0.5); break;
      case 2: c.controller = Controller::population(c.dim - 1, 1 + unit(rng), 1 + unit(rng)); break;
      default: c.controller = Controller::expectation(0, 1 + unit(rng), 1 + unit(rng)); break;
    }
    std::vector<double> d(std::size_t(c.dim));
    double sum = 0;
    for (auto& x : d) sum += (x = unit(rng));
    for (auto& x : d) x /= sum;
    c.initial_rho = StateSpec::diagonal(d);
    c.initial_rho_hat = qubit ? StateSpec::bloch_vector(0.3 * unit(rng), -0.2, 0.1) : StateSpec::basis(1);
    c.integrator.dt = 1e-3 * (1 + unit(rng));
    c.integrator.T = 1;
    c.integrator.record_stride = 1;
    c.integrator.scheme = i % 3 == 0 ? Scheme::Kraus : Scheme::EulerMaruyama;
    c.seed = rng();
    if (i % 5 == 0) c.metric_target = 0;
    if (i % 7 == 0) c.output.metrics = {"fidelity", "u"};
    c.output.dir = "runs/" + std::to_string(i);
    REQUIRE(c.violations().empty());
    const auto text = serialize_config(c);
    CHECK(parse_config(text) == c);
    CHECK(serialize_config(parse_config(text)) == text);
  }
}

TEST_CASE("real formatting round-trips") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> unit(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = unit(rng) * std::pow(10.0, i % 40 - 20);
    CHECK(std::stod(format_real(x)) == x);
  }
  CHECK(format_real(20) == "20");
  CHECK(format_real(0.3) == "0.3");
}

TEST_CASE("loading from files") {
  const auto path = std::filesystem::temp_directory_path() / "spinfb_config_test.cfg";
  {
    std::ofstream out(path);
    out << "params.eta = 0.5\n";
  }
  CHECK(load_config(path.string()).params.eta == 0.5);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config(path.string()), IoError);
}
