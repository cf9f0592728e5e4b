#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "spinfb/config.hpp"
#include "spinfb/experiments.hpp"
#include "spinfb/io.hpp"

using namespace spinfb;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("spinfb_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> header_of(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> out;
  std::stringstream s(line);
  for (std::string cell; std::getline(s, cell, ',');) out.push_back(cell);
  return out;
}

std::size_t line_count(const fs::path& file) {
  std::ifstream in(file);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SPINFB_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const Overrides kShort{std::nullopt, std::nullopt, 1.0};

}  // namespace

TEST_CASE("figure settings") {
  const auto f1 = figure_config(Figure::Fig1);
  CHECK(f1.model == ModelKind::SpinHalf);
  CHECK(f1.controller == Controller::constant(1));
  CHECK(f1.initial_rho == StateSpec::basis(1));
  CHECK(f1.initial_rho_hat == StateSpec::basis(0));
  CHECK(f1.params == PhysicalParams<double>{0.3, 0.3, 1.0});
  const auto f3 = figure_config(Figure::Fig3);
  CHECK(f3.dim == 3);
  CHECK(f3.controller == Controller::population(0, 5, 2));
  CHECK(f3.initial_rho == StateSpec::basis(2));
  CHECK(f3.initial_rho_hat == StateSpec::basis(1));
  const auto f4 = figure_config(Figure::Fig4);
  CHECK(f4.controller == Controller::expectation(1, 2, 2));
  CHECK(f4.initial_rho == StateSpec::diagonal({0.2, 0.2, 0.6}));
  CHECK(f4.initial_rho_hat == StateSpec::diagonal({0.8, 0.1, 0.1}));
  CHECK(parse_figure("fig2") == Figure::Fig2);
  CHECK_FALSE(parse_figure("fig5").has_value());
  CHECK(figure_name(Figure::Fig4) == "fig4");
}

TEST_CASE("reproduced figure data") {
  const auto dir = scratch("reproduce");
  const auto r1 = cmd_reproduce(Figure::Fig1, dir, kShort);
  std::vector<std::string> want{"t"};
  for (int i = 1; i <= 10; ++i) want.push_back("sample_" + std::to_string(i));
  want.push_back("mean");
  CHECK(header_of(r1.csv) == want);
  CHECK(r1.columns == want);
  CHECK(line_count(r1.csv) == 1 + 101);
  CHECK(r1.seeds.size() == 10);
  CHECK(slurp(r1.meta).find("# seeds: 1 2 3 4 5 6 7 8 9 10") != std::string::npos);

  const auto r2 = cmd_reproduce(Figure::Fig2, dir, kShort);
  CHECK(header_of(r2.csv) ==
        std::vector<std::string>{"t", "x", "y", "z", "x_hat", "y_hat", "z_hat"});

  const auto r3 = cmd_reproduce(Figure::Fig3, dir, kShort);
  const auto h3 = header_of(r3.csv);
  CHECK(h3.front() == "t");
  CHECK(h3[1] == "v0_1");
  CHECK(std::find(h3.begin(), h3.end(), "v0_mean") != h3.end());
  CHECK(std::find(h3.begin(), h3.end(), "bures_mean") != h3.end());
  CHECK(std::find(h3.begin(), h3.end(), "ref_exp_-0.3") != h3.end());
  CHECK(std::find(h3.begin(), h3.end(), "ref_exp_-0.15") != h3.end());

  const auto r4 = cmd_reproduce(Figure::Fig4, dir, kShort);
  const auto h4 = header_of(r4.csv);
  CHECK(std::find(h4.begin(), h4.end(), "v1_mean") != h4.end());
  CHECK(std::find(h4.begin(), h4.end(), "ref_exp_-0.15") != h4.end());
  CHECK(std::find(h4.begin(), h4.end(), "ref_exp_-0.3") == h4.end());

  // The meta file holds a configuration that reproduces the run.
  const auto meta = slurp(r4.meta);
  const auto cfg = parse_config(meta);
  CHECK(cfg.integrator.T == 1.0);
  CHECK(cfg.controller == Controller::expectation(1, 2, 2));

  // Reference columns are exp(slope t).
  std::ifstream in(r3.csv);
  std::string line;
  std::getline(in, line);
  for (int i = 0; i < 51; ++i) std::getline(in, line);
  std::vector<double> row;
  std::stringstream s(line);
  for (std::string cell; std::getline(s, cell, ',');) row.push_back(std::stod(cell));
  const auto col = std::size_t(std::find(h3.begin(), h3.end(), "ref_exp_-0.3") - h3.begin());
  CHECK(row[col] == doctest::Approx(std::exp(-0.3 * row[0])).epsilon(1e-15));
  CHECK(row[0] == doctest::Approx(0.5));

  CHECK_THROWS_AS(cmd_reproduce(Figure::Fig1, "/proc/spinfb_no_such_dir", kShort), IoError);
}

TEST_CASE("reproduction is deterministic") {
  const auto a = scratch("repro_a");
  const auto b = scratch("repro_b");
  cmd_reproduce(Figure::Fig3, a, kShort);
  cmd_reproduce(Figure::Fig3, b, kShort);
  CHECK(slurp(a / "fig3.csv") == slurp(b / "fig3.csv"));
}

TEST_CASE("simulate command writes a self-describing trajectory") {
  const auto dir = scratch("simulate");
  auto c = figure_config(Figure::Fig1);
  c.integrator.T = 1;
  const auto t = cmd_simulate(c, dir);
  const auto h = header_of(dir / "trajectory.csv");
  std::vector<std::string> want{"t", "W", "Y"};
  want.insert(want.end(), kMetricNames.begin(), kMetricNames.end());
  for (const char* b : {"x", "y", "z", "x_hat", "y_hat", "z_hat"}) want.emplace_back(b);
  CHECK(h == want);
  CHECK(line_count(dir / "trajectory.csv") == t.size() + 1);

  c = figure_config(Figure::Fig3);
  c.integrator.T = 1;
  c.output.metrics = {"v0", "u"};
  cmd_simulate(c, dir);
  CHECK(header_of(dir / "trajectory.csv") == std::vector<std::string>{"t", "W", "Y", "v0", "u"});
}

TEST_CASE("CSV values read back exactly") {
  std::ostringstream out;
  CsvWriter csv(out, {"a", "b"});
  csv.row({0.1, 1.0 / 3.0});
  CHECK_THROWS_AS(csv.row({1.0}), DimensionError);
  std::string text = out.str();
  const auto line = text.substr(text.find('\n') + 1);
  CHECK(std::stod(line.substr(line.find(',') + 1)) == 1.0 / 3.0);
}

TEST_CASE("ensemble command") {
  const auto dir = scratch("ensemble");
  auto c = figure_config(Figure::Fig1);
  c.integrator.T = 1;
  c.integrator.record_stride = 100;
  const auto rep = cmd_ensemble(c, 100, 3, dir);
  CHECK(header_of(dir / "ensemble.csv") ==
        std::vector<std::string>{"time", "metric", "mean", "var", "q05", "q50", "q95"});
  CHECK(line_count(dir / "ensemble.csv") == 1 + 11 * kMetricNames.size());
  CHECK(rep.submartingale.has_value());
  CHECK(rep.text.find("submartingale test") != std::string::npos);
  CHECK(slurp(dir / "report.txt") == rep.text);

  const auto small = cmd_ensemble(c, 5, 3, dir);
  CHECK_FALSE(small.submartingale.has_value());
}

TEST_CASE("overrides") {
  auto c = figure_config(Figure::Fig1);
  apply_overrides(c, Overrides{42, 0.003, 3.0});
  CHECK(c.seed == 42);
  CHECK(c.integrator.dt == 0.003);
  CHECK(c.integrator.T == 3.0);
  CHECK(c.integrator.steps() % c.integrator.record_stride == 0);
  CHECK(c.violations().empty());
}

TEST_CASE("property suite passes") {
  std::ostringstream out;
  CHECK(cmd_check(out));
  CHECK(out.str().find("FAIL") == std::string::npos);
}

TEST_CASE("command-line exit codes") {
  const auto dir = scratch("cli");
  CHECK(run_cli("simulate --T 0.5 --seed 3 --out " + dir.string()) == 0);
  CHECK(fs::exists(dir / "trajectory.csv"));

  const auto bad = dir / "bad.cfg";
  std::ofstream(bad) << "params.eta = 1.5\n";
  CHECK(run_cli("simulate --config " + bad.string() + " --out " + dir.string()) == 1);
  CHECK(run_cli("simulate --config " + (dir / "missing.cfg").string()) == 1);
  CHECK(run_cli("simulate --bogus-flag") == 1);
  CHECK(run_cli("reproduce fig9") == 1);

  const auto blowup = dir / "blowup.cfg";
  std::ofstream(blowup) << "model.kind = spin_j\nmodel.dim = 3\nparams.M = 200\n"
                           "integrator.dt = 0.05\nintegrator.T = 5\nintegrator.record_stride = 1\n"
                           "initial.rho = mixed\ncontroller.kind = population\n"
                           "controller.alpha = 5\ncontroller.beta = 2\n";
  CHECK(run_cli("simulate --config " + blowup.string() + " --out " + dir.string()) == 2);
  CHECK(run_cli("ensemble --config " + blowup.string() + " --n-traj 4 --out " + dir.string()) == 2);

  CHECK(run_cli("ensemble --T 0.5 --n-traj 4 --out " + dir.string()) == 0);
  CHECK(fs::exists(dir / "report.txt"));
  CHECK(run_cli("reproduce fig2 --T 0.5 --out " + dir.string()) == 0);
  CHECK(fs::exists(dir / "fig2.csv"));
  CHECK(run_cli("check") == 0);
}
