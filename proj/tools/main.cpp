#include <CLI11.hpp>

#include <iostream>

#include "spinfb/config.hpp"
#include "spinfb/experiments.hpp"

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kDiverged = 2, kPropertyFailure = 3 };

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  std::size_t n_traj = 100;
  double dt = 0;
  double T = 0;
  std::string figure = "all";
};

spinfb::Overrides overrides_from(const CLI::App& cmd, const Options& o) {
  spinfb::Overrides ov;
  if (cmd.count("--seed")) ov.seed = o.seed;
  if (cmd.count("--dt")) ov.dt = o.dt;
  if (cmd.count("--T")) ov.T = o.T;
  return ov;
}

spinfb::SimConfig config_from(const CLI::App& cmd, const Options& o) {
  spinfb::SimConfig c = o.config_path.empty() ? spinfb::SimConfig{}
                                              : spinfb::load_config(o.config_path);
  spinfb::apply_overrides(c, overrides_from(cmd, o));
  c.validate();
  return c;
}

void add_common(CLI::App* cmd, Options& o, bool with_config) {
  if (with_config) cmd->add_option("--config", o.config_path, "configuration file");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--seed", o.seed, "seed (base seed for ensembles)");
  cmd->add_option("--dt", o.dt, "integration step");
  cmd->add_option("--T", o.T, "final time");
}

int run(int argc, char** argv) {
  CLI::App app{"Coupled stochastic master equations with state-estimate feedback"};
  app.require_subcommand(1);
  Options o;

  auto* simulate = app.add_subcommand("simulate", "integrate one coupled trajectory");
  add_common(simulate, o, true);
  auto* ensemble = app.add_subcommand("ensemble", "Monte-Carlo ensemble statistics");
  add_common(ensemble, o, true);
  ensemble->add_option("--n-traj", o.n_traj, "number of trajectories")
      ->check(CLI::PositiveNumber);
  auto* check = app.add_subcommand("check", "run the invariant suite");
  auto* reproduce = app.add_subcommand("reproduce", "write the figure data sets");
  add_common(reproduce, o, false);
  reproduce->add_option("figure", o.figure, "fig1, fig2, fig3, fig4 or all")
      ->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*simulate) {
      const auto c = config_from(*simulate, o);
      const auto traj = spinfb::cmd_simulate(c, o.out_dir);
      std::cout << "wrote " << traj.size() << " records to "
                << (std::filesystem::path(o.out_dir) / "trajectory.csv").string() << "\n";
    } else if (*ensemble) {
      const auto c = config_from(*ensemble, o);
      const auto rep = spinfb::cmd_ensemble(c, o.n_traj, c.seed, o.out_dir);
      std::cout << rep.text;
    } else if (*check) {
      return spinfb::cmd_check(std::cout) ? kOk : kPropertyFailure;
    } else if (*reproduce) {
      std::vector<spinfb::Figure> figures;
      if (o.figure == "all") {
        figures = {spinfb::Figure::Fig1, spinfb::Figure::Fig2, spinfb::Figure::Fig3,
                   spinfb::Figure::Fig4};
      } else {
        figures = {*spinfb::parse_figure(o.figure)};
      }
      for (auto f : figures) {
        const auto r = spinfb::cmd_reproduce(f, o.out_dir, overrides_from(*reproduce, o));
        std::cout << "wrote " << r.csv.string() << " and " << r.meta.string() << "\n";
      }
    }
  } catch (const spinfb::ConfigError& e) {
    std::cerr << "invalid configuration:\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v << "\n";
    return kValidation;
  } catch (const spinfb::DivergedError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return kDiverged;
  } catch (const spinfb::EnsembleError& e) {
    std::cerr << "ensemble failed: " << e.what() << "\n";
    return kDiverged;
  } catch (const spinfb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
