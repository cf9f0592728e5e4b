#pragma once

// Commands behind the command-line tool. Each writes its files under an
// output directory and returns what it computed so tests can inspect it.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "spinfb/ensemble.hpp"
#include "spinfb/sde.hpp"
#include "spinfb/sim_config.hpp"

namespace spinfb {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> T;
};

/// Applies the overrides; if the record stride no longer divides the step
/// count it is reduced to their greatest common divisor.
void apply_overrides(SimConfig& config, const Overrides& overrides);

Trajectory cmd_simulate(const SimConfig& config, const std::filesystem::path& out_dir);

struct EnsembleReport {
  EnsembleStats stats;
  std::optional<SubmartingaleReport> submartingale;  // needs >= 100 paths
  std::optional<MonotonicityReport> monotonicity;
  std::vector<std::pair<std::string, RateFit>> rates;
  std::string text;
};

/// Writes ensemble.csv and report.txt.
EnsembleReport cmd_ensemble(const SimConfig& config, std::size_t n_traj,
                            std::uint64_t base_seed,
                            const std::filesystem::path& out_dir,
                            const EnsembleOptions& options = {});

enum class Figure { Fig1, Fig2, Fig3, Fig4 };

std::optional<Figure> parse_figure(std::string_view name);
std::string figure_name(Figure f);

/// The experiment setting behind each figure.
SimConfig figure_config(Figure f);

struct ReproduceResult {
  std::filesystem::path csv;
  std::filesystem::path meta;
  std::vector<std::string> columns;
  std::vector<std::uint64_t> seeds;          // samples actually used
  std::vector<std::uint64_t> skipped_seeds;  // diverged, replaced by the next seed
};

inline constexpr std::size_t kFigureSamples = 10;
inline constexpr std::uint64_t kFigureBaseSeed = 1;

/// Writes <fig>.csv and <fig>_meta.txt (configuration and seeds).
ReproduceResult cmd_reproduce(Figure f, const std::filesystem::path& out_dir,
                              const Overrides& overrides = {});

/// Headless invariant suite; one line per check. True iff all pass.
bool cmd_check(std::ostream& out);

}  // namespace spinfb
