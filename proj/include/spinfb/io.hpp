#pragma once

// CSV output. Every file starts with a header row; reals are written with up
// to 17 significant digits so they read back exactly.

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "spinfb/ensemble.hpp"
#include "spinfb/sde.hpp"

namespace spinfb {

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);

  void row(const std::vector<double>& values);
  std::size_t columns() const { return header_.size(); }

 private:
  std::ostream& out_;
  std::vector<std::string> header_;
};

/// Opens `path` for writing, creating parent directories; IoError on failure.
std::ofstream open_output(const std::filesystem::path& path);

/// Channels to write: `requested` if non-empty, else all of kMetricNames.
std::vector<std::string> resolve_metrics(const std::vector<std::string>& requested);

/// Columns t, W, Y, then the selected metric channels; for dimension 2 also
/// the Bloch coordinates x, y, z, x_hat, y_hat, z_hat.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const std::vector<std::string>& metrics);

/// Long format: time, metric, mean, var, q05, q50, q95.
void write_ensemble_csv(std::ostream& out, const EnsembleStats& stats,
                        const std::vector<std::string>& metrics);

}  // namespace spinfb
