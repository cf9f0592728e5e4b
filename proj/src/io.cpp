#include "spinfb/io.hpp"

#include "spinfb/config.hpp"

namespace spinfb {

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header)
    : out_(out), header_(std::move(header)) {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) out_ << ',';
    out_ << header_[i];
  }
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != header_.size()) {
    throw DimensionError("CSV row has " + std::to_string(values.size()) +
                         " values for " + std::to_string(header_.size()) + " columns");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ',';
    out_ << format_real(values[i]);
  }
  out_ << '\n';
  if (!out_) throw IoError("write failed");
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

std::vector<std::string> resolve_metrics(const std::vector<std::string>& requested) {
  if (!requested.empty()) {
    for (const auto& name : requested) {
      if (!metric_index(name)) throw InvalidParameterError("unknown metric '" + name + "'");
    }
    return requested;
  }
  return {kMetricNames.begin(), kMetricNames.end()};
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const std::vector<std::string>& metrics) {
  const auto names = resolve_metrics(metrics);
  const bool qubit = !traj.states.empty() && traj.states.front().dim() == 2;
  std::vector<std::string> header{"t", "W", "Y"};
  header.insert(header.end(), names.begin(), names.end());
  if (qubit) {
    for (const char* c : {"x", "y", "z", "x_hat", "y_hat", "z_hat"}) header.emplace_back(c);
  }
  CsvWriter csv(out, header);
  std::vector<std::size_t> channels;
  for (const auto& n : names) channels.push_back(*metric_index(n));

  std::vector<double> row;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    row = {traj.times[i], traj.wiener[i], traj.observation[i]};
    for (auto c : channels) row.push_back(traj.metrics[i][c]);
    if (qubit) {
      const auto v = density_to_bloch(traj.states[i].rho);
      const auto w = density_to_bloch(traj.states[i].rho_hat);
      row.insert(row.end(), {v.x, v.y, v.z, w.x, w.y, w.z});
    }
    csv.row(row);
  }
}

void write_ensemble_csv(std::ostream& out, const EnsembleStats& stats,
                        const std::vector<std::string>& metrics) {
  const auto names = resolve_metrics(metrics);
  for (const char* h : {"time", "metric", "mean", "var", "q05", "q50", "q95"}) {
    out << h << (std::string_view(h) == "q95" ? '\n' : ',');
  }
  for (std::size_t i = 0; i < stats.times.size(); ++i) {
    for (const auto& name : names) {
      const auto& s = stats.metric(name);
      out << format_real(stats.times[i]) << ',' << name << ',' << format_real(s.mean[i])
          << ',' << format_real(s.var[i]) << ',' << format_real(s.q05[i]) << ','
          << format_real(s.q50[i]) << ',' << format_real(s.q95[i]) << '\n';
    }
  }
  if (!out) throw IoError("write failed");
}

}  // namespace spinfb
