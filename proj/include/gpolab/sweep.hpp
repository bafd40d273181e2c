#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gpolab/config.hpp"
#include "gpolab/risk.hpp"

namespace gpolab {

struct SweepCell {
  TrialSpec spec;
  std::optional<OmegaCalibration> calibration;
  std::string flag;  // nonempty when the cell could not run

  bool ok() const { return flag.empty(); }
};

struct SweepResult {
  SweepConfig config;
  std::vector<SweepCell> cells;         // loss-major, then gamma, N, epsilon
  std::vector<TrialOutcome> outcomes;   // cells.size() * trials, cell-major
  std::vector<CurvePoint> aggregates;   // one per cell

  const TrialOutcome& outcome(std::size_t cell, int trial) const {
    return outcomes[cell * static_cast<std::size_t>(config.trials) + static_cast<std::size_t>(trial)];
  }
};

/// Cells of the grid in canonical order, before any calibration.
std::vector<SweepCell> plan_cells(const SweepConfig& cfg);

/// Runs every (cell, trial); dispatches to run_uncertain_sweep for uncertain noise.
SweepResult run_sweep(const SweepConfig& cfg);

/// Calibrates omega once per (gamma, target) on a shared probe per gamma,
/// then trains on omega-uncertain data. Throws PreconditionError when
/// some gamma has t0(gamma, d) <= cos(phi).
SweepResult run_uncertain_sweep(const SweepConfig& cfg);

extern const char* const kPerTrialHeader;

void write_per_trial_csv(const std::filesystem::path& path, const SweepResult& result);
void write_aggregate_csv(const std::filesystem::path& path, const SweepResult& result);

/// Writes per_trial.csv, aggregate.csv and the plot-data files under `dir`.
std::vector<std::filesystem::path> write_sweep_outputs(const SweepResult& result, const std::filesystem::path& dir);

/// One (panel, series, epsilon) point of an aggregate or plot-data table.
struct PlotPoint {
  std::string loss;
  std::string series;  // "gamma=0.5", "N=600", or empty for a single series
  double epsilon = 0.0;
  double accuracy = 0.0;

  bool operator==(const PlotPoint&) const = default;
};

/// Aggregate CSV rows as plot points.
std::vector<PlotPoint> read_aggregate_points(const std::filesystem::path& aggregate_csv);

/// Pivots the aggregate into one plotdata_<loss>.csv per loss with x = epsilon
/// and one column per series, series ordered by ascending value.
std::vector<std::filesystem::path> emit_plotdata(const std::filesystem::path& aggregate_csv,
                                                 const std::filesystem::path& out_dir);

/// Inverse of the pivot for one plot-data file.
std::vector<PlotPoint> unpivot_plotdata(const std::filesystem::path& plotdata_csv, const std::string& loss);

}  // namespace gpolab
