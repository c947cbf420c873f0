#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skintraj/trajectory.hpp"

namespace skintraj {

struct EnsembleConfig {
  /// `base.seed` is the master seed; trajectory i uses (seed, i).
  TrajectoryConfig base;
  int n_traj = 2;
  double steady_window_fraction = 0.25;

  void validate() const;
};

struct SeriesStats {
  std::vector<double> mean;
  std::vector<double> err;
};

/// Ensemble mean and standard error of a per-trajectory steady value, with
/// the spread of the per-trajectory values.
struct SteadyValue {
  double mean = 0.0;
  double err = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct EnsembleRecord {
  EnsembleConfig config;
  std::vector<double> times;
  SeriesStats S_ent, S_cl, delta_n, current_J;
  SteadyValue steady_S_ent, steady_S_cl, steady_delta_n, steady_J;
  /// Per-site occupation averaged over the steady window and the ensemble.
  std::vector<double> density_mean;
  std::vector<double> density_err;
  /// Per-trajectory steady values, indexed by trajectory.
  std::vector<double> traj_S_ent, traj_S_cl, traj_delta_n, traj_J;
  std::size_t total_jumps = 0;
};

/// Number of trailing snapshots in the steady window (at least one).
std::size_t steady_window_size(std::size_t n_snapshots, double fraction);

/// Worker count from SKINTRAJ_WORKERS, else hardware concurrency.
int default_worker_count();

/// Runs trajectories 0..n_traj-1 on a bounded pool and reduces them in index
/// order, so the result does not depend on the worker count. The first
/// failing trajectory (lowest index) is rethrown as TrajectoryError.
EnsembleRecord run_ensemble(const EnsembleConfig& config, int workers = 0);

/// Mean and standard error (sample standard deviation / sqrt(n)).
SteadyValue summarize(std::span<const double> values);

// ---- finite-size scaling ------------------------------------------------

struct CollapsePoint {
  int L = 0;
  double gamma = 0.0;
  double S_cl_mean = 0.0;
  double S_cl_err = 0.0;
};

struct CollapseRow {
  int L = 0;
  double gamma = 0.0;
  double x = 0.0;    // gamma * L
  double y = 0.0;    // S_cl / L
  double err = 0.0;  // S_cl_err / L
};

/// Least-squares line ln y = intercept + slope ln x.
struct LogLogFit {
  double slope = 0.0;
  double slope_err = 0.0;
  double intercept = 0.0;
  std::size_t n_points = 0;
};

LogLogFit log_log_fit(std::span<const double> x, std::span<const double> y);

struct TailFit {
  LogLogFit loglog;
  /// Amplitude of y = c / x with the slope pinned to -1.
  double c = 0.0;
  double x_min = 0.0;
  double x_max = 0.0;
};

struct CollapseResult {
  std::vector<CollapseRow> table;
  std::optional<TailFit> tail;
  std::string refusal;  // why the tail fit was refused, if it was
};

/// Rescales to (gamma L, S_cl / L) and fits the largest decade of gamma L.
/// Requires at least 3 distinct L; the fit needs at least 3 tail points.
CollapseResult collapse_scan(std::span<const CollapsePoint> points);

struct ScalingFit {
  double exponent = 0.0;
  double error = 0.0;
};

/// Slope of ln S against ln L. Needs at least 3 sizes, all with S > 0.
ScalingFit scaling_exponent_fit(std::span<const std::pair<int, double>> points);

}  // namespace skintraj
