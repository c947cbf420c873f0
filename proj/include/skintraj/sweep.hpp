#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "skintraj/config.hpp"
#include "skintraj/ensemble.hpp"

namespace skintraj {

/// One point of the Cartesian grid, as indices into the RunSpec lists.
struct GridPoint {
  std::size_t index = 0;
  std::size_t iL = 0, ip = 0, ig = 0, ith = 0, idt = 0, ibc = 0;
};

/// Grid points in row-major order over (L, p, gamma, theta, dt, bc).
std::vector<GridPoint> grid_points(const RunSpec& spec);

/// The run description restricted to a single grid point, as an `ensemble` run.
RunSpec point_spec(const RunSpec& spec, const GridPoint& point);

/// Directory name of a grid point, e.g. "point_0003".
std::string point_dir_name(const GridPoint& point);

struct ManifestRow {
  std::size_t index = 0;
  int L = 0;
  double p = 0.0, gamma = 0.0, theta = 0.0, dt = 0.0;
  Boundary bc = Boundary::Open;
  std::string status;  // "ok" or "failed"
  std::string dir;
  SteadyValue S_ent, S_cl, delta_n, J;
  std::string message;  // failure reason, empty when ok
};

std::string manifest_csv(const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> parse_manifest(std::string_view csv);

struct SweepSummary {
  std::vector<ManifestRow> rows;
  std::size_t computed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
};

/// Called once per grid point that actually runs (not for skipped points).
using SweepObserver = std::function<void(const GridPoint&)>;

/// Runs every grid point not already marked "ok" in `<out>/manifest.csv`,
/// writing each ensemble into its own subdirectory. Failures are recorded and
/// the grid continues. The manifest is rewritten after every point, and
/// `collapse_points.csv` is written at the end from the successful points.
SweepSummary run_sweep(const RunSpec& spec, const std::filesystem::path& out, int workers = 0,
                       const SweepObserver& observer = {});

/// Writes the per-run ensemble files (ensemble.csv, density_profile.csv,
/// steady.json, config.txt; ensemble.json when the format is json).
void write_ensemble_outputs(const EnsembleRecord& record, const RunSpec& spec,
                            const std::filesystem::path& dir);

}  // namespace skintraj
