#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "skintraj/ensemble.hpp"
#include "skintraj/lattice.hpp"
#include "skintraj/trajectory.hpp"

// Serialisers return the file contents so that byte-stability can be checked
// without touching the filesystem. Numbers use 17 significant digits, '.' as
// decimal separator and '\n' line endings.
namespace skintraj::io {

std::string format_number(double x);

void write_file(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

struct SpectrumBlock {
  ComplexSpectrum spectrum;
  LatticeParams params;
};

/// Columns: re,im,bc,L,p,gamma.
std::string spectrum_csv(const std::vector<SpectrumBlock>& blocks);
std::string spectrum_json(const std::vector<SpectrumBlock>& blocks);

/// Columns: time,S_ent,S_cl,delta_n,J.
std::string observables_csv(const TrajectoryRecord& record);
/// Columns: time,n1..nL; one row per snapshot.
std::string density_csv(const TrajectoryRecord& record);
/// Config echo, jump log ([step, bond] pairs) and the expected per-bond jump counts.
std::string trajectory_json(const TrajectoryRecord& record, std::string_view config_echo);
/// Observables, density history and jump log in one document.
std::string trajectory_full_json(const TrajectoryRecord& record, std::string_view config_echo);

/// Columns: time, then <obs>_mean,<obs>_err for S_ent,S_cl,delta_n,J.
std::string ensemble_csv(const EnsembleRecord& record);
/// Columns: site,mean,err.
std::string density_profile_csv(const EnsembleRecord& record);
/// Steady-state summaries and run metadata.
std::string steady_json(const EnsembleRecord& record, std::string_view config_echo);
std::string ensemble_full_json(const EnsembleRecord& record, std::string_view config_echo);

/// Columns: L,gamma,S_cl_mean,S_cl_err.
std::string collapse_points_csv(const std::vector<CollapsePoint>& points);
std::vector<CollapsePoint> parse_collapse_points(std::string_view csv);

/// Columns: gammaL,Scl_over_L,err,L,gamma.
std::string collapse_csv(const CollapseResult& result);
/// slope, slope_err, c, tail window; `refused` and `reason` when no fit.
std::string fit_json(const CollapseResult& result);

}  // namespace skintraj::io
