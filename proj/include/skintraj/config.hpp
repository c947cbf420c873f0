#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "skintraj/ensemble.hpp"
#include "skintraj/lattice.hpp"
#include "skintraj/trajectory.hpp"

namespace skintraj {

enum class Subcommand { Spectrum, Trajectory, Ensemble, Sweep, Collapse, OracleCheck };
enum class OutputFormat { Csv, Json };

std::string_view to_string(Subcommand cmd);
Subcommand parse_subcommand(std::string_view text);

/// Validation failure tied to one config key. `line` is 0 for command-line
/// overrides.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, int line, const std::string& message);

  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

/// Fully validated run description. Grid keys (L, p, gamma, theta, dt, bc)
/// hold lists; only `sweep` and `spectrum` accept more than one value.
struct RunSpec {
  Subcommand subcommand = Subcommand::Trajectory;

  std::vector<int> L{64};
  std::vector<double> p{2.0};
  std::vector<double> gamma{0.5};
  std::vector<double> theta{M_PI};
  std::vector<double> dt{0.01};
  std::vector<Boundary> bc{Boundary::Open};
  double t = 1.0;

  double t_max = 10.0;
  std::string initial = "domainwall";
  std::uint64_t seed = 1;
  std::uint64_t trajectory_index = 0;
  int record_every = 10;
  bool record_density = false;

  int n_traj = 100;
  double steady_window_fraction = 0.25;

  bool drop_dissipation = true;  // spectrum of the shifted generator
  std::string input;              // collapse: CSV of collapse points
  double tolerance = 1e-8;        // oracle-check

  std::string output_dir = "out";
  OutputFormat format = OutputFormat::Csv;

  /// Effective key=value text, one key per line, in a fixed key order.
  std::string echo() const;

  /// Configuration for one grid point.
  TrajectoryConfig trajectory_config(std::size_t iL = 0, std::size_t ip = 0, std::size_t ig = 0,
                                     std::size_t ith = 0, std::size_t idt = 0, std::size_t ibc = 0) const;
  EnsembleConfig ensemble_config(const TrajectoryConfig& base) const;
};

/// Raw `key=value` entries with their source line (0 = override).
struct ConfigEntry {
  std::string value;
  int line = 0;
};
using ConfigEntries = std::map<std::string, ConfigEntry>;

/// Parses `key=value` lines ('#' starts a comment). Duplicate or malformed
/// lines throw ConfigError.
ConfigEntries parse_entries(std::string_view text);

/// Builds and validates a RunSpec from config text plus overrides; overrides
/// win over file values. Unknown keys, type mismatches and constraint
/// violations throw ConfigError naming the key and line.
RunSpec parse_config(std::string_view text, const ConfigEntries& overrides = {});

/// theta accepts "pi", "0", "k*pi", "pi/k", "k*pi/m" or raw radians.
double parse_angle(std::string_view text);

/// Preset name ("domainwall", "neel") or an explicit 0/1 string of length L.
std::vector<int> initial_pattern(std::string_view spec, int L);

}  // namespace skintraj
