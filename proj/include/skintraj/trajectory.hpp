#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "skintraj/gaussian_state.hpp"
#include "skintraj/lattice.hpp"
#include "skintraj/rng.hpp"

namespace skintraj {

/// gamma * dt above this is rejected outright.
inline constexpr double kMaxGammaDt = 0.5;
/// gamma * dt above this risks the step-size artefact (spurious boundary
/// accumulation in the no-feedback case); callers should warn.
inline constexpr double kWarnGammaDt = 0.1;

/// |11..100..0> with the first L/2 sites filled.
std::vector<int> domain_wall_pattern(int L);
/// |1010..10>.
std::vector<int> neel_pattern(int L);

struct TrajectoryConfig {
  LatticeParams lattice;
  double dt = 0.01;
  double t_max = 0.0;
  std::vector<int> initial_pattern;
  std::uint64_t seed = 0;
  std::uint64_t trajectory_index = 0;
  int record_every = 1;
  bool record_density = false;

  /// t_max / dt as an exact count; validate() rejects non-integral ratios.
  long steps() const;
  void validate() const;
  bool pseudo_skin_risk() const { return lattice.gamma * dt > kWarnGammaDt; }
};

struct JumpEvent {
  long step = 0;
  int bond = 0;

  friend auto operator<=>(const JumpEvent&, const JumpEvent&) = default;
};

/// Either sample jumps from the counter RNG, or fire exactly a prescribed list
/// (sorted by (step, bond)) and consume no randomness.
class JumpSchedule {
 public:
  static JumpSchedule stochastic() { return JumpSchedule(); }
  static JumpSchedule forced(std::vector<JumpEvent> events);

  bool is_forced() const { return forced_.has_value(); }
  std::span<const JumpEvent> events() const;

 private:
  std::optional<std::vector<JumpEvent>> forced_;
};

struct TrajectoryRecord {
  TrajectoryConfig config;
  std::vector<ObservableSet> snapshots;
  std::vector<JumpEvent> jump_log;
  /// Per bond, the accumulated gamma dt <L^dagger L> over all steps: the
  /// expected number of firings.
  std::vector<double> expected_jumps;

  /// Rows are snapshot times, columns sites.
  Eigen::MatrixXd density_history() const;
};

class TrajectoryError : public std::runtime_error {
 public:
  TrajectoryError(std::uint64_t trajectory_index, long step, const std::string& what);

  std::uint64_t trajectory_index() const { return trajectory_index_; }
  long step() const { return step_; }

 private:
  std::uint64_t trajectory_index_;
  long step_;
};

/// exp(-i h_eff dt) by Pade scaling-and-squaring.
CMatrix precompute_propagator(const SingleParticleMatrix& h_eff, double dt);

/// One first-order step: drift with K, then decide every bond's jump on the
/// post-drift state and apply the fired ones in ascending bond order.
///
/// With `forced`, exactly those bonds fire and no randomness is used; a forced
/// bond with vanishing probability throws UnoccupiedJumpError. In stochastic
/// mode a bond whose quasi-mode was emptied by an earlier jump of the same step
/// is skipped (an O((gamma dt)^2) event). Returns the bonds actually applied.
std::vector<int> step(SlaterState& state, const CMatrix& K, const CounterRng& rng, long step_index,
                      std::span<const JumpOperator> jumps, double gamma_dt,
                      std::optional<std::span<const int>> forced = std::nullopt,
                      std::vector<double>* expected_jumps = nullptr);

/// Immutable per-run data: config, propagator and jump operators.
class TrajectoryEngine {
 public:
  explicit TrajectoryEngine(TrajectoryConfig config);

  const TrajectoryConfig& config() const { return config_; }
  const CMatrix& propagator() const { return propagator_; }
  std::span<const JumpOperator> jumps() const { return jumps_; }
  const CounterRng& rng() const { return rng_; }

  SlaterState initial_state() const;

  std::vector<int> advance(SlaterState& state, long step_index, std::optional<std::span<const int>> forced,
                           std::vector<double>* expected_jumps = nullptr) const;

  /// Snapshots at t = 0, every record_every steps, and at t_max.
  TrajectoryRecord run(const JumpSchedule& schedule) const;

 private:
  TrajectoryConfig config_;
  CMatrix propagator_;
  std::vector<JumpOperator> jumps_;
  CounterRng rng_;
};

TrajectoryRecord run_trajectory(const TrajectoryConfig& config,
                                const JumpSchedule& schedule = JumpSchedule::stochastic());

}  // namespace skintraj
