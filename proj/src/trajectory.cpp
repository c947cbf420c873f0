#include "skintraj/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

namespace skintraj {

std::vector<int> domain_wall_pattern(int L) {
  std::vector<int> pattern(L, 0);
  std::fill_n(pattern.begin(), L / 2, 1);
  return pattern;
}

std::vector<int> neel_pattern(int L) {
  std::vector<int> pattern(L, 0);
  for (int i = 0; i < L; i += 2) pattern[i] = 1;
  return pattern;
}

long TrajectoryConfig::steps() const { return std::lround(t_max / dt); }

void TrajectoryConfig::validate() const {
  lattice.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument(fmt::format("dt must be > 0, got {}", dt));
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) {
    throw std::invalid_argument(fmt::format("t_max must be >= 0, got {}", t_max));
  }
  const double ratio = t_max / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument(fmt::format("t_max / dt = {} is not an integer step count", ratio));
  }
  if (lattice.gamma * dt > kMaxGammaDt) {
    throw std::invalid_argument(
        fmt::format("gamma * dt = {} exceeds the hard limit {}", lattice.gamma * dt, kMaxGammaDt));
  }
  if (static_cast<int>(initial_pattern.size()) != lattice.L) {
    throw std::invalid_argument(
        fmt::format("initial pattern has {} sites, lattice has {}", initial_pattern.size(), lattice.L));
  }
  if (std::none_of(initial_pattern.begin(), initial_pattern.end(), [](int b) { return b != 0; })) {
    throw std::invalid_argument("initial pattern has no particles");
  }
  if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
}

JumpSchedule JumpSchedule::forced(std::vector<JumpEvent> events) {
  if (!std::is_sorted(events.begin(), events.end())) {
    throw std::invalid_argument("forced jump schedule must be sorted by (step, bond)");
  }
  JumpSchedule s;
  s.forced_ = std::move(events);
  return s;
}

std::span<const JumpEvent> JumpSchedule::events() const {
  if (!forced_) return {};
  return *forced_;
}

Eigen::MatrixXd TrajectoryRecord::density_history() const {
  const Eigen::Index L = config.lattice.L;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(snapshots.size()), L);
  for (std::size_t r = 0; r < snapshots.size(); ++r) {
    for (Eigen::Index i = 0; i < L; ++i) out(static_cast<Eigen::Index>(r), i) = snapshots[r].density[i];
  }
  return out;
}

TrajectoryError::TrajectoryError(std::uint64_t trajectory_index, long step, const std::string& what)
    : std::runtime_error(fmt::format("trajectory {} step {}: {}", trajectory_index, step, what)),
      trajectory_index_(trajectory_index),
      step_(step) {}

CMatrix precompute_propagator(const SingleParticleMatrix& h_eff, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("precompute_propagator: dt must be > 0");
  const CMatrix generator = Complex(0.0, -dt) * h_eff.entries;
  CMatrix K = generator.exp();
  if (!K.allFinite()) throw std::overflow_error("precompute_propagator: exp(-i h dt) overflowed");
  return K;
}

std::vector<int> step(SlaterState& state, const CMatrix& K, const CounterRng& rng, long step_index,
                      std::span<const JumpOperator> jumps, double gamma_dt,
                      std::optional<std::span<const int>> forced, std::vector<double>* expected_jumps) {
  state.propagate(K);

  std::vector<int> fired;
  if (forced) {
    fired.assign(forced->begin(), forced->end());
    if (expected_jumps) {
      for (const JumpOperator& j : jumps) (*expected_jumps)[j.bond] += gamma_dt * jump_expectation(state, j);
    }
    for (int b : fired) state = apply_jump(std::move(state), jumps[b]);
    return fired;
  }

  if (gamma_dt == 0.0) return fired;
  for (const JumpOperator& j : jumps) {
    const double prob = gamma_dt * jump_expectation(state, j);
    if (expected_jumps) (*expected_jumps)[j.bond] += prob;
    if (rng.uniform(static_cast<std::uint64_t>(step_index), static_cast<std::uint64_t>(j.bond)) < prob) {
      fired.push_back(j.bond);
    }
  }

  std::vector<int> applied;
  applied.reserve(fired.size());
  for (int b : fired) {
    try {
      state = apply_jump(state, jumps[b]);
      applied.push_back(b);
    } catch (const UnoccupiedJumpError&) {
      // An earlier jump in this step emptied the quasi-mode.
    }
  }
  return applied;
}

TrajectoryEngine::TrajectoryEngine(TrajectoryConfig config)
    : config_(std::move(config)), rng_(config_.seed, config_.trajectory_index) {
  config_.validate();
  propagator_ = precompute_propagator(build_h_eff(config_.lattice, false), config_.dt);
  jumps_ = jump_operators(config_.lattice);
}

SlaterState TrajectoryEngine::initial_state() const { return SlaterState::from_occupation(config_.initial_pattern); }

std::vector<int> TrajectoryEngine::advance(SlaterState& state, long step_index,
                                           std::optional<std::span<const int>> forced,
                                           std::vector<double>* expected_jumps) const {
  return step(state, propagator_, rng_, step_index, jumps_, config_.lattice.gamma * config_.dt, forced,
              expected_jumps);
}

TrajectoryRecord TrajectoryEngine::run(const JumpSchedule& schedule) const {
  const long n_steps = config_.steps();
  const auto events = schedule.events();
  for (const JumpEvent& e : events) {
    if (e.step < 1 || e.step > n_steps || e.bond < 0 || e.bond >= static_cast<int>(jumps_.size())) {
      throw TrajectoryError(config_.trajectory_index, e.step,
                            fmt::format("forced jump (step {}, bond {}) outside the run", e.step, e.bond));
    }
  }

  TrajectoryRecord record;
  record.config = config_;
  record.expected_jumps.assign(jumps_.size(), 0.0);

  SlaterState state = initial_state();
  record.snapshots.push_back(measure(state, 0.0));

  std::size_t cursor = 0;
  std::vector<int> forced_bonds;
  for (long s = 1; s <= n_steps; ++s) {
    std::optional<std::span<const int>> forced;
    if (schedule.is_forced()) {
      forced_bonds.clear();
      while (cursor < events.size() && events[cursor].step == s) forced_bonds.push_back(events[cursor++].bond);
      forced = std::span<const int>(forced_bonds);
    }
    try {
      for (int b : advance(state, s, forced, &record.expected_jumps)) record.jump_log.push_back({s, b});
      if (s % config_.record_every == 0 || s == n_steps) {
        record.snapshots.push_back(measure(state, static_cast<double>(s) * config_.dt));
      }
    } catch (const std::exception& e) {
      throw TrajectoryError(config_.trajectory_index, s, e.what());
    }
  }
  return record;
}

TrajectoryRecord run_trajectory(const TrajectoryConfig& config, const JumpSchedule& schedule) {
  return TrajectoryEngine(config).run(schedule);
}

}  // namespace skintraj
