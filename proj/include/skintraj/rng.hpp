#pragma once

#include <cstdint>

namespace skintraj {

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t z);

/// Counter-based uniform stream keyed by (seed, trajectory). Each draw is a
/// pure function of (step, bond), so replay does not depend on call order or
/// on which thread runs the trajectory.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t trajectory_index);

  std::uint64_t bits(std::uint64_t step, std::uint64_t slot) const;

  /// Uniform in the open interval (0, 1).
  double uniform(std::uint64_t step, std::uint64_t slot) const;

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

}  // namespace skintraj
