#include "skintraj/rng.hpp"

namespace skintraj {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t trajectory_index)
    : key_(mix64(mix64(seed) ^ mix64(trajectory_index + 0x5851f42d4c957f2dULL))) {}

std::uint64_t CounterRng::bits(std::uint64_t step, std::uint64_t slot) const {
  return mix64(mix64(key_ ^ mix64(step)) + slot);
}

double CounterRng::uniform(std::uint64_t step, std::uint64_t slot) const {
  // 53 random mantissa bits, offset by half an ulp so 0 is never returned.
  return (static_cast<double>(bits(step, slot) >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace skintraj
