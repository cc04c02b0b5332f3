#pragma once

#include <cstdint>

namespace curb {

/// splitmix64 step: advances `state` and returns the next output.
inline std::uint64_t next_seed(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Independent stream seed for item `index` under `base`.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t state = base ^ (index * 0xD1B54A32D192ED03ull);
  return next_seed(state);
}

}  // namespace curb
