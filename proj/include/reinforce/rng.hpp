#pragma once

#include <cstdint>

namespace reinforce::rng {

// Every random decision in the library is counter-based: a value is a pure
// function of a seed and the indices naming the decision (trial, copy, round,
// arc, ...). This keeps trials reproducible from their seed and makes results
// independent of thread scheduling.

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Order-sensitive combine: mix(a, b) != mix(b, a) in general.
inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a + kGolden * (b + 1));
}

template <typename... Rest>
std::uint64_t mix(std::uint64_t a, std::uint64_t b, Rest... rest) {
  return mix(mix(a, b), static_cast<std::uint64_t>(rest)...);
}

inline double uniform01(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Stream tags decorrelating the independent consumers of a master seed.
enum Stream : std::uint64_t {
  kFaultStream = 0x6661756c74ull,
  kSchemeStream = 0x736368656dull,
  kAdversaryStream = 0x616476ull,
  kTrialStream = 0x747269616cull,
};

}  // namespace reinforce::rng
