#ifndef LARMAP_RNG_HPP
#define LARMAP_RNG_HPP

#include <cstdint>
#include <random>

namespace larmap {

/// splitmix64 step; used to derive independent substream seeds from a
/// master seed so stage randomness does not depend on evaluation order.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
  return splitmix64(s);
}

/// Uniform integer in [0, bound) by rejection; stable across platforms,
/// unlike std::uniform_int_distribution.
inline std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

/// Uniform double in [0, 1) with 53 random bits.
inline double canonical_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace larmap

#endif
