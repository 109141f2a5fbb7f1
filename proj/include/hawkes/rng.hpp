#ifndef HAWKES_RNG_HPP
#define HAWKES_RNG_HPP

#include <cstdint>
#include <cmath>
#include <random>

namespace hawkes {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent child seed for (seed, index); used for per-path streams and
/// for the separate streams inside one simulation.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline double uniform01(std::mt19937_64& rng) {
  // 53 random bits in [0, 1).
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double exponential_draw(std::mt19937_64& rng, double rate) {
  return -std::log1p(-uniform01(rng)) / rate;
}

}  // namespace hawkes

#endif  // HAWKES_RNG_HPP
