#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

namespace liangyi {

// The engine is fully specified by the standard; the distributions below are
// hand-written because std::uniform_int_distribution and friends are
// implementation-defined and would break cross-platform reproducibility.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view text,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed of the named substream of a master seed ("init-ap", "evolve-ins", ...).
inline std::uint64_t substream_seed(std::uint64_t master, std::string_view name) {
  return splitmix64(master ^ splitmix64(fnv1a(name)));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

inline Rng make_substream(std::uint64_t master, std::string_view name) {
  return Rng(substream_seed(master, name));
}

// Uniform integer in [0, bound). bound must be positive.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

inline int uniform_int(Rng& rng, int lo, int hi_inclusive) {
  return lo + static_cast<int>(uniform_below(
                  rng, static_cast<std::uint64_t>(hi_inclusive - lo) + 1));
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

inline std::string save_rng(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

inline Rng load_rng(const std::string& state) {
  Rng rng;
  std::istringstream in(state);
  in >> rng;
  return rng;
}

}  // namespace liangyi
