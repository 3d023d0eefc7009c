#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "liangyi/errors.hpp"
#include "liangyi/random.hpp"

namespace liangyi {

using InstanceId = std::uint64_t;

struct City {
  std::int64_t x = 0;
  std::int64_t y = 0;
  friend bool operator==(const City&, const City&) = default;
};

inline double distance(const City& a, const City& b) {
  const double dx = static_cast<double>(a.x - b.x);
  const double dy = static_cast<double>(a.y - b.y);
  return std::sqrt(dx * dx + dy * dy);
}

// Set of all instances with n cities on a [0, grid)^2 integer lattice.
struct InstanceSpace {
  int n = 14;
  std::int64_t grid = 1'000'000;

  void validate() const {
    if (n < 4) throw ValidationError("instance space: n must be >= 4, got " + std::to_string(n));
    if (grid < n)
      throw ValidationError("instance space: grid must be >= n (" + std::to_string(grid) + " < " +
                            std::to_string(n) + ")");
  }
};

struct TspInstance {
  InstanceId id = 0;
  std::int64_t grid = 0;
  std::vector<City> cities;

  int n() const { return static_cast<int>(cities.size()); }
  double dist(int a, int b) const { return distance(cities[a], cities[b]); }

  // Content hash; ids are allocated, this is what memo stores check against.
  std::uint64_t fingerprint() const {
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(grid) ^ (cities.size() << 40));
    for (const City& c : cities) {
      h = splitmix64(h ^ static_cast<std::uint64_t>(c.x));
      h = splitmix64(h ^ (static_cast<std::uint64_t>(c.y) * 0x9E3779B97F4A7C15ULL));
    }
    return h;
  }

  // All cities coincide: every tour has length 0 and PEO is undefined.
  bool degenerate() const {
    for (const City& c : cities)
      if (!(c == cities.front())) return false;
    return true;
  }

  bool valid_in(const InstanceSpace& space) const {
    if (n() != space.n || grid != space.grid) return false;
    for (const City& c : cities)
      if (c.x < 0 || c.y < 0 || c.x >= grid || c.y >= grid) return false;
    return true;
  }

  friend bool operator==(const TspInstance&, const TspInstance&) = default;
};

// Hands out run-unique instance ids.
class IdSource {
 public:
  explicit IdSource(std::uint64_t next = 1) : next_(next) {}
  std::uint64_t next() { return next_.fetch_add(1); }
  std::uint64_t peek() const { return next_.load(); }

 private:
  std::atomic<std::uint64_t> next_;
};

inline City random_city(std::int64_t grid, Rng& rng) {
  const auto g = static_cast<std::uint64_t>(grid);
  City c;
  c.x = static_cast<std::int64_t>(uniform_below(rng, g));
  c.y = static_cast<std::int64_t>(uniform_below(rng, g));
  return c;
}

// Coordinates drawn independently and uniformly from [0, grid). Coincident
// cities are permitted.
inline TspInstance gen_random_instance(const InstanceSpace& space, Rng& rng, InstanceId id) {
  TspInstance ins;
  ins.id = id;
  ins.grid = space.grid;
  ins.cities.reserve(space.n);
  for (int i = 0; i < space.n; ++i) ins.cities.push_back(random_city(space.grid, rng));
  return ins;
}

// Same as gen_random_instance but redraws the (vanishingly rare on large
// grids) all-coincident instance.
inline TspInstance gen_usable_instance(const InstanceSpace& space, Rng& rng, InstanceId id) {
  TspInstance ins = gen_random_instance(space, rng, id);
  while (ins.degenerate()) ins = gen_random_instance(space, rng, id);
  return ins;
}

// Uniform crossover on whole city slots. With probability cro the offspring
// take complementary coin-flipped slots from the parents, otherwise they are
// parent copies. Offspring receive the two given ids.
inline std::pair<TspInstance, TspInstance> crossover_instances(const TspInstance& a,
                                                               const TspInstance& b, double cro,
                                                               Rng& rng, InstanceId id1,
                                                               InstanceId id2) {
  if (a.n() != b.n() || a.grid != b.grid)
    throw StructuralError("crossover_instances: parents differ in n or grid");
  TspInstance c1 = a;
  TspInstance c2 = b;
  c1.id = id1;
  c2.id = id2;
  if (bernoulli(rng, cro)) {
    for (int i = 0; i < a.n(); ++i) {
      if (bernoulli(rng, 0.5)) {
        c1.cities[i] = b.cities[i];
        c2.cities[i] = a.cities[i];
      }
    }
  }
  return {std::move(c1), std::move(c2)};
}

// Each slot is replaced with probability mu by a fresh uniform city.
inline TspInstance mutate_instance(const TspInstance& ins, double mu, Rng& rng) {
  TspInstance out = ins;
  for (City& c : out.cities)
    if (bernoulli(rng, mu)) c = random_city(ins.grid, rng);
  return out;
}

}  // namespace liangyi
