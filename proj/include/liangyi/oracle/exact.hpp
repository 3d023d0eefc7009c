#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "liangyi/errors.hpp"
#include "liangyi/tsp/instance.hpp"

namespace liangyi {

inline constexpr int kDefaultHeldKarpMax = 18;
inline constexpr int kBruteForceMax = 9;

// Held-Karp dynamic program, O(n^2 2^n). City 0 is the fixed start; path
// sums accumulate from city 0 with the closing edge added last, the same
// order brute_force_opt uses, so the two agree bit for bit.
inline double held_karp_opt(const TspInstance& ins, int n_max = kDefaultHeldKarpMax) {
  const int n = ins.n();
  if (n < 4) throw StructuralError("held_karp_opt: need at least 4 cities");
  if (n > n_max)
    throw CapacityError("held_karp_opt: n = " + std::to_string(n) + " exceeds the exact limit " +
                        std::to_string(n_max) + "; import optima from an external solver");
  const int m = n - 1;  // cities 1..n-1 map to bits 0..m-1
  const std::size_t full = (std::size_t{1} << m);
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dp(full * m, inf);
  std::vector<double> d(static_cast<std::size_t>(n) * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) d[a * n + b] = ins.dist(a, b);

  for (int j = 0; j < m; ++j) dp[(std::size_t{1} << j) * m + j] = d[0 * n + (j + 1)];
  for (std::size_t mask = 1; mask < full; ++mask) {
    for (int j = 0; j < m; ++j) {
      if (!(mask & (std::size_t{1} << j))) continue;
      const double here = dp[mask * m + j];
      if (here == inf) continue;
      for (int k = 0; k < m; ++k) {
        if (mask & (std::size_t{1} << k)) continue;
        const std::size_t next = mask | (std::size_t{1} << k);
        const double cand = here + d[(j + 1) * n + (k + 1)];
        double& slot = dp[next * m + k];
        if (cand < slot) slot = cand;
      }
    }
  }
  double best = inf;
  for (int j = 0; j < m; ++j) best = std::min(best, dp[(full - 1) * m + j] + d[(j + 1) * n + 0]);
  return best;
}

// Enumerates the (n-1)!/2 undirected tours through city 0, summing each in
// both directions.
inline double brute_force_opt(const TspInstance& ins) {
  const int n = ins.n();
  if (n < 4) throw StructuralError("brute_force_opt: need at least 4 cities");
  if (n > kBruteForceMax)
    throw CapacityError("brute_force_opt: n = " + std::to_string(n) + " exceeds " +
                        std::to_string(kBruteForceMax));
  std::vector<int> rest(n - 1);
  std::iota(rest.begin(), rest.end(), 1);
  double best = std::numeric_limits<double>::infinity();
  auto directed = [&](auto first, auto last) {
    double total = 0.0;
    int prev = 0;
    for (auto it = first; it != last; ++it) {
      total += ins.dist(prev, *it);
      prev = *it;
    }
    return total + ins.dist(prev, 0);
  };
  do {
    if (rest.front() > rest.back()) continue;  // the mirror tour is handled below
    best = std::min(best, directed(rest.begin(), rest.end()));
    best = std::min(best, directed(rest.rbegin(), rest.rend()));
  } while (std::next_permutation(rest.begin(), rest.end()));
  return best;
}

// Percentage excess over the optimum, clamped at 0. Tour lengths may fall
// below the optimum by relative float noise of 1e-9.
inline double peo(double tour_length, double opt_length) {
  if (!(opt_length > 0))
    throw DomainError("peo: optimum length must be positive (all cities coincide?)");
  if (tour_length < opt_length * (1.0 - 1e-9))
    throw DomainError("peo: tour length " + std::to_string(tour_length) +
                      " is below the optimum " + std::to_string(opt_length));
  return std::max(0.0, (tour_length - opt_length) / opt_length * 100.0);
}

}  // namespace liangyi
