#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "liangyi/tsp/instance.hpp"

namespace liangyi {

struct Tour {
  std::vector<int> order;
  double length = 0.0;

  friend bool operator==(const Tour&, const Tour&) = default;
};

// Cycle length summed in tour order, closing edge last.
inline double tour_length(const TspInstance& ins, const std::vector<int>& order) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) total += ins.dist(order[i], order[i + 1]);
  if (!order.empty()) total += ins.dist(order.back(), order.front());
  return total;
}

inline bool is_permutation_of_cities(const std::vector<int>& order, int n) {
  if (static_cast<int>(order.size()) != n) return false;
  std::vector<char> seen(n, 0);
  for (int c : order) {
    if (c < 0 || c >= n || seen[c]) return false;
    seen[c] = 1;
  }
  return true;
}

inline bool tour_is_valid(const TspInstance& ins, const Tour& tour) {
  if (!is_permutation_of_cities(tour.order, ins.n())) return false;
  const double recomputed = tour_length(ins, tour.order);
  return std::abs(recomputed - tour.length) <= 1e-9 * std::max(1.0, recomputed);
}

}  // namespace liangyi
