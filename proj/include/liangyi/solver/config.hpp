#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "liangyi/errors.hpp"
#include "liangyi/random.hpp"

namespace liangyi {

// Candidate-value counts of the five solver parameters, in gene order:
// initialization, perturbation, search depth, search width, backtracking.
inline constexpr std::array<int, 5> kGeneCardinality{4, 4, 6, 8, 14};
inline constexpr int kConfigSpaceSize = 4 * 4 * 6 * 8 * 14;

enum class InitStrategy : int { random_permutation, nearest_neighbor, greedy_edge, space_filling_curve };
enum class Perturbation : int { double_bridge, segment_reversal, three_city_exchange, segment_double_bridge };

// One point of the configuration space, stored as five gene indices.
struct SolverConfig {
  std::array<int, 5> genes{};

  static SolverConfig from_genes(std::array<int, 5> g) {
    SolverConfig c{g};
    c.validate();
    return c;
  }

  InitStrategy init() const { return static_cast<InitStrategy>(genes[0]); }
  Perturbation perturbation() const { return static_cast<Perturbation>(genes[1]); }
  // Maximum number of sequential exchanges per improving move: 2..7.
  int search_depth() const { return genes[2] + 2; }
  // Neighbours scanned per exchange step: 1..8.
  int search_width() const { return genes[3] + 1; }
  int backtrack_index() const { return genes[4]; }

  void validate() const {
    for (std::size_t i = 0; i < genes.size(); ++i)
      if (genes[i] < 0 || genes[i] >= kGeneCardinality[i])
        throw ValidationError("solver config gene " + std::to_string(i) + " = " +
                              std::to_string(genes[i]) + " outside [0, " +
                              std::to_string(kGeneCardinality[i]) + ")");
  }

  // Position in the lexicographic enumeration of the space.
  int rank() const {
    int r = 0;
    for (std::size_t i = 0; i < genes.size(); ++i) r = r * kGeneCardinality[i] + genes[i];
    return r;
  }

  static SolverConfig from_rank(int r) {
    SolverConfig c;
    for (int i = static_cast<int>(c.genes.size()) - 1; i >= 0; --i) {
      c.genes[i] = r % kGeneCardinality[i];
      r /= kGeneCardinality[i];
    }
    return c;
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < genes.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(genes[i]);
    }
    return s;
  }

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
  friend auto operator<=>(const SolverConfig&, const SolverConfig&) = default;
};

// Breadth of the alternatives retried at the first levels of the exchange
// search; levels past the end of a vector take only the best alternative.
inline const std::vector<int>& backtrack_breadths(int index) {
  static const std::array<std::vector<int>, 14> table{{
      {1}, {2}, {3}, {2, 1}, {3, 1}, {2, 2}, {3, 2},
      {4, 2}, {2, 2, 1}, {3, 2, 1}, {3, 3, 1}, {4, 3, 1}, {3, 2, 2}, {4, 3, 2},
  }};
  return table.at(static_cast<std::size_t>(index));
}

inline std::vector<SolverConfig> enumerate_config_space() {
  std::vector<SolverConfig> all;
  all.reserve(kConfigSpaceSize);
  for (int r = 0; r < kConfigSpaceSize; ++r) all.push_back(SolverConfig::from_rank(r));
  return all;
}

inline SolverConfig random_config(Rng& rng) {
  SolverConfig c;
  for (std::size_t i = 0; i < c.genes.size(); ++i)
    c.genes[i] = static_cast<int>(uniform_below(rng, kGeneCardinality[i]));
  return c;
}

// Gene-wise uniform crossover (applied with probability cro) followed by
// uniform mutation at per-gene rate mu; returns the first offspring.
inline SolverConfig vary_config(const SolverConfig& first, const SolverConfig& second, double cro,
                                double mu, Rng& rng) {
  SolverConfig child = first;
  if (bernoulli(rng, cro)) {
    for (std::size_t i = 0; i < child.genes.size(); ++i)
      if (bernoulli(rng, 0.5)) child.genes[i] = second.genes[i];
  }
  for (std::size_t i = 0; i < child.genes.size(); ++i)
    if (bernoulli(rng, mu))
      child.genes[i] = static_cast<int>(uniform_below(rng, kGeneCardinality[i]));
  return child;
}

}  // namespace liangyi
