#pragma once

// Fixtures and independent straight-line reimplementations used as oracles
// by both the unit tests and the acceptance binary. The dual versions work on
// plain nested vectors and never call into the library's matrix code.

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "liangyi/coevo/fitness.hpp"
#include "liangyi/coevo/memory.hpp"
#include "liangyi/metrics/matrix.hpp"
#include "liangyi/random.hpp"
#include "liangyi/tsp/instance.hpp"

namespace liangyi::testing {

using Rows = std::vector<std::vector<double>>;

inline double dual_perf_set(const Rows& rows) {
  const std::size_t cols = rows.at(0).size();
  double sum = 0.0;
  for (std::size_t c = 0; c < cols; ++c) {
    double best = rows[0][c];
    for (std::size_t r = 1; r < rows.size(); ++r)
      if (rows[r][c] > best) best = rows[r][c];
    sum += best;
  }
  return sum / static_cast<double>(cols);
}

inline double dual_perf_instance(const std::vector<double>& member_values) {
  double best = member_values.at(0);
  for (double v : member_values) best = v > best ? v : best;
  return best;
}

inline double dual_contribution(const Rows& rows, std::size_t idx, double alpha) {
  const double whole = dual_perf_set(rows);
  if (rows.size() == 1) return alpha * std::fabs(whole);
  Rows rest;
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (r != idx) rest.push_back(rows[r]);
  return std::fabs(whole - dual_perf_set(rest));
}

// A randomized RemoveWorst situation in cycle k: the temporary population
// (last member is the offspring, born in k), its current rows, and the rows
// every cycle r < k recorded for the members alive at the end of r.
struct FitnessFixture {
  int k = 1;
  std::vector<AlgorithmId> ids;
  std::vector<int> births;
  Rows current;
  // history[r][id] = row of id on IP_r; only ids with birth <= r appear, plus
  // extra members that were later removed.
  std::map<int, std::map<AlgorithmId, std::vector<double>>> history;
  std::map<int, int> cols;
  double alpha = 2.0;
  double beta = 2.0;
};

inline double random_value(Rng& rng, bool binary) {
  return binary ? static_cast<double>(uniform_below(rng, 2)) : uniform01(rng);
}

inline FitnessFixture random_fitness_fixture(Rng& rng) {
  FitnessFixture f;
  f.k = uniform_int(rng, 1, 4);
  const int n_ap = uniform_int(rng, 1, 5);
  const bool binary = bernoulli(rng, 0.7);
  f.alpha = 0.5 + 3.0 * uniform01(rng);
  f.beta = 3.0 * uniform01(rng);
  AlgorithmId next = 1;
  for (int i = 0; i < n_ap; ++i) {
    f.ids.push_back(next++);
    f.births.push_back(uniform_int(rng, 1, f.k));
  }
  f.ids.push_back(next++);
  f.births.push_back(f.k);
  const int cols_k = uniform_int(rng, 1, 8);
  for (std::size_t i = 0; i < f.ids.size(); ++i) {
    std::vector<double> row;
    for (int c = 0; c < cols_k; ++c) row.push_back(random_value(rng, binary));
    f.current.push_back(row);
  }
  for (int r = 1; r < f.k; ++r) {
    const int cols = uniform_int(rng, 1, 8);
    f.cols[r] = cols;
    auto& rec = f.history[r];
    for (std::size_t i = 0; i < f.ids.size(); ++i)
      if (f.births[i] <= r) {
        std::vector<double> row;
        for (int c = 0; c < cols; ++c) row.push_back(random_value(rng, binary));
        rec[f.ids[i]] = row;
      }
    const int extra = uniform_int(rng, 0, 2);
    for (int e = 0; e < extra || rec.empty(); ++e) {
      std::vector<double> row;
      for (int c = 0; c < cols; ++c) row.push_back(random_value(rng, binary));
      rec[1000 + next++] = row;
    }
  }
  return f;
}

inline std::vector<Member> fixture_members(const FitnessFixture& f) {
  std::vector<Member> out;
  for (std::size_t i = 0; i < f.ids.size(); ++i)
    out.push_back(Member{f.ids[i], SolverConfig::from_rank(static_cast<int>(i)), f.births[i]});
  return out;
}

inline PerformanceMatrix fixture_matrix(const FitnessFixture& f) {
  std::vector<double> data;
  for (const auto& row : f.current) data.insert(data.end(), row.begin(), row.end());
  const int cols = static_cast<int>(f.current.at(0).size());
  std::vector<InstanceId> col_ids;
  for (int c = 0; c < cols; ++c) col_ids.push_back(static_cast<InstanceId>(9000 + c));
  return PerformanceMatrix(f.ids, col_ids, data);
}

inline TspInstance dummy_instance(InstanceId id) {
  TspInstance ins;
  ins.id = id;
  ins.grid = 100;
  ins.cities = {{0, 0}, {0, 1}, {1, 1}, {1, 0}};
  return ins;
}

inline CycleMemory fixture_memory(const FitnessFixture& f) {
  CycleMemory mem;
  for (int r = 1; r < f.k; ++r) {
    CycleRecord rec;
    rec.cycle = r;
    std::vector<AlgorithmId> ids;
    std::vector<double> data;
    for (const auto& [id, row] : f.history.at(r)) {
      ids.push_back(id);
      data.insert(data.end(), row.begin(), row.end());
      int birth = 1;
      for (std::size_t i = 0; i < f.ids.size(); ++i)
        if (f.ids[i] == id) birth = f.births[i];
      rec.ap.push_back(Member{id, SolverConfig{}, std::min(birth, r)});
    }
    std::vector<InstanceId> cols;
    for (int c = 0; c < f.cols.at(r); ++c) {
      cols.push_back(static_cast<InstanceId>(r * 100 + c));
      rec.ip.push_back(dummy_instance(cols.back()));
    }
    rec.matrix = PerformanceMatrix(ids, cols, data);
    mem.add(std::move(rec));
  }
  return mem;
}

// Eq. (5) written out directly from the fixture tables.
inline double dual_fitness(const FitnessFixture& f, std::size_t idx) {
  const int j = f.births[idx];
  double hist = 0.0;
  for (int r = j; r <= f.k - 1; ++r) {
    Rows virt;
    std::size_t self = 0;
    for (std::size_t i = 0; i < f.ids.size(); ++i) {
      const int age = f.k - f.births[i];
      if (age >= f.k - r) {
        if (i == idx) self = virt.size();
        virt.push_back(f.history.at(r).at(f.ids[i]));
      }
    }
    hist += dual_contribution(virt, self, f.alpha);
  }
  const double cur = dual_contribution(f.current, idx, f.alpha);
  return (f.beta * hist + cur) / static_cast<double>(f.k - j + 1);
}

inline std::size_t dual_remove_worst(const FitnessFixture& f) {
  std::vector<double> fit;
  for (std::size_t i = 0; i < f.ids.size(); ++i) fit.push_back(dual_fitness(f, i));
  const double lo = *std::min_element(fit.begin(), fit.end());
  int youngest_birth = 0;
  for (std::size_t i = 0; i < fit.size(); ++i)
    if (fit[i] == lo) youngest_birth = std::max(youngest_birth, f.births[i]);
  std::size_t pick = 0;
  for (std::size_t i = 0; i < fit.size(); ++i)
    if (fit[i] == lo && f.births[i] == youngest_birth) pick = i;
  return pick;
}

inline TspInstance random_instance(Rng& rng, int n, std::int64_t grid, InstanceId id) {
  return gen_usable_instance(InstanceSpace{n, grid}, rng, id);
}

inline PerformanceMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, bool binary) {
  std::vector<AlgorithmId> r;
  std::vector<InstanceId> c;
  for (std::size_t i = 0; i < rows; ++i) r.push_back(i + 1);
  for (std::size_t i = 0; i < cols; ++i) c.push_back(i + 1);
  std::vector<double> data;
  for (std::size_t i = 0; i < rows * cols; ++i) data.push_back(random_value(rng, binary));
  return PerformanceMatrix(r, c, data);
}

inline Rows rows_of(const PerformanceMatrix& m) {
  Rows out;
  for (std::size_t r = 0; r < m.num_rows(); ++r) out.emplace_back(m.row(r).begin(), m.row(r).end());
  return out;
}

}  // namespace liangyi::testing
