#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "liangyi/coevo/memory.hpp"
#include "liangyi/errors.hpp"
#include "liangyi/metrics/matrix.hpp"

namespace liangyi {

// Performance loss of the portfolio when `member_row` is dropped:
// |P(AP, IP) - P(AP \ {alg}, IP)| for a multi-member portfolio and
// alpha * |P(AP, IP)| when the member is alone.
template <typename Aggr = MeanAggregate>
double contribution(const PerformanceMatrix& m, std::size_t member_row, double alpha,
                    Aggr aggr = {}) {
  if (member_row >= m.num_rows())
    throw StructuralError("contribution: member row " + std::to_string(member_row) +
                          " not in a portfolio of " + std::to_string(m.num_rows()));
  const double whole = portfolio_performance(m, aggr);
  if (m.num_rows() == 1) return alpha * std::abs(whole);
  return std::abs(whole - portfolio_performance(m.without_row(member_row), aggr));
}

template <typename Aggr = MeanAggregate>
double contribution_of(const PerformanceMatrix& m, AlgorithmId member, double alpha,
                       Aggr aggr = {}) {
  const auto& ids = m.row_ids();
  auto it = std::find(ids.begin(), ids.end(), member);
  if (it == ids.end())
    throw StructuralError("contribution: algorithm " + std::to_string(member) + " not in portfolio");
  return contribution(m, static_cast<std::size_t>(it - ids.begin()), alpha, aggr);
}

struct FitnessParts {
  std::vector<double> historical;  // contributions on IP_j .. IP_{k-1}
  double current = 0.0;            // contribution on IP_k
  double fitness = 0.0;
};

// Fitness of member `row` of the temporary population AP'_k. For every past
// cycle r in [j, k-1] (j = the member's birth cycle) the virtual population
// holds the members of AP'_k born no later than r, i.e. with age >= k - r;
// their rows on IP_r come from memory. The result is
// (beta * sum(historical) + current) / (k - j + 1).
template <typename Aggr = MeanAggregate>
FitnessParts fitness_parts(std::size_t row, std::span<const Member> ap_prime,
                           const PerformanceMatrix& current, const CycleMemory& memory, int k,
                           double alpha, double beta, Aggr aggr = {}) {
  if (row >= ap_prime.size()) throw StructuralError("fitness_alg: member index out of range");
  if (current.num_rows() != ap_prime.size())
    throw StructuralError("fitness_alg: matrix rows do not match the population");
  const Member& self = ap_prime[row];
  const int j = self.birth_cycle;
  if (j < 1 || j > k)
    throw IntegrityError("fitness_alg: birth cycle " + std::to_string(j) + " outside [1, " +
                         std::to_string(k) + "]");

  FitnessParts parts;
  for (int r = j; r < k; ++r) {
    const CycleRecord& rec = memory.at(r);
    std::vector<AlgorithmId> ids;
    std::vector<double> data;
    std::size_t self_row = 0;
    for (const Member& m : ap_prime) {
      if (m.birth_cycle > r) continue;
      if (m.id == self.id) self_row = ids.size();
      ids.push_back(m.id);
      auto values = memory.row_of(r, m.id);
      data.insert(data.end(), values.begin(), values.end());
    }
    const PerformanceMatrix virtual_m(std::move(ids), rec.matrix.col_ids(), std::move(data));
    parts.historical.push_back(contribution(virtual_m, self_row, alpha, aggr));
  }
  parts.current = contribution(current, row, alpha, aggr);
  double hist = 0.0;
  for (double h : parts.historical) hist += h;
  parts.fitness = (beta * hist + parts.current) / static_cast<double>(k - j + 1);
  return parts;
}

template <typename Aggr = MeanAggregate>
double fitness_alg(std::size_t row, std::span<const Member> ap_prime,
                   const PerformanceMatrix& current, const CycleMemory& memory, int k, double alpha,
                   double beta, Aggr aggr = {}) {
  return fitness_parts(row, ap_prime, current, memory, k, alpha, beta, aggr).fitness;
}

struct RemoveWorstResult {
  std::vector<Member> ap;
  PerformanceMatrix matrix;
  std::size_t removed_index = 0;
  Member removed;
  std::vector<double> fitness;
};

// Drops the lowest-fitness member of AP'_k and its row. Ties go to the
// youngest member (largest birth cycle), then to the highest row index.
template <typename Aggr = MeanAggregate>
RemoveWorstResult remove_worst(std::span<const Member> ap_prime, const PerformanceMatrix& m_prime,
                               const CycleMemory& memory, int k, double alpha, double beta,
                               std::size_t n_ap, Aggr aggr = {}) {
  if (ap_prime.size() != n_ap + 1)
    throw StructuralError("remove_worst: expected " + std::to_string(n_ap + 1) +
                          " members, got " + std::to_string(ap_prime.size()));
  if (m_prime.num_rows() != ap_prime.size())
    throw StructuralError("remove_worst: matrix rows do not match the population");
  for (std::size_t i = 0; i < ap_prime.size(); ++i)
    if (m_prime.row_ids()[i] != ap_prime[i].id)
      throw StructuralError("remove_worst: matrix rows are not aligned with the population");

  RemoveWorstResult out;
  for (std::size_t i = 0; i < ap_prime.size(); ++i)
    out.fitness.push_back(fitness_alg(i, ap_prime, m_prime, memory, k, alpha, beta, aggr));

  std::size_t worst = 0;
  for (std::size_t i = 1; i < ap_prime.size(); ++i) {
    const double f = out.fitness[i], fw = out.fitness[worst];
    if (f < fw || (f == fw && ap_prime[i].birth_cycle >= ap_prime[worst].birth_cycle)) worst = i;
  }
  out.removed_index = worst;
  out.removed = ap_prime[worst];
  for (std::size_t i = 0; i < ap_prime.size(); ++i)
    if (i != worst) out.ap.push_back(ap_prime[i]);
  out.matrix = m_prime.without_row(worst);
  return out;
}

}  // namespace liangyi
