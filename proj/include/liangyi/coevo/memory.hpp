#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "liangyi/errors.hpp"
#include "liangyi/metrics/matrix.hpp"
#include "liangyi/tsp/instance.hpp"

namespace liangyi {

// Final state of one EvolveAlg phase: the algorithm population, its matrix
// on that cycle's instance population, and the instances themselves.
struct CycleRecord {
  int cycle = 0;
  std::vector<Member> ap;
  PerformanceMatrix matrix;
  std::vector<TspInstance> ip;
};

// Cross-cycle cache. Only what the procedures recorded is stored; nothing is
// re-tested retroactively.
class CycleMemory {
 public:
  void add(CycleRecord record) {
    if (record.cycle != static_cast<int>(records_.size()) + 1)
      throw IntegrityError("memory: expected record for cycle " +
                           std::to_string(records_.size() + 1) + ", got " +
                           std::to_string(record.cycle));
    if (record.matrix.num_rows() != record.ap.size() || record.matrix.num_cols() != record.ip.size())
      throw IntegrityError("memory: matrix dimensions do not match the stored populations");
    for (std::size_t r = 0; r < record.ap.size(); ++r) {
      if (record.matrix.row_ids()[r] != record.ap[r].id)
        throw IntegrityError("memory: matrix rows are not aligned with the population");
      if (record.ap[r].birth_cycle < 1 || record.ap[r].birth_cycle > record.cycle)
        throw IntegrityError("memory: member birth cycle outside [1, k]");
    }
    for (std::size_t c = 0; c < record.ip.size(); ++c)
      if (record.matrix.col_ids()[c] != record.ip[c].id)
        throw IntegrityError("memory: matrix columns are not aligned with the instances");
    records_.push_back(std::move(record));
  }

  int cycles() const { return static_cast<int>(records_.size()); }
  const std::vector<CycleRecord>& records() const { return records_; }

  const CycleRecord& at(int cycle) const {
    if (cycle < 1 || cycle > cycles())
      throw IntegrityError("memory: no record for cycle " + std::to_string(cycle));
    return records_[cycle - 1];
  }

  // Row of algorithm `id` on IP_cycle, cross-checked against the stored ids.
  std::span<const double> row_of(int cycle, AlgorithmId id) const {
    const CycleRecord& rec = at(cycle);
    const auto& ids = rec.matrix.row_ids();
    auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end())
      throw IntegrityError("memory: algorithm " + std::to_string(id) +
                           " has no recorded row in cycle " + std::to_string(cycle));
    return rec.matrix.row(static_cast<std::size_t>(it - ids.begin()));
  }

 private:
  std::vector<CycleRecord> records_;
};

}  // namespace liangyi
