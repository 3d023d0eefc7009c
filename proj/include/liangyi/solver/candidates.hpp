#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <vector>

#include "liangyi/errors.hpp"
#include "liangyi/tsp/instance.hpp"

namespace liangyi {

inline constexpr int kCandidateListSize = 8;

// k nearest neighbours of every city, ordered by (distance, index).
struct CandidateLists {
  std::vector<std::vector<int>> near;

  static CandidateLists build(const TspInstance& ins, int k = kCandidateListSize) {
    const int n = ins.n();
    k = std::min(k, n - 1);
    CandidateLists lists;
    lists.near.resize(n);
    std::vector<int> others(n);
    for (int c = 0; c < n; ++c) {
      others.resize(n);
      std::iota(others.begin(), others.end(), 0);
      others.erase(others.begin() + c);
      std::partial_sort(others.begin(), others.begin() + k, others.end(), [&](int a, int b) {
        const double da = ins.dist(c, a), db = ins.dist(c, b);
        return da < db || (da == db && a < b);
      });
      lists.near[c].assign(others.begin(), others.begin() + k);
    }
    return lists;
  }
};

// Per-instance candidate lists shared across solver calls. Entries are built
// once and then only read.
class CandidateCache {
 public:
  std::shared_ptr<const CandidateLists> get(const TspInstance& ins) {
    const std::uint64_t fp = ins.fingerprint();
    {
      std::lock_guard lock(mutex_);
      auto it = entries_.find(ins.id);
      if (it != entries_.end()) {
        if (it->second.fingerprint != fp)
          throw IntegrityError("candidate cache: instance id " + std::to_string(ins.id) +
                               " reused for different coordinates");
        return it->second.lists;
      }
    }
    auto built = std::make_shared<const CandidateLists>(CandidateLists::build(ins));
    std::lock_guard lock(mutex_);
    auto [it, inserted] = entries_.try_emplace(ins.id, Entry{fp, built});
    return it->second.lists;
  }

 private:
  struct Entry {
    std::uint64_t fingerprint;
    std::shared_ptr<const CandidateLists> lists;
  };
  std::mutex mutex_;
  std::map<InstanceId, Entry> entries_;
};

}  // namespace liangyi
