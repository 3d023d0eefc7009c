#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <future>
#include <map>
#include <mutex>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "liangyi/errors.hpp"
#include "liangyi/metrics/matrix.hpp"
#include "liangyi/oracle/optimum_store.hpp"
#include "liangyi/solver/clk.hpp"
#include "liangyi/tsp/instance.hpp"

namespace liangyi {

// How a single (configuration, instance) pair is scored: run the solver
// under `budget` with the global `solver_seed` and call it applicable when
// its PEO is at most `theta` percent.
struct MetricSpec {
  Budget budget = Budget::of_steps(150);
  double theta = 0.05;
  std::uint64_t solver_seed = 0;

  void validate() const {
    budget.validate();
    if (!(theta > 0)) throw ValidationError("metric: theta must be positive");
  }

  friend bool operator==(const MetricSpec&, const MetricSpec&) = default;
};

// Scores configurations on instances with a compute-once memo keyed by
// (configuration, instance id). Matrix fills may run on several workers;
// every cell is written by index, so the worker count never changes results.
class Evaluator {
 public:
  Evaluator(MetricSpec spec, OptimumStore& oracle, int workers = 1, bool memoize = true)
      : spec_(spec), oracle_(oracle), workers_(std::max(1, workers)), memoize_(memoize) {
    spec_.validate();
  }

  const MetricSpec& spec() const { return spec_; }
  OptimumStore& oracle() { return oracle_; }
  int workers() const { return workers_; }
  void set_workers(int w) { workers_ = std::max(1, w); }

  // PEO of the solver's best tour. Memoized.
  double peo_of(const SolverConfig& cfg, const TspInstance& ins) {
    if (!memoize_) return run(cfg, ins);
    const Key key{cfg.rank(), ins.id};
    const std::uint64_t fp = ins.fingerprint();
    std::promise<double> promise;
    std::shared_future<double> future;
    bool owner = false;
    {
      std::lock_guard lock(mutex_);
      auto it = memo_.find(key);
      if (it != memo_.end()) {
        if (it->second.fingerprint != fp)
          throw IntegrityError("evaluator memo: instance id " + std::to_string(ins.id) +
                               " reused for different coordinates");
        future = it->second.peo;
      } else {
        future = promise.get_future().share();
        memo_.emplace(key, Entry{fp, future});
        owner = true;
      }
    }
    if (owner) {
      try {
        promise.set_value(run(cfg, ins));
      } catch (...) {
        promise.set_exception(std::current_exception());
        std::lock_guard lock(mutex_);
        memo_.erase(key);
      }
    }
    return future.get();
  }

  // P(alg, ins): 1 when applicable, else 0.
  double perf_alg_instance(const SolverConfig& cfg, const TspInstance& ins) {
    return peo_of(cfg, ins) <= spec_.theta ? 1.0 : 0.0;
  }

  // P(AP, ins) = max over members.
  double perf_ap_instance(std::span<const SolverConfig> ap, const TspInstance& ins) {
    if (ap.empty()) throw StructuralError("perf_ap_instance: empty portfolio");
    double best = 0.0;
    for (std::size_t i = 0; i < ap.size(); ++i) {
      const double v = perf_alg_instance(ap[i], ins);
      best = i == 0 ? v : std::max(best, v);
    }
    return best;
  }

  // P(AP, IP) = Aggr over instances of P(AP, ins).
  template <typename Aggr = MeanAggregate>
  double perf_ap_set(std::span<const SolverConfig> ap, std::span<const TspInstance> ip,
                     Aggr aggr = {}) {
    if (ap.empty()) throw StructuralError("perf_ap_set: empty portfolio");
    if (ip.empty()) throw StructuralError("perf_ap_set: empty instance set");
    std::vector<double> per_instance;
    per_instance.reserve(ip.size());
    for (const TspInstance& ins : ip) per_instance.push_back(perf_ap_instance(ap, ins));
    return aggr(per_instance);
  }

  PerformanceMatrix evaluate_matrix(std::span<const Member> ap, std::span<const TspInstance> ip) {
    std::vector<AlgorithmId> rows;
    for (const Member& m : ap) rows.push_back(m.id);
    std::vector<InstanceId> cols;
    for (const TspInstance& ins : ip) cols.push_back(ins.id);
    PerformanceMatrix out(std::move(rows), std::move(cols));
    const std::size_t cells = ap.size() * ip.size();
    parallel_for(cells, [&](std::size_t cell) {
      const std::size_t r = cell / ip.size(), c = cell % ip.size();
      out.at(r, c) = perf_alg_instance(ap[r].config, ip[c]);
    });
    return out;
  }

  // Best PEO of a portfolio on one instance.
  double portfolio_peo(std::span<const SolverConfig> ap, const TspInstance& ins) {
    if (ap.empty()) throw StructuralError("portfolio_peo: empty portfolio");
    double best = peo_of(ap[0], ins);
    for (std::size_t i = 1; i < ap.size(); ++i) best = std::min(best, peo_of(ap[i], ins));
    return best;
  }

  // Fills optima and memo entries for every pair concurrently.
  void prefetch(std::span<const SolverConfig> ap, std::span<const TspInstance> ip) {
    parallel_for(ap.size() * ip.size(), [&](std::size_t cell) {
      peo_of(ap[cell / ip.size()], ip[cell % ip.size()]);
    });
  }

  // Number of solver invocations so far (memo misses).
  long long solver_runs() const { return runs_.load(); }

  nlohmann::json memo_to_json() const {
    nlohmann::json out = nlohmann::json::array();
    std::lock_guard lock(mutex_);
    for (const auto& [key, entry] : memo_) {
      if (entry.peo.wait_for(std::chrono::seconds(0)) != std::future_status::ready) continue;
      try {
        out.push_back({key.rank, key.id, entry.fingerprint, entry.peo.get()});
      } catch (...) {
      }
    }
    return out;
  }

  void memo_load_json(const nlohmann::json& arr, long long runs) {
    std::lock_guard lock(mutex_);
    for (const auto& e : arr) {
      std::promise<double> promise;
      promise.set_value(e.at(3).get<double>());
      memo_.insert_or_assign(Key{e.at(0).get<int>(), e.at(1).get<InstanceId>()},
                             Entry{e.at(2).get<std::uint64_t>(), promise.get_future().share()});
    }
    runs_ = runs;
  }

 private:
  struct Key {
    int rank;
    InstanceId id;
    friend auto operator<=>(const Key&, const Key&) = default;
  };
  struct Entry {
    std::uint64_t fingerprint;
    std::shared_future<double> peo;
  };

  double run(const SolverConfig& cfg, const TspInstance& ins) {
    const double opt = oracle_.get(ins).length;
    auto cands = candidates_.get(ins);
    const Tour tour = solve(cfg, ins, spec_.solver_seed, spec_.budget, *cands);
    ++runs_;
    return peo(tour.length, opt);
  }

  template <typename Fn>
  void parallel_for(std::size_t count, Fn&& fn) {
    const std::size_t threads = std::min<std::size_t>(workers_, count);
    if (threads <= 1) {
      for (std::size_t i = 0; i < count; ++i) fn(i);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  MetricSpec spec_;
  OptimumStore& oracle_;
  int workers_;
  bool memoize_;
  CandidateCache candidates_;
  mutable std::mutex mutex_;
  std::map<Key, Entry> memo_;
  std::atomic<long long> runs_{0};
};

}  // namespace liangyi
