#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <mutex>
#include <string>

#include "json.hpp"
#include "liangyi/errors.hpp"
#include "liangyi/oracle/exact.hpp"
#include "liangyi/tsp/instance.hpp"

namespace liangyi {

enum class OptimumMethod { held_karp, brute_force, external };

inline const char* to_string(OptimumMethod m) {
  switch (m) {
    case OptimumMethod::held_karp: return "held_karp";
    case OptimumMethod::brute_force: return "brute_force";
    case OptimumMethod::external: return "external";
  }
  return "?";
}

struct OptimumRecord {
  InstanceId id = 0;
  double length = 0.0;
  OptimumMethod method = OptimumMethod::held_karp;
};

// Run-local memo of optima keyed by instance id. Each optimum is computed
// once; concurrent callers for the same id wait on the first computation.
class OptimumStore {
 public:
  explicit OptimumStore(int n_max = kDefaultHeldKarpMax) : n_max_(n_max) {}

  OptimumRecord get(const TspInstance& ins) {
    const std::uint64_t fp = ins.fingerprint();
    std::promise<OptimumRecord> promise;
    std::shared_future<OptimumRecord> future;
    bool owner = false;
    {
      std::lock_guard lock(mutex_);
      auto it = entries_.find(ins.id);
      if (it != entries_.end()) {
        if (it->second.fingerprint != 0 && it->second.fingerprint != fp)
          throw IntegrityError("optimum store: instance id " + std::to_string(ins.id) +
                               " reused for different coordinates");
        future = it->second.result;
      } else {
        future = promise.get_future().share();
        entries_.emplace(ins.id, Entry{fp, future});
        owner = true;
      }
    }
    if (owner) {
      try {
        if (ins.degenerate())
          throw DomainError("instance " + std::to_string(ins.id) + " has all cities coincident");
        promise.set_value(OptimumRecord{ins.id, held_karp_opt(ins, n_max_), OptimumMethod::held_karp});
        ++computed_;
      } catch (...) {
        promise.set_exception(std::current_exception());
        std::lock_guard lock(mutex_);
        entries_.erase(ins.id);
      }
    }
    return future.get();
  }

  // Optimum from an external solver. The fingerprint check is skipped for
  // imported ids since the import file carries no coordinates.
  void put_external(InstanceId id, double length) {
    std::promise<OptimumRecord> promise;
    promise.set_value(OptimumRecord{id, length, OptimumMethod::external});
    std::lock_guard lock(mutex_);
    entries_.insert_or_assign(id, Entry{0, promise.get_future().share()});
  }

  // Import file: JSON object mapping instance id (as string) to length.
  void import_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open optima file " + path.string());
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    if (!doc.is_object()) throw ParseError(path.string() + ": expected an object id -> length");
    for (auto& [key, value] : doc.items()) {
      if (!value.is_number() || !(value.get<double>() > 0))
        throw ParseError(path.string() + ": optimum for '" + key + "' must be a positive number");
      InstanceId id;
      try {
        id = std::stoull(key);
      } catch (const std::exception&) {
        throw ParseError(path.string() + ": key '" + key + "' is not an instance id");
      }
      put_external(id, value.get<double>());
    }
  }

  // Snapshot of settled entries (for checkpoints).
  nlohmann::json to_json() const {
    nlohmann::json out = nlohmann::json::array();
    std::lock_guard lock(mutex_);
    for (const auto& [id, entry] : entries_) {
      if (entry.result.wait_for(std::chrono::seconds(0)) != std::future_status::ready) continue;
      try {
        const OptimumRecord rec = entry.result.get();
        out.push_back({{"id", id}, {"fingerprint", entry.fingerprint}, {"length", rec.length},
                       {"method", to_string(rec.method)}});
      } catch (...) {
      }
    }
    return out;
  }

  void load_json(const nlohmann::json& arr) {
    std::lock_guard lock(mutex_);
    for (const auto& e : arr) {
      std::promise<OptimumRecord> promise;
      const std::string method = e.at("method").get<std::string>();
      promise.set_value(OptimumRecord{
          e.at("id").get<InstanceId>(), e.at("length").get<double>(),
          method == "external" ? OptimumMethod::external : OptimumMethod::held_karp});
      entries_.insert_or_assign(e.at("id").get<InstanceId>(),
                                Entry{e.at("fingerprint").get<std::uint64_t>(),
                                      promise.get_future().share()});
    }
  }

  int n_max() const { return n_max_; }
  long long exact_solves() const { return computed_.load(); }

 private:
  struct Entry {
    std::uint64_t fingerprint;
    std::shared_future<OptimumRecord> result;
  };
  int n_max_;
  mutable std::mutex mutex_;
  std::map<InstanceId, Entry> entries_;
  std::atomic<long long> computed_{0};
};

}  // namespace liangyi
