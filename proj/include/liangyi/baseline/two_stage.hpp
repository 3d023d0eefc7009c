#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "liangyi/coevo/event_log.hpp"
#include "liangyi/coevo/run.hpp"
#include "liangyi/errors.hpp"
#include "liangyi/metrics/evaluator.hpp"
#include "liangyi/random.hpp"
#include "liangyi/solver/config.hpp"

namespace liangyi {

enum class SearchStrategy { random_search, local_search_on_genes };

inline const char* to_string(SearchStrategy s) {
  return s == SearchStrategy::random_search ? "random_search" : "local_search_on_genes";
}

inline SearchStrategy strategy_from_string(const std::string& s) {
  if (s == "random_search") return SearchStrategy::random_search;
  if (s == "local_search_on_genes") return SearchStrategy::local_search_on_genes;
  throw ValidationError("baseline.strategy: expected random_search or local_search_on_genes, got '" +
                        s + "'");
}

// Fixed-training-set greedy portfolio construction. The per-iteration budget
// counts solver evaluations; a candidate costs one evaluation per training
// instance, so each iteration may try budget / |T| configurations.
struct BaselineConfig {
  std::vector<TspInstance> training;
  int size = 4;
  long long budget_per_iteration = 1000;
  SearchStrategy strategy = SearchStrategy::random_search;
  std::optional<std::vector<SolverConfig>> candidate_pool;

  long long configs_per_iteration() const {
    return training.empty() ? 0 : budget_per_iteration / static_cast<long long>(training.size());
  }

  void validate() const {
    if (training.empty()) throw ValidationError("baseline: training set must be nonempty");
    if (size < 1) throw ValidationError("baseline.size must be >= 1");
    if (budget_per_iteration <= 0) throw ValidationError("baseline: evaluation budget must be > 0");
    if (configs_per_iteration() < 1)
      throw ValidationError("baseline: budget " + std::to_string(budget_per_iteration) +
                            " cannot pay for one configuration on " +
                            std::to_string(training.size()) + " instances");
    if (candidate_pool) {
      if (candidate_pool->empty()) throw ValidationError("baseline: candidate pool is empty");
      if (strategy != SearchStrategy::random_search)
        throw ValidationError("baseline: a candidate pool requires random_search");
    }
  }
};

struct BaselineIteration {
  SolverConfig winner;
  double marginal = 0.0;
  double solo = 0.0;
  double p_after = 0.0;
  long long configs_tried = 0;
  long long evaluations = 0;
};

struct BaselineResult {
  std::vector<SolverConfig> ap;
  std::vector<BaselineIteration> iterations;
  long long evaluations = 0;
};

namespace detail {

struct Candidate {
  SolverConfig cfg;
  double marginal = 0.0;
  double solo = 0.0;
};

// Larger marginal gain, then larger solo applicability, then the
// lexicographically smaller configuration.
inline bool better(const Candidate& a, const Candidate& b) {
  if (a.marginal != b.marginal) return a.marginal > b.marginal;
  if (a.solo != b.solo) return a.solo > b.solo;
  return a.cfg < b.cfg;
}

class CandidateScorer {
 public:
  CandidateScorer(Evaluator& eval, const std::vector<TspInstance>& training,
                  const std::vector<double>& covered)
      : eval_(eval), training_(training), covered_(covered) {
    base_ = mean(covered_);
  }

  Candidate score(const SolverConfig& cfg) {
    const std::vector<Member> single{Member{0, cfg, 1}};
    const PerformanceMatrix row = eval_.evaluate_matrix(single, training_);
    std::vector<double> with(covered_.size());
    for (std::size_t c = 0; c < with.size(); ++c) with[c] = std::max(covered_[c], row.at(0, c));
    return {cfg, mean(with) - base_, mean(row.row(0))};
  }

 private:
  static double mean(std::span<const double> v) { return MeanAggregate{}(v); }

  Evaluator& eval_;
  const std::vector<TspInstance>& training_;
  const std::vector<double>& covered_;
  double base_ = 0.0;
};

}  // namespace detail

// Greedy construction: each iteration searches for the configuration that adds
// the most applicability on the training set and appends it.
inline BaselineResult build_portfolio(const BaselineConfig& bc, Evaluator& eval, Rng& rng,
                                      EventLog* log = nullptr) {
  bc.validate();
  BaselineResult out;
  std::vector<double> covered(bc.training.size(), 0.0);
  const long long start_runs = eval.solver_runs();

  for (int it = 1; it <= bc.size; ++it) {
    const long long runs_before = eval.solver_runs();
    detail::CandidateScorer scorer(eval, bc.training, covered);
    const long long limit = bc.configs_per_iteration();
    std::optional<detail::Candidate> best;
    std::set<int> seen;
    long long tried = 0;
    auto consider = [&](const SolverConfig& cfg) -> std::optional<detail::Candidate> {
      if (tried >= limit) return std::nullopt;
      ++tried;
      seen.insert(cfg.rank());
      detail::Candidate c = scorer.score(cfg);
      if (!best || detail::better(c, *best)) best = c;
      return c;
    };

    if (bc.candidate_pool) {
      std::vector<SolverConfig> pool = *bc.candidate_pool;
      for (std::size_t i = 0; i < pool.size() && tried < limit; ++i) {
        const std::size_t j = i + uniform_below(rng, pool.size() - i);
        std::swap(pool[i], pool[j]);
        consider(pool[i]);
      }
    } else if (bc.strategy == SearchStrategy::random_search) {
      while (tried < limit) consider(random_config(rng));
    } else {
      // First-improvement hill climbing over single-gene changes with random
      // restarts; already-scored configurations cost nothing and are skipped.
      while (tried < limit) {
        SolverConfig start = random_config(rng);
        if (seen.count(start.rank()) && seen.size() < static_cast<std::size_t>(kConfigSpaceSize))
          continue;
        auto current = consider(start);
        if (!current) break;
        bool improved = true;
        while (improved && tried < limit) {
          improved = false;
          std::vector<SolverConfig> neighbours;
          for (std::size_t g = 0; g < current->cfg.genes.size(); ++g)
            for (int v = 0; v < kGeneCardinality[g]; ++v)
              if (v != current->cfg.genes[g]) {
                SolverConfig n = current->cfg;
                n.genes[g] = v;
                neighbours.push_back(n);
              }
          for (std::size_t i = 0; i < neighbours.size(); ++i) {
            const std::size_t j = i + uniform_below(rng, neighbours.size() - i);
            std::swap(neighbours[i], neighbours[j]);
          }
          for (const SolverConfig& n : neighbours) {
            if (seen.count(n.rank())) continue;
            auto c = consider(n);
            if (!c) break;
            if (detail::better(*c, *current)) {
              current = c;
              improved = true;
              break;
            }
          }
        }
      }
    }

    const SolverConfig winner = best->cfg;
    const std::vector<Member> single{Member{0, winner, 1}};
    const PerformanceMatrix row = eval.evaluate_matrix(single, bc.training);
    for (std::size_t c = 0; c < covered.size(); ++c) covered[c] = std::max(covered[c], row.at(0, c));
    out.ap.push_back(winner);
    BaselineIteration rec{winner, best->marginal, best->solo, MeanAggregate{}(covered), tried,
                          eval.solver_runs() - runs_before};
    if (log)
      log->emit({{"event", "baseline_iter"},
                 {"iteration", it},
                 {"winner", winner.genes},
                 {"marginal", rec.marginal},
                 {"solo", rec.solo},
                 {"p", rec.p_after},
                 {"configs_tried", rec.configs_tried},
                 {"evaluations", rec.evaluations}});
    out.iterations.push_back(rec);
  }
  out.evaluations = eval.solver_runs() - start_runs;
  return out;
}

struct ComparisonRow {
  std::uint64_t seed = 0;
  std::string method;
  double applicability = 0.0;
  double mean_peo = 0.0;
  long long evaluations = 0;
};

inline ComparisonRow score_portfolio(std::uint64_t seed, std::string method,
                                     std::span<const SolverConfig> ap,
                                     std::span<const TspInstance> test, Evaluator& eval,
                                     long long evaluations) {
  eval.prefetch(ap, test);
  return {seed, std::move(method), eval.perf_ap_set(ap, test), mean_portfolio_peo(eval, ap, test),
          evaluations};
}

struct Comparison {
  ComparisonRow liangyi;
  ComparisonRow baseline;
  double delta_applicability = 0.0;
  double delta_mean_peo = 0.0;
};

inline Comparison compare_runs(std::uint64_t seed, std::span<const SolverConfig> liangyi_ap,
                               long long liangyi_evals, std::span<const SolverConfig> baseline_ap,
                               long long baseline_evals, const std::string& baseline_name,
                               std::span<const TspInstance> test, Evaluator& eval) {
  Comparison c;
  c.liangyi = score_portfolio(seed, "liangyi", liangyi_ap, test, eval, liangyi_evals);
  c.baseline = score_portfolio(seed, baseline_name, baseline_ap, test, eval, baseline_evals);
  c.delta_applicability = c.liangyi.applicability - c.baseline.applicability;
  c.delta_mean_peo = c.liangyi.mean_peo - c.baseline.mean_peo;
  return c;
}

inline std::string comparison_csv(std::span<const ComparisonRow> rows) {
  std::ostringstream out;
  out.precision(17);
  out << "run_seed,method,applicability,mean_peo,evaluations\n";
  for (const ComparisonRow& r : rows)
    out << r.seed << ',' << r.method << ',' << r.applicability << ',' << r.mean_peo << ','
        << r.evaluations << '\n';
  return out.str();
}

}  // namespace liangyi
