#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "liangyi/coevo/event_log.hpp"
#include "liangyi/coevo/fitness.hpp"
#include "liangyi/coevo/memory.hpp"
#include "liangyi/errors.hpp"
#include "liangyi/metrics/evaluator.hpp"
#include "liangyi/random.hpp"
#include "liangyi/tsp/instance.hpp"
#include "liangyi/tsp/io.hpp"

namespace liangyi {

struct EvolveAlgParams {
  int generations = 60;
  double cro = 0.6;
  double mu = 0.6;
  double alpha = 2.0;
  double beta = 2.0;

  void validate() const {
    if (generations < 0) throw ValidationError("alg.generations must be >= 0");
    if (!(cro >= 0 && cro <= 1)) throw ValidationError("alg.cro must lie in [0, 1]");
    if (!(mu >= 0 && mu <= 1)) throw ValidationError("alg.mu must lie in [0, 1]");
    if (!(alpha > 0)) throw ValidationError("alg.alpha must be > 0");
    if (!(beta >= 0)) throw ValidationError("alg.beta must be >= 0");
  }
};

struct EvolveInsParams {
  int generations = 6;
  double cro = 1.0;
  double mu = 0.8;
  double res = 0.3;
  int tournament = 2;

  // N_IP * res, the number of instances replaced per generation.
  int replacement_count(int n_ip) const {
    const double x = n_ip * res;
    const long long rounded = std::llround(x);
    if (std::abs(x - static_cast<double>(rounded)) > 1e-9 || rounded <= 0 || rounded % 2 != 0)
      throw ValidationError("ins.res: N_IP*res = " + std::to_string(x) +
                            " must be an even positive integer");
    return static_cast<int>(rounded);
  }

  void validate(int n_ip) const {
    if (generations < 0) throw ValidationError("ins.generations must be >= 0");
    if (!(cro >= 0 && cro <= 1)) throw ValidationError("ins.cro must lie in [0, 1]");
    if (!(mu >= 0 && mu <= 1)) throw ValidationError("ins.mu must lie in [0, 1]");
    if (!(res > 0 && res <= 1)) throw ValidationError("ins.res must lie in (0, 1]");
    if (tournament < 1) throw ValidationError("ins.tournament must be >= 1");
    replacement_count(n_ip);
  }
};

inline std::vector<SolverConfig> configs_of(std::span<const Member> ap) {
  std::vector<SolverConfig> out;
  for (const Member& m : ap) out.push_back(m.config);
  return out;
}

inline nlohmann::json ids_of(std::span<const Member> ap) {
  nlohmann::json out = nlohmann::json::array();
  for (const Member& m : ap) out.push_back(m.id);
  return out;
}

inline nlohmann::json ids_of(std::span<const TspInstance> ip) {
  nlohmann::json out = nlohmann::json::array();
  for (const TspInstance& ins : ip) out.push_back(ins.id);
  return out;
}

struct AlgPhaseResult {
  std::vector<Member> ap;
  PerformanceMatrix matrix;
  double p_begin = 0.0;
  double p_end = 0.0;
};

// One EvolveAlg phase in cycle k: AP_G rounds of (two random parents, one
// offspring tested on IP_k, RemoveWorst), then the final AP and matrix go to
// memory.
inline AlgPhaseResult evolve_alg(std::vector<Member> ap, const std::vector<TspInstance>& ip,
                                 const EvolveAlgParams& params, Evaluator& eval,
                                 CycleMemory& memory, int k, Rng& rng, IdSource& alg_ids,
                                 EventLog* log) {
  if (ap.empty()) throw StructuralError("evolve_alg: empty algorithm population");
  if (ip.empty()) throw StructuralError("evolve_alg: empty instance population");
  if (memory.cycles() != k - 1)
    throw IntegrityError("evolve_alg: memory holds " + std::to_string(memory.cycles()) +
                         " cycles at the start of cycle " + std::to_string(k));
  const std::size_t n_ap = ap.size();
  AlgPhaseResult out;
  PerformanceMatrix m = eval.evaluate_matrix(ap, ip);
  out.p_begin = portfolio_performance(m);

  for (int gen = 1; gen <= params.generations; ++gen) {
    std::size_t a = uniform_below(rng, n_ap), b = a;
    if (n_ap > 1) {
      b = uniform_below(rng, n_ap - 1);
      if (b >= a) ++b;
    }
    Member child{alg_ids.next(), vary_config(ap[a].config, ap[b].config, params.cro, params.mu, rng),
                 k};
    const std::vector<Member> single{child};
    std::vector<Member> ap_prime = ap;
    ap_prime.push_back(child);
    const PerformanceMatrix m_prime = concat_rows(m, eval.evaluate_matrix(single, ip));
    RemoveWorstResult rw =
        remove_worst(ap_prime, m_prime, memory, k, params.alpha, params.beta, n_ap);
    ap = std::move(rw.ap);
    m = std::move(rw.matrix);
    if (log)
      log->emit({{"event", "alg_gen"},
                 {"cycle", k},
                 {"gen", gen},
                 {"parents", {ap_prime[a].id, ap_prime[b].id}},
                 {"offspring", member_to_json(child)},
                 {"members", ids_of(ap_prime)},
                 {"fitness", rw.fitness},
                 {"removed", rw.removed.id},
                 {"p", portfolio_performance(m)}});
  }

  out.p_end = portfolio_performance(m);
  memory.add(CycleRecord{k, ap, m, ip});
  if (log) {
    nlohmann::json instances = nlohmann::json::array();
    for (const TspInstance& ins : ip) instances.push_back(instance_to_json(ins));
    log->emit({{"event", "memory"},
               {"cycle", k},
               {"members", members_to_json(ap)},
               {"instances", std::move(instances)},
               {"matrix_csv", m.to_csv()}});
  }
  out.ap = std::move(ap);
  out.matrix = std::move(m);
  return out;
}

// f_IP(ins) = -P(AP, ins): the worse AP does, the fitter the instance.
inline double fitness_ins(std::span<const SolverConfig> ap, const TspInstance& ins,
                          Evaluator& eval) {
  return -eval.perf_ap_instance(ap, ins);
}

inline std::vector<double> instance_fitness(const PerformanceMatrix& m) {
  std::vector<double> f = m.column_max();
  for (double& v : f) v = -v;
  return f;
}

// Survivor selection: keep the `keep` highest-fitness entries. The sort is
// stable, so on ties earlier pool entries (incumbents) survive. Returns the
// kept indices in pool order.
inline std::vector<std::size_t> select_survivors(std::span<const double> fitness, std::size_t keep) {
  std::vector<std::size_t> order(fitness.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return fitness[l] > fitness[r]; });
  order.resize(std::min(keep, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

inline std::size_t tournament_pick(std::span<const double> fitness, int size, Rng& rng) {
  std::size_t best = uniform_below(rng, fitness.size());
  for (int t = 1; t < size; ++t) {
    const std::size_t c = uniform_below(rng, fitness.size());
    if (fitness[c] > fitness[best]) best = c;
  }
  return best;
}

struct InsPhaseResult {
  std::vector<TspInstance> ip;
  PerformanceMatrix matrix;
  double p_begin = 0.0;
  double p_end = 0.0;
};

// One EvolveIns phase: IP_G generations of N_IP*res offspring made by
// tournament selection, crossover and mutation, then removal of the
// N_IP*res pool members AP solves best.
inline InsPhaseResult evolve_ins(std::span<const Member> ap, std::vector<TspInstance> ip,
                                 const EvolveInsParams& params, const InstanceSpace& space,
                                 Evaluator& eval, int k, Rng& rng, IdSource& ins_ids,
                                 EventLog* log) {
  if (ap.empty()) throw StructuralError("evolve_ins: empty algorithm population");
  const std::size_t n_ip = ip.size();
  const int count = params.replacement_count(static_cast<int>(n_ip));
  InsPhaseResult out;
  PerformanceMatrix m = eval.evaluate_matrix(ap, ip);
  out.p_begin = portfolio_performance(m);

  for (int gen = 1; gen <= params.generations; ++gen) {
    const std::vector<double> fit = instance_fitness(m);
    std::vector<TspInstance> offspring;
    for (int pair = 0; pair < count / 2; ++pair) {
      const std::size_t a = tournament_pick(fit, params.tournament, rng);
      const std::size_t b = tournament_pick(fit, params.tournament, rng);
      const InstanceId id1 = ins_ids.next(), id2 = ins_ids.next();
      auto [c1, c2] = crossover_instances(ip[a], ip[b], params.cro, rng, id1, id2);
      for (TspInstance* c : {&c1, &c2}) {
        *c = mutate_instance(*c, params.mu, rng);
        if (c->degenerate()) *c = gen_usable_instance(space, rng, c->id);
        offspring.push_back(std::move(*c));
      }
    }
    const PerformanceMatrix pooled = concat_cols(m, eval.evaluate_matrix(ap, offspring));
    nlohmann::json offspring_ids = ids_of(offspring);
    std::vector<TspInstance> pool = std::move(ip);
    pool.insert(pool.end(), std::make_move_iterator(offspring.begin()),
                std::make_move_iterator(offspring.end()));
    const std::vector<double> pool_fit = instance_fitness(pooled);
    const std::vector<std::size_t> kept = select_survivors(pool_fit, n_ip);

    nlohmann::json removed = nlohmann::json::array();
    for (std::size_t i = 0, j = 0; i < pool.size(); ++i) {
      if (j < kept.size() && kept[j] == i)
        ++j;
      else
        removed.push_back(pool[i].id);
    }
    ip.clear();
    for (std::size_t i : kept) ip.push_back(std::move(pool[i]));
    m = pooled.select_cols(kept);
    if (log)
      log->emit({{"event", "ins_gen"},
                 {"cycle", k},
                 {"gen", gen},
                 {"offspring", std::move(offspring_ids)},
                 {"removed", std::move(removed)},
                 {"p", portfolio_performance(m)}});
  }
  out.p_end = portfolio_performance(m);
  out.ip = std::move(ip);
  out.matrix = std::move(m);
  return out;
}

}  // namespace liangyi
