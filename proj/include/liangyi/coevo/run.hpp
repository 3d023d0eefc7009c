#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "liangyi/coevo/event_log.hpp"
#include "liangyi/coevo/evolve.hpp"
#include "liangyi/coevo/memory.hpp"
#include "liangyi/errors.hpp"
#include "liangyi/metrics/evaluator.hpp"
#include "liangyi/oracle/exact.hpp"
#include "liangyi/random.hpp"
#include "liangyi/tsp/instance.hpp"
#include "liangyi/tsp/io.hpp"

namespace liangyi {

// Held-out set ids live far above anything a training run allocates, so
// memo keys never collide.
inline constexpr InstanceId kTestIdBase = InstanceId{1} << 40;

// Post-training measurements written to the log so reports can be rebuilt
// from it alone.
struct AnalysisParams {
  bool enabled = true;
  int test_set_size = 500;
  std::uint64_t test_seed = 20240501;

  void validate() const {
    if (test_set_size < 0) throw ValidationError("analysis.test_set_size must be >= 0");
  }
};

struct RunConfig {
  int n_ap = 4;
  int n_ip = 20;
  int cycles = 3;
  EvolveAlgParams alg;
  EvolveInsParams ins;
  MetricSpec metric;
  InstanceSpace space;
  std::uint64_t seed = 1;
  int n_max = kDefaultHeldKarpMax;
  AnalysisParams analysis;

  void validate() const {
    if (n_ap < 1) throw ValidationError("run.n_ap must be >= 1");
    if (n_ip < 1) throw ValidationError("run.n_ip must be >= 1");
    if (cycles < 0) throw ValidationError("run.cycles must be >= 0");
    alg.validate();
    ins.validate(n_ip);
    metric.validate();
    space.validate();
    if (space.n > n_max)
      throw ValidationError("space.n = " + std::to_string(space.n) +
                            " exceeds oracle.n_max = " + std::to_string(n_max) +
                            "; import optima from an external solver or raise n_max");
    analysis.validate();
  }
};

// Desk-scale defaults with the solver seed tied to the run seed.
inline RunConfig desk_config(std::uint64_t seed) {
  RunConfig rc;
  rc.seed = seed;
  rc.metric.solver_seed = seed;
  return rc;
}

inline nlohmann::json budget_to_json(const Budget& b) { return b.to_string(); }

inline Budget budget_from_string(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw ValidationError("metric.budget: expected 'steps:<int>' or 'seconds:<real>', got '" +
                          text + "'");
  const std::string kind = text.substr(0, colon), value = text.substr(colon + 1);
  Budget b;
  try {
    if (kind == "steps")
      b = Budget::of_steps(std::stoi(value));
    else if (kind == "seconds")
      b = Budget::of_seconds(std::stod(value));
    else
      throw ValidationError("metric.budget: unknown mode '" + kind + "'");
  } catch (const std::logic_error&) {
    throw ValidationError("metric.budget: bad value '" + value + "'");
  }
  b.validate();
  return b;
}

inline nlohmann::json run_config_to_json(const RunConfig& rc) {
  return {
      {"run", {{"n_ap", rc.n_ap}, {"n_ip", rc.n_ip}, {"cycles", rc.cycles}, {"seed", rc.seed}}},
      {"alg",
       {{"generations", rc.alg.generations},
        {"cro", rc.alg.cro},
        {"mu", rc.alg.mu},
        {"alpha", rc.alg.alpha},
        {"beta", rc.alg.beta}}},
      {"ins",
       {{"generations", rc.ins.generations},
        {"cro", rc.ins.cro},
        {"mu", rc.ins.mu},
        {"res", rc.ins.res},
        {"tournament", rc.ins.tournament}}},
      {"metric",
       {{"budget", rc.metric.budget.to_string()},
        {"theta", rc.metric.theta},
        {"solver_seed", rc.metric.solver_seed}}},
      {"space", {{"n", rc.space.n}, {"grid", rc.space.grid}}},
      {"oracle", {{"n_max", rc.n_max}}},
      {"analysis",
       {{"enabled", rc.analysis.enabled},
        {"test_set_size", rc.analysis.test_set_size},
        {"test_seed", rc.analysis.test_seed}}},
  };
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig rc;
  const auto& run = j.at("run");
  rc.n_ap = run.at("n_ap");
  rc.n_ip = run.at("n_ip");
  rc.cycles = run.at("cycles");
  rc.seed = run.at("seed");
  const auto& alg = j.at("alg");
  rc.alg = {alg.at("generations"), alg.at("cro"), alg.at("mu"), alg.at("alpha"), alg.at("beta")};
  const auto& ins = j.at("ins");
  rc.ins = {ins.at("generations"), ins.at("cro"), ins.at("mu"), ins.at("res"),
            ins.at("tournament")};
  const auto& metric = j.at("metric");
  rc.metric.budget = budget_from_string(metric.at("budget"));
  rc.metric.theta = metric.at("theta");
  rc.metric.solver_seed = metric.at("solver_seed");
  rc.space.n = j.at("space").at("n");
  rc.space.grid = j.at("space").at("grid");
  rc.n_max = j.at("oracle").at("n_max");
  const auto& an = j.at("analysis");
  rc.analysis = {an.at("enabled"), an.at("test_set_size"), an.at("test_seed")};
  return rc;
}

// `count` fresh instances with consecutive ids starting at `first_id`.
inline std::vector<TspInstance> gen_instance_set(const InstanceSpace& space, Rng& rng, int count,
                                                 InstanceId first_id) {
  std::vector<TspInstance> out;
  for (int i = 0; i < count; ++i)
    out.push_back(gen_usable_instance(space, rng, first_id + static_cast<InstanceId>(i)));
  return out;
}

// The fixed held-out set; depends only on the space, the test seed and the size.
inline std::vector<TspInstance> held_out_set(const InstanceSpace& space, std::uint64_t test_seed,
                                             int count) {
  Rng rng = make_substream(test_seed, "test-gen");
  return gen_instance_set(space, rng, count, kTestIdBase);
}

inline nlohmann::json instances_to_json(std::span<const TspInstance> ip) {
  nlohmann::json out = nlohmann::json::array();
  for (const TspInstance& ins : ip) out.push_back(instance_to_json(ins));
  return out;
}

inline std::vector<TspInstance> instances_from_json(const nlohmann::json& arr) {
  std::vector<TspInstance> out;
  for (const auto& j : arr) out.push_back(instance_from_json(j));
  return out;
}

// Mean PEO of a portfolio (best member per instance) over a set.
inline double mean_portfolio_peo(Evaluator& eval, std::span<const SolverConfig> ap,
                                 std::span<const TspInstance> ip) {
  if (ip.empty()) throw StructuralError("mean_portfolio_peo: empty instance set");
  double total = 0.0;
  for (const TspInstance& ins : ip) total += eval.portfolio_peo(ap, ins);
  return total / static_cast<double>(ip.size());
}

// The LiangYi loop as a resumable state machine: construct (AP_1, IP_1 random),
// then run_cycle() until done(); analyze() appends post-training measurements.
class LiangYiRun {
 public:
  LiangYiRun(RunConfig rc, Evaluator& eval, EventLog& log)
      : rc_(std::move(rc)),
        eval_(eval),
        log_(log),
        rng_alg_(make_substream(rc_.seed, "evolve-alg")),
        rng_ins_(make_substream(rc_.seed, "evolve-ins")) {
    rc_.validate();
    require_matching_spec();
    Rng init_ap = make_substream(rc_.seed, "init-ap");
    for (int i = 0; i < rc_.n_ap; ++i) ap_.push_back(Member{alg_ids_.next(), random_config(init_ap), 1});
    Rng init_ip = make_substream(rc_.seed, "init-ip");
    for (int i = 0; i < rc_.n_ip; ++i) ip_.push_back(gen_usable_instance(rc_.space, init_ip, ins_ids_.next()));
    ap_history_.push_back(ap_);
    log_.emit({{"event", "config"}, {"config", run_config_to_json(rc_)}});
    log_.emit({{"event", "init"},
               {"members", members_to_json(ap_)},
               {"instances", instances_to_json(ip_)}});
  }

  // Restores a run from a checkpoint document written by checkpoint().
  LiangYiRun(const nlohmann::json& ck, Evaluator& eval, EventLog& log)
      : rc_(run_config_from_json(ck.at("config"))),
        eval_(eval),
        log_(log),
        rng_alg_(load_rng(ck.at("rng").at("evolve_alg").get<std::string>())),
        rng_ins_(load_rng(ck.at("rng").at("evolve_ins").get<std::string>())),
        alg_ids_(ck.at("ids").at("alg").get<std::uint64_t>()),
        ins_ids_(ck.at("ids").at("ins").get<std::uint64_t>()) {
    rc_.validate();
    require_matching_spec();
    completed_ = ck.at("completed_cycles");
    ap_ = members_from_json(ck.at("ap"));
    ip_ = instances_from_json(ck.at("ip"));
    for (const auto& a : ck.at("ap_history")) ap_history_.push_back(members_from_json(a));
    for (const auto& rec : ck.at("memory")) {
      CycleRecord r;
      r.cycle = rec.at("cycle");
      r.ap = members_from_json(rec.at("ap"));
      r.matrix = PerformanceMatrix::from_csv(rec.at("matrix_csv").get<std::string>());
      r.ip = instances_from_json(rec.at("ip"));
      memory_.add(std::move(r));
    }
    if (memory_.cycles() != completed_ || static_cast<int>(ap_history_.size()) != completed_ + 1)
      throw IntegrityError("checkpoint: cycle count does not match stored memory");
    training_runs_ = ck.at("training_runs");
    eval_.oracle().load_json(ck.at("oracle"));
    eval_.memo_load_json(ck.at("evaluator").at("memo"), ck.at("evaluator").at("runs"));
  }

  bool done() const { return completed_ >= rc_.cycles; }
  int completed_cycles() const { return completed_; }
  const RunConfig& config() const { return rc_; }
  const std::vector<Member>& ap() const { return ap_; }
  const std::vector<TspInstance>& ip() const { return ip_; }
  const CycleMemory& memory() const { return memory_; }
  // AP_1 .. AP_{completed+1}.
  const std::vector<std::vector<Member>>& ap_history() const { return ap_history_; }
  long long training_runs() const { return training_runs_; }

  void run_cycle() {
    if (done()) throw StructuralError("run_cycle: all cycles already completed");
    const int k = completed_ + 1;
    AlgPhaseResult alg = evolve_alg(ap_, ip_, rc_.alg, eval_, memory_, k, rng_alg_, alg_ids_, &log_);
    checkpoint_event(k, "alg_begin", alg.p_begin);
    checkpoint_event(k, "alg_end", alg.p_end);
    ap_ = std::move(alg.ap);
    InsPhaseResult ins = evolve_ins(ap_, ip_, rc_.ins, rc_.space, eval_, k, rng_ins_, ins_ids_, &log_);
    checkpoint_event(k, "ins_end", ins.p_end);
    ip_ = std::move(ins.ip);
    ap_history_.push_back(ap_);
    completed_ = k;
    training_runs_ = eval_.solver_runs();
    log_.emit({{"event", "cycle_end"},
               {"cycle", k},
               {"members", members_to_json(ap_)},
               {"instances", ids_of(std::span<const TspInstance>(ip_))},
               {"solver_runs", training_runs_}});
  }

  void run_all() {
    while (!done()) run_cycle();
  }

  // Retention table, training-union curve and held-out test curve.
  void analyze() {
    log_.emit({{"event", "train_end"}, {"solver_runs", training_runs_}});
    if (!rc_.analysis.enabled) return;
    const int last = static_cast<int>(ap_history_.size());
    std::vector<std::vector<SolverConfig>> aps;
    for (const auto& a : ap_history_) aps.push_back(configs_of(a));

    for (int r = 1; r <= memory_.cycles(); ++r) {
      const auto& ip_r = memory_.at(r).ip;
      nlohmann::json ps = nlohmann::json::array();
      for (int m = r; m <= last; ++m) ps.push_back(eval_.perf_ap_set(aps[m - 1], ip_r));
      log_.emit({{"event", "retention"}, {"ip_cycle", r}, {"first_ap", r}, {"p", std::move(ps)}});
    }
    std::vector<TspInstance> training;
    for (const auto& rec : memory_.records()) training.insert(training.end(), rec.ip.begin(), rec.ip.end());
    if (!training.empty())
      for (int m = 1; m <= last; ++m)
        log_.emit({{"event", "train_curve"},
                   {"ap", m},
                   {"p", eval_.perf_ap_set(aps[m - 1], training)},
                   {"instances", training.size()}});
    if (rc_.analysis.test_set_size > 0) {
      const auto test = held_out_set(rc_.space, rc_.analysis.test_seed, rc_.analysis.test_set_size);
      for (const auto& a : aps) eval_.prefetch(a, test);
      for (int m = 1; m <= last; ++m)
        log_.emit({{"event", "test_curve"},
                   {"ap", m},
                   {"applicability", eval_.perf_ap_set(aps[m - 1], test)},
                   {"mean_peo", mean_portfolio_peo(eval_, aps[m - 1], test)},
                   {"instances", test.size()},
                   {"test_seed", rc_.analysis.test_seed}});
    }
  }

  nlohmann::json checkpoint() const {
    nlohmann::json memory = nlohmann::json::array();
    for (const auto& rec : memory_.records())
      memory.push_back({{"cycle", rec.cycle},
                        {"ap", members_to_json(rec.ap)},
                        {"matrix_csv", rec.matrix.to_csv()},
                        {"ip", instances_to_json(rec.ip)}});
    nlohmann::json history = nlohmann::json::array();
    for (const auto& a : ap_history_) history.push_back(members_to_json(a));
    return {{"config", run_config_to_json(rc_)},
            {"completed_cycles", completed_},
            {"ap", members_to_json(ap_)},
            {"ip", instances_to_json(ip_)},
            {"ap_history", std::move(history)},
            {"memory", std::move(memory)},
            {"rng", {{"evolve_alg", save_rng(rng_alg_)}, {"evolve_ins", save_rng(rng_ins_)}}},
            {"ids", {{"alg", alg_ids_.peek()}, {"ins", ins_ids_.peek()}}},
            {"training_runs", training_runs_},
            {"evaluator", {{"memo", eval_.memo_to_json()}, {"runs", eval_.solver_runs()}}},
            {"oracle", eval_.oracle().to_json()},
            {"log_lines", log_.count()}};
  }

 private:
  void require_matching_spec() const {
    if (!(eval_.spec() == rc_.metric))
      throw ValidationError("evaluator metric spec differs from the run config");
  }

  void checkpoint_event(int k, const char* phase, double p) {
    log_.emit({{"event", "checkpoint"}, {"cycle", k}, {"phase", phase}, {"p", p}});
  }

  RunConfig rc_;
  Evaluator& eval_;
  EventLog& log_;
  Rng rng_alg_;
  Rng rng_ins_;
  IdSource alg_ids_{1};
  IdSource ins_ids_{1};
  int completed_ = 0;
  std::vector<Member> ap_;
  std::vector<TspInstance> ip_;
  std::vector<std::vector<Member>> ap_history_;
  CycleMemory memory_;
  long long training_runs_ = 0;
};

struct LiangYiResult {
  std::vector<Member> final_ap;
  CycleMemory memory;
  std::vector<std::vector<Member>> ap_history;
  long long training_runs = 0;
};

inline LiangYiResult run_liangyi(const RunConfig& rc, Evaluator& eval, EventLog& log,
                                 bool analyze = false) {
  LiangYiRun run(rc, eval, log);
  run.run_all();
  if (analyze) run.analyze();
  return {run.ap(), run.memory(), run.ap_history(), run.training_runs()};
}

}  // namespace liangyi
