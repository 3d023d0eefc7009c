#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "liangyi/baseline/two_stage.hpp"
#include "liangyi/coevo/run.hpp"
#include "liangyi/errors.hpp"
#include "liangyi/harness/config_file.hpp"
#include "liangyi/harness/report.hpp"
#include "liangyi/oracle/exact.hpp"
#include "liangyi/solver/clk.hpp"
#include "liangyi/tsp/io.hpp"

namespace liangyi {

namespace fs = std::filesystem;

inline constexpr const char* kSoftwareVersion = "0.1.0";

// Baseline training instances get their own id range, clear of both training
// populations and the held-out set.
inline constexpr InstanceId kBaselineIdBase = InstanceId{1} << 41;

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write-then-rename so an interrupted run never leaves a torn file.
inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

inline nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline nlohmann::json ap_file_json(std::span<const Member> ap) {
  nlohmann::json configs = nlohmann::json::array();
  for (const Member& m : ap) configs.push_back(m.config.genes);
  return {{"members", members_to_json(ap)}, {"configs", std::move(configs)}};
}

inline std::vector<SolverConfig> load_ap_file(const fs::path& path) {
  const nlohmann::json doc = read_json(path);
  if (!doc.contains("configs") || !doc.at("configs").is_array())
    throw ParseError(path.string() + ": field 'configs' must be an array of gene lists");
  std::vector<SolverConfig> ap;
  for (const auto& g : doc.at("configs")) ap.push_back(SolverConfig::from_genes(g.get<std::array<int, 5>>()));
  if (ap.empty()) throw ValidationError(path.string() + ": portfolio is empty");
  return ap;
}

inline std::vector<fs::path> checkpoint_files(const fs::path& out_dir) {
  std::vector<std::pair<int, fs::path>> found;
  const fs::path dir = out_dir / "checkpoints";
  if (!fs::exists(dir)) return {};
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("cycle_", 0) == 0 && e.path().extension() == ".json")
      found.emplace_back(std::stoi(name.substr(6)), e.path());
  }
  std::sort(found.begin(), found.end());
  std::vector<fs::path> out;
  for (auto& f : found) out.push_back(f.second);
  return out;
}

struct TrainOutcome {
  std::vector<Member> final_ap;
  long long training_runs = 0;
  fs::path log_path;
  int resumed_from = 0;
};

// Drives a LiangYi run, writing config, manifest, event log, per-cycle
// checkpoints and the final AP to out_dir. With resume, continues from the
// newest checkpoint (the log is cut back to the checkpoint's line count).
inline TrainOutcome cmd_train(const RunConfig& rc, const fs::path& out_dir, int workers,
                              bool resume = false, std::ostream* progress = nullptr) {
  rc.validate();
  fs::create_directories(out_dir / "checkpoints");
  const std::string canonical = canonical_config(rc);
  const std::string hash = config_hash(canonical);
  const fs::path log_path = out_dir / "events.jsonl";

  std::optional<nlohmann::json> ck;
  if (resume) {
    const auto files = checkpoint_files(out_dir);
    if (!files.empty()) {
      ck = read_json(files.back());
      if (canonical_config(run_config_from_json(ck->at("config"))) != canonical)
        throw ValidationError("resume: checkpoint config differs from the given config");
    }
  }

  std::vector<std::string> kept;
  if (ck) {
    kept = read_log_lines(log_path.string());
    const long long n = ck->at("log_lines");
    if (static_cast<long long>(kept.size()) < n)
      throw IntegrityError("resume: event log is shorter than the checkpoint records");
    kept.resize(static_cast<std::size_t>(n));
    std::string text;
    for (const auto& l : kept) text += l + "\n";
    write_text(log_path, text);
  }
  std::ofstream log_file(log_path, ck ? std::ios::app : std::ios::trunc);
  if (!log_file) throw Error("cannot open " + log_path.string());
  EventLog log(&log_file);
  log.preload(kept);

  write_text(out_dir / "config.json", canonical);
  nlohmann::json manifest = {{"run_id", "seed" + std::to_string(rc.seed) + "-" + hash.substr(0, 8)},
                             {"config_hash", hash},
                             {"config_file", "config.json"},
                             {"started_at", utc_now()},
                             {"finished_at", nullptr},
                             {"software_version", kSoftwareVersion},
                             {"workers", workers},
                             {"artifacts", {{"log", "events.jsonl"}, {"checkpoints", nlohmann::json::array()}}}};
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");

  OptimumStore oracle(rc.n_max);
  Evaluator eval(rc.metric, oracle, workers);
  std::unique_ptr<LiangYiRun> run = ck ? std::make_unique<LiangYiRun>(*ck, eval, log)
                                       : std::make_unique<LiangYiRun>(rc, eval, log);
  TrainOutcome outcome;
  outcome.resumed_from = run->completed_cycles();
  outcome.log_path = log_path;

  while (!run->done()) {
    run->run_cycle();
    const int k = run->completed_cycles();
    write_text(out_dir / "checkpoints" / ("cycle_" + std::to_string(k) + ".json"),
               run->checkpoint().dump() + "\n");
    if (progress) *progress << "cycle " << k << "/" << rc.cycles << " done\n";
  }
  run->analyze();
  write_text(out_dir / "final_ap.json", ap_file_json(run->ap()).dump(2) + "\n");

  nlohmann::json cks = nlohmann::json::array();
  for (const auto& f : checkpoint_files(out_dir)) cks.push_back(fs::relative(f, out_dir).string());
  manifest["finished_at"] = utc_now();
  manifest["artifacts"]["checkpoints"] = cks;
  manifest["artifacts"]["final_ap"] = "final_ap.json";
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");

  outcome.final_ap = run->ap();
  outcome.training_runs = run->training_runs();
  return outcome;
}

inline RunReport cmd_report(const fs::path& out_dir) {
  const fs::path log_path = out_dir / "events.jsonl";
  if (!fs::exists(log_path)) throw ValidationError("report: no event log at " + log_path.string());
  const RunReport rep = build_report(read_log_lines(log_path.string()));
  const fs::path dir = out_dir / "reports";
  write_text(dir / "training_dynamics.csv", dynamics_csv(rep));
  write_text(dir / "retention.csv", retention_csv(rep));
  write_text(dir / "retention_ratios.csv", ratios_csv(rep));
  write_text(dir / "train_curve.csv", curve_csv(rep.train_curve, false));
  write_text(dir / "test_curve.csv", curve_csv(rep.test_curve, true));
  const double mr = rep.mean_ratio();
  nlohmann::json summary = {{"seed", rep.seed},
                            {"training_solver_runs", rep.training_runs},
                            {"mean_retention_ratio", std::isfinite(mr) ? nlohmann::json(mr) : nlohmann::json(nullptr)}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  return rep;
}

struct TestRow {
  InstanceId id = 0;
  double optimum = 0.0;
  double best_peo = 0.0;
  int applicable = 0;
};

struct TestOutcome {
  double applicability = 0.0;
  double mean_peo = 0.0;
  std::vector<TestRow> rows;
};

inline std::vector<TspInstance> load_instance_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ValidationError("test set: not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (ext == ".json" || ext == ".tsp") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("test set: no instance files in " + dir.string());
  std::vector<TspInstance> out;
  for (std::size_t i = 0; i < files.size(); ++i) {
    TspInstance ins = read_instance(files[i]);
    // TSPLIB files carry no id; number them after the JSON ones.
    if (files[i].extension() == ".tsp") ins.id = kTestIdBase + (InstanceId{1} << 20) + i;
    out.push_back(std::move(ins));
  }
  return out;
}

inline TestOutcome cmd_test(std::span<const SolverConfig> ap, std::span<const TspInstance> test,
                            const MetricSpec& spec, int n_max, int workers,
                            const std::optional<fs::path>& optima_file,
                            const std::optional<fs::path>& out_dir) {
  if (test.empty()) throw ValidationError("test: empty test set");
  OptimumStore oracle(n_max);
  if (optima_file) oracle.import_file(*optima_file);
  Evaluator eval(spec, oracle, workers);
  eval.prefetch(ap, test);
  TestOutcome out;
  for (const TspInstance& ins : test) {
    TestRow row{ins.id, oracle.get(ins).length, eval.portfolio_peo(ap, ins), 0};
    row.applicable = eval.perf_ap_instance(ap, ins) > 0 ? 1 : 0;
    out.rows.push_back(row);
  }
  double app = 0.0, peo_sum = 0.0;
  for (const auto& r : out.rows) {
    app += r.applicable;
    peo_sum += r.best_peo;
  }
  out.applicability = app / static_cast<double>(out.rows.size());
  out.mean_peo = peo_sum / static_cast<double>(out.rows.size());
  if (out_dir) {
    std::string csv = "instance,optimum,best_peo,applicable\n";
    for (const auto& r : out.rows)
      csv += std::to_string(r.id) + "," + fmt(r.optimum) + "," + fmt(r.best_peo) + "," +
             std::to_string(r.applicable) + "\n";
    write_text(*out_dir / "test_instances.csv", csv);
    write_text(*out_dir / "test_summary.json",
               nlohmann::json{{"applicability", out.applicability},
                              {"mean_peo", out.mean_peo},
                              {"instances", out.rows.size()},
                              {"budget", spec.budget.to_string()},
                              {"theta", spec.theta}}
                       .dump(2) +
                   "\n");
  }
  return out;
}

struct CompareOptions {
  SearchStrategy strategy = SearchStrategy::random_search;
  bool random_training = true;      // PH_random
  bool liangyi_training = true;     // PH_LiangYi
  std::optional<int> test_set_size;
  std::optional<std::uint64_t> test_seed;
  int workers = 1;
};

// The training view of a finished run, read back from its artifacts.
struct TrainedRun {
  RunConfig config;
  std::vector<SolverConfig> final_ap;
  long long training_runs = 0;
  std::vector<TspInstance> ip_training;
};

inline TrainedRun load_trained_run(const fs::path& out_dir) {
  TrainedRun tr;
  tr.config = run_config_from_json(read_json(out_dir / "config.json"));
  tr.final_ap = load_ap_file(out_dir / "final_ap.json");
  for (const std::string& line : read_log_lines((out_dir / "events.jsonl").string())) {
    const auto ev = nlohmann::json::parse(line);
    if (ev.at("event") == "memory")
      for (const auto& ins : ev.at("instances")) tr.ip_training.push_back(instance_from_json(ins));
    if (ev.at("event") == "train_end") tr.training_runs = ev.at("solver_runs");
  }
  if (tr.training_runs <= 0) throw IntegrityError("compare: run in " + out_dir.string() + " has no train_end record");
  return tr;
}

// LiangYi's final AP against greedy baselines trained with the same number
// of solver evaluations, all scored on the run's held-out set.
inline std::vector<ComparisonRow> compare_trained_run(const TrainedRun& tr, const CompareOptions& opt) {
  const RunConfig& rc = tr.config;
  OptimumStore oracle(rc.n_max);
  const int size = opt.test_set_size.value_or(rc.analysis.test_set_size);
  if (size <= 0) throw ValidationError("compare: test set size must be positive");
  const auto test = held_out_set(rc.space, opt.test_seed.value_or(rc.analysis.test_seed), size);
  Evaluator test_eval(rc.metric, oracle, opt.workers);

  std::vector<ComparisonRow> rows;
  rows.push_back(score_portfolio(rc.seed, "liangyi", tr.final_ap, test, test_eval, tr.training_runs));

  const long long per_iteration = tr.training_runs / rc.n_ap;
  auto run_baseline = [&](const std::string& name, std::vector<TspInstance> training) {
    Rng rng = make_substream(rc.seed, "baseline");
    BaselineConfig bc;
    bc.training = std::move(training);
    bc.size = rc.n_ap;
    bc.budget_per_iteration = per_iteration;
    bc.strategy = opt.strategy;
    Evaluator train_eval(rc.metric, oracle, opt.workers);
    const BaselineResult res = build_portfolio(bc, train_eval, rng);
    rows.push_back(score_portfolio(rc.seed, name, res.ap, test, test_eval, res.evaluations));
  };
  if (opt.random_training) {
    Rng rng = make_substream(rc.seed, "baseline");
    const int count = static_cast<int>(tr.ip_training.empty() ? rc.n_ip : tr.ip_training.size());
    run_baseline("PH_random", gen_instance_set(rc.space, rng, count, kBaselineIdBase));
  }
  if (opt.liangyi_training && !tr.ip_training.empty()) run_baseline("PH_LiangYi", tr.ip_training);
  return rows;
}

inline std::vector<ComparisonRow> cmd_compare(const std::vector<fs::path>& run_dirs,
                                              const CompareOptions& opt,
                                              const std::optional<fs::path>& csv_path) {
  if (run_dirs.empty()) throw ValidationError("compare: no run directories given");
  std::vector<ComparisonRow> rows;
  for (const auto& dir : run_dirs) {
    auto r = compare_trained_run(load_trained_run(dir), opt);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (csv_path) write_text(*csv_path, comparison_csv(rows));
  return rows;
}

inline std::vector<fs::path> cmd_gen_instances(const InstanceSpace& space, int count,
                                               std::uint64_t seed, InstanceId first_id,
                                               const fs::path& out_dir) {
  space.validate();
  if (count < 1) throw ValidationError("gen-instances: count must be >= 1");
  Rng rng = make_substream(seed, "test-gen");
  std::vector<fs::path> written;
  for (const TspInstance& ins : gen_instance_set(space, rng, count, first_id)) {
    const fs::path p = out_dir / ("instance_" + std::to_string(ins.id) + ".json");
    fs::create_directories(out_dir);
    write_instance(ins, p);
    written.push_back(p);
  }
  return written;
}

struct SolveOneOutcome {
  Tour tour;
  double optimum = 0.0;
  double peo = 0.0;
  SolveTrace trace;
};

inline SolveOneOutcome cmd_solve_one(const TspInstance& ins, const SolverConfig& cfg,
                                     const Budget& budget, std::uint64_t seed, int n_max) {
  SolveOneOutcome out;
  out.tour = solve(cfg, ins, seed, budget, CandidateLists::build(ins), &out.trace);
  out.optimum = held_karp_opt(ins, n_max);
  out.peo = peo(out.tour.length, out.optimum);
  return out;
}

}  // namespace liangyi
