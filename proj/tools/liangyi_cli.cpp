#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "liangyi/harness/commands.hpp"

using namespace liangyi;

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2, kCapacity = 3 };

fs::path out_dir_or_env(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("LIANGYI_OUT_DIR"); env && *env) return env;
  throw ValidationError("no output directory: pass --out or set LIANGYI_OUT_DIR");
}

int workers_or_env(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("LIANGYI_WORKERS"); env && *env) {
    try {
      const int w = std::stoi(env);
      if (w > 0) return w;
    } catch (const std::exception&) {
    }
    throw ValidationError(std::string("LIANGYI_WORKERS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

SolverConfig parse_genes(const std::string& text) {
  std::array<int, 5> g{};
  std::size_t pos = 0;
  for (int i = 0; i < 5; ++i) {
    const auto comma = text.find(',', pos);
    if ((i < 4) != (comma != std::string::npos))
      throw ValidationError("--genes: expected five comma-separated integers, got '" + text + "'");
    try {
      g[i] = std::stoi(text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    } catch (const std::exception&) {
      throw ValidationError("--genes: bad integer in '" + text + "'");
    }
    pos = comma + 1;
  }
  return SolverConfig::from_genes(g);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiangYi: competitive coevolution of TSP solver portfolios and training instances"};
  app.require_subcommand(1);

  std::string config_path, out, ap_path, test_dir, optima, csv, instance_path, genes, budget_text = "steps:150";
  int workers = 0, n = 14, count = 500, n_max = kDefaultHeldKarpMax;
  std::int64_t grid = 1'000'000;
  std::uint64_t seed = 1, solver_seed = 0;
  double theta = 0.05;
  bool resume = false;
  std::vector<std::string> run_dirs;
  std::string strategy = "random_search", training = "both";
  std::optional<int> test_size;
  std::optional<std::uint64_t> test_seed;

  auto* train = app.add_subcommand("train", "run the coevolution and write log, checkpoints and final AP");
  train->add_option("-c,--config", config_path, "run config (TOML subset)")->required();
  train->add_option("-o,--out", out, "output directory (or LIANGYI_OUT_DIR)");
  train->add_option("-w,--workers", workers, "evaluation threads (or LIANGYI_WORKERS)");
  train->add_flag("--resume", resume, "continue from the newest checkpoint in --out");

  auto* test = app.add_subcommand("test", "score a portfolio on a test set");
  test->add_option("--ap", ap_path, "portfolio file (final_ap.json)")->required();
  auto* test_dir_opt = test->add_option("--test-dir", test_dir, "directory of instance files");
  test->add_option("--n", n, "generated set: cities per instance")->excludes(test_dir_opt);
  test->add_option("--grid", grid, "generated set: coordinate bound");
  test->add_option("--count", count, "generated set: number of instances");
  test->add_option("--seed", seed, "generated set: seed");
  test->add_option("--budget", budget_text, "solver budget, steps:<int> or seconds:<real>");
  test->add_option("--theta", theta, "PEO threshold in percent");
  test->add_option("--solver-seed", solver_seed, "solver seed");
  test->add_option("--n-max", n_max, "largest n solved exactly");
  test->add_option("--optima", optima, "JSON map of instance id to optimal length");
  test->add_option("-o,--out", out, "where to write the per-instance CSV and summary");
  test->add_option("-w,--workers", workers, "evaluation threads");

  auto* compare = app.add_subcommand("compare", "LiangYi vs greedy two-stage baselines at equal evaluation count");
  compare->add_option("runs", run_dirs, "trained run directories")->required();
  compare->add_option("--strategy", strategy, "random_search or local_search_on_genes");
  compare->add_option("--training", training, "baseline training set: random, liangyi or both");
  compare->add_option("--test-size", test_size, "held-out set size (default from run config)");
  compare->add_option("--test-seed", test_seed, "held-out set seed (default from run config)");
  compare->add_option("--csv", csv, "output CSV path")->required();
  compare->add_option("-w,--workers", workers, "evaluation threads");

  auto* report = app.add_subcommand("report", "write figure/table CSVs from a run's event log");
  report->add_option("-o,--out", out, "run directory (or LIANGYI_OUT_DIR)");

  auto* gen = app.add_subcommand("gen-instances", "write random instances as JSON files");
  gen->add_option("--n", n, "cities per instance");
  gen->add_option("--grid", grid, "coordinate bound");
  gen->add_option("--count", count, "number of instances");
  gen->add_option("--seed", seed, "seed");
  gen->add_option("-o,--out", out, "output directory (or LIANGYI_OUT_DIR)");

  auto* solve1 = app.add_subcommand("solve-one", "run one configuration on one instance");
  solve1->add_option("--instance", instance_path, "instance file (.json or .tsp)")->required();
  solve1->add_option("--genes", genes, "five genes, e.g. 1,2,0,3,5")->required();
  solve1->add_option("--budget", budget_text, "steps:<int> or seconds:<real>");
  solve1->add_option("--seed", solver_seed, "solver seed");
  solve1->add_option("--n-max", n_max, "largest n solved exactly");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (train->parsed()) {
      const RunConfig rc = load_run_config(config_path);
      const auto res = cmd_train(rc, out_dir_or_env(out), workers_or_env(workers), resume, &std::cerr);
      std::cout << "final AP:";
      for (const Member& m : res.final_ap) std::cout << ' ' << m.config.to_string();
      std::cout << "\nsolver runs during training: " << res.training_runs << "\n";
    } else if (test->parsed()) {
      MetricSpec spec{budget_from_string(budget_text), theta, solver_seed};
      spec.validate();
      const auto ap = load_ap_file(ap_path);
      std::vector<TspInstance> set;
      if (!test_dir.empty()) {
        set = load_instance_dir(test_dir);
      } else {
        InstanceSpace space{n, grid};
        space.validate();
        if (count < 1) throw ValidationError("--count must be >= 1");
        set = held_out_set(space, seed, count);
      }
      std::optional<fs::path> out_path;
      if (!out.empty()) out_path = fs::path(out);
      std::optional<fs::path> optima_path;
      if (!optima.empty()) optima_path = fs::path(optima);
      const auto res = cmd_test(ap, set, spec, n_max, workers_or_env(workers), optima_path, out_path);
      std::cout << "applicability " << res.applicability << "\nmean_peo " << res.mean_peo
                << "\ninstances " << res.rows.size() << "\n";
    } else if (compare->parsed()) {
      CompareOptions opt;
      opt.strategy = strategy_from_string(strategy);
      if (training != "random" && training != "liangyi" && training != "both")
        throw ValidationError("--training must be random, liangyi or both");
      opt.random_training = training != "liangyi";
      opt.liangyi_training = training != "random";
      opt.test_set_size = test_size;
      opt.test_seed = test_seed;
      opt.workers = workers_or_env(workers);
      std::vector<fs::path> dirs(run_dirs.begin(), run_dirs.end());
      const auto rows = cmd_compare(dirs, opt, fs::path(csv));
      std::cout << comparison_csv(rows);
    } else if (report->parsed()) {
      const fs::path dir = out_dir_or_env(out);
      const auto rep = cmd_report(dir);
      std::cout << dynamics_csv(rep) << "mean retention ratio " << fmt(rep.mean_ratio()) << "\n"
                << "reports written to " << (dir / "reports").string() << "\n";
    } else if (gen->parsed()) {
      const auto files = cmd_gen_instances(InstanceSpace{n, grid}, count, seed, kTestIdBase, out_dir_or_env(out));
      std::cout << "wrote " << files.size() << " instances\n";
    } else if (solve1->parsed()) {
      const TspInstance ins = read_instance(instance_path);
      const auto res = cmd_solve_one(ins, parse_genes(genes), budget_from_string(budget_text), solver_seed, n_max);
      std::cout << "tour";
      for (int c : res.tour.order) std::cout << ' ' << c;
      std::cout.precision(17);
      std::cout << "\nlength " << res.tour.length << "\noptimum " << res.optimum << "\npeo "
                << res.peo << "\nkicks " << res.trace.kicks << "\nwork " << res.trace.work << "\n";
    }
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCapacity;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
