#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>

#include "liangyi/harness/commands.hpp"
#include "liangyi/harness/config_file.hpp"
#include "liangyi/harness/report.hpp"
#include "properties.hpp"

using namespace liangyi;
using namespace liangyi::testing;

namespace {

fs::path fresh_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("liangyi_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunConfig small_config(std::uint64_t seed) {
  RunConfig rc = mini_run_config(seed);
  rc.cycles = 3;
  rc.alg.generations = 8;
  rc.ins.generations = 4;
  rc.analysis.enabled = true;
  rc.analysis.test_set_size = 40;
  return rc;
}

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return run_config_from_kv(parse_kv_config(in, "test.toml"));
}

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + LIANGYI_CLI_PATH + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(ConfigFile, ParsesSectionsAndComments) {
  const RunConfig rc = parse(
      "# desk run\n"
      "[run]\n"
      "n_ap = 3   # members\n"
      "n_ip = 10\n"
      "seed = 12\n"
      "[ins]\n"
      "res = 0.2\n"
      "[metric]\n"
      "budget = \"steps:90\"\n"
      "[analysis]\n"
      "enabled = false\n");
  EXPECT_EQ(rc.n_ap, 3);
  EXPECT_EQ(rc.n_ip, 10);
  EXPECT_EQ(rc.seed, 12u);
  EXPECT_EQ(rc.metric.budget, Budget::of_steps(90));
  EXPECT_EQ(rc.metric.solver_seed, 12u);
  EXPECT_FALSE(rc.analysis.enabled);
}

TEST(ConfigFile, ExplicitSolverSeedKept) {
  EXPECT_EQ(parse("[run]\nseed = 5\n[metric]\nsolver_seed = 8\n").metric.solver_seed, 8u);
}

TEST(ConfigFile, ErrorsNameTheProblem) {
  try {
    parse("[run]\nn_ap 4\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("test.toml:2"), std::string::npos) << e.what();
  }
  try {
    parse("[run]\nnap = 4\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("run.nap"), std::string::npos) << e.what();
  }
  try {
    parse("[run]\nn_ip = 10\n[ins]\nres = 0.3\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("even positive integer"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse("[run]\nn_ap = 4\nn_ap = 5\n"), ParseError);
  EXPECT_THROW(parse("[metric]\nbudget = \"minutes:3\"\n"), ValidationError);
  EXPECT_THROW(parse("[space]\nn = 30\n"), ValidationError);
}

TEST(ConfigFile, ShippedConfigsLoad) {
  const fs::path dir = fs::path(LIANGYI_SOURCE_DIR) / "configs";
  const RunConfig desk = load_run_config(dir / "desk_scale.toml");
  EXPECT_EQ(canonical_config(desk), canonical_config(desk_config(1)));
  const RunConfig full = load_run_config(dir / "full_scale.toml");
  EXPECT_EQ(full.n_ap, 6);
  EXPECT_EQ(full.n_ip, 150);
}

TEST(ConfigFile, HashFollowsCanonicalBytes) {
  const RunConfig a = small_config(1), b = small_config(2);
  EXPECT_EQ(config_hash(canonical_config(a)), config_hash(canonical_config(a)));
  EXPECT_NE(config_hash(canonical_config(a)), config_hash(canonical_config(b)));
  EXPECT_EQ(config_hash(canonical_config(a)).size(), 16u);
  EXPECT_EQ(canonical_config(run_config_from_json(run_config_to_json(a))), canonical_config(a));
}

TEST(Train, WritesArtifactsAndRerunsIdentically) {
  const RunConfig rc = small_config(21);
  const fs::path a = fresh_dir("train_a"), b = fresh_dir("train_b");
  const auto ra = cmd_train(rc, a, 1);
  const auto rb = cmd_train(rc, b, 3);
  for (const char* f : {"config.json", "manifest.json", "events.jsonl", "final_ap.json",
                        "checkpoints/cycle_1.json", "checkpoints/cycle_3.json"})
    EXPECT_TRUE(fs::exists(a / f)) << f;
  EXPECT_EQ(read_text(a / "events.jsonl"), read_text(b / "events.jsonl"));
  EXPECT_EQ(read_text(a / "final_ap.json"), read_text(b / "final_ap.json"));
  EXPECT_EQ(ra.final_ap, rb.final_ap);
  EXPECT_EQ(ra.training_runs, rb.training_runs);

  const auto manifest = read_json(a / "manifest.json");
  EXPECT_EQ(manifest["config_hash"], config_hash(read_text(a / "config.json")));
  EXPECT_EQ(manifest["artifacts"]["checkpoints"].size(), 3u);
  EXPECT_EQ(load_ap_file(a / "final_ap.json"), configs_of(ra.final_ap));
}

TEST(Train, ResumeAfterInterruptionMatches) {
  const RunConfig rc = small_config(22);
  const fs::path whole = fresh_dir("resume_whole"), cut = fresh_dir("resume_cut");
  cmd_train(rc, whole, 1);
  cmd_train(rc, cut, 1);
  // Simulate a crash after cycle 1: later checkpoints gone, log has a torn tail.
  fs::remove(cut / "checkpoints/cycle_2.json");
  fs::remove(cut / "checkpoints/cycle_3.json");
  fs::remove(cut / "final_ap.json");
  { std::ofstream(cut / "events.jsonl", std::ios::app) << "{\"event\":\"alg_g"; }
  const auto res = cmd_train(rc, cut, 2, true);
  EXPECT_EQ(res.resumed_from, 1);
  EXPECT_EQ(read_text(cut / "events.jsonl"), read_text(whole / "events.jsonl"));
  EXPECT_EQ(read_text(cut / "final_ap.json"), read_text(whole / "final_ap.json"));

  RunConfig other = rc;
  other.alg.generations = 9;
  EXPECT_THROW(cmd_train(other, cut, 1, true), ValidationError);
}

TEST(Report, TablesFromLog) {
  const RunConfig rc = small_config(23);
  const fs::path dir = fresh_dir("report");
  cmd_train(rc, dir, 2);
  const RunReport rep = cmd_report(dir);
  EXPECT_EQ(rep.dynamics.size(), 9u);
  // Lower-triangular retention: IP_r is scored by AP_r .. AP_4.
  EXPECT_EQ(rep.retention.size(), 4u + 3u + 2u);
  for (const auto& c : rep.retention) EXPECT_GE(c.ap, c.ip_cycle);
  EXPECT_EQ(rep.train_curve.size(), 4u);
  EXPECT_EQ(rep.test_curve.size(), 4u);
  EXPECT_GT(rep.training_runs, 0);
  for (const char* f : {"training_dynamics.csv", "retention.csv", "retention_ratios.csv",
                        "train_curve.csv", "test_curve.csv", "summary.json"})
    EXPECT_TRUE(fs::exists(dir / "reports" / f)) << f;
  const std::string dyn = read_text(dir / "reports/training_dynamics.csv");
  EXPECT_EQ(std::count(dyn.begin(), dyn.end(), '\n'), 10);
}

TEST(Report, RetentionRatioDefinition) {
  // IP_1 scored by AP_1 .. AP_4.
  const std::vector<RetentionCell> cells{{1, 1, 0.2}, {1, 2, 0.6}, {1, 3, 0.5}, {1, 4, 0.6}, {2, 2, 0.4}, {2, 3, 0.4}, {2, 4, 0.3}};
  const auto ratios = retention_ratios(cells);
  ASSERT_EQ(ratios.size(), 3u);
  EXPECT_EQ(ratios[0].ap, 3);
  EXPECT_NEAR(ratios[0].ratio, 0.1 / 0.4, 1e-12);
  EXPECT_NEAR(ratios[1].ratio, 0.0, 1e-12);
  EXPECT_TRUE(std::isnan(ratios[2].ratio));
  RunReport rep;
  rep.ratios = ratios;
  EXPECT_NEAR(rep.mean_ratio(), 0.125, 1e-12);
}

TEST(Report, EmptyLogRejected) {
  EXPECT_THROW(build_report({}), ValidationError);
  EXPECT_THROW(cmd_report(fresh_dir("report_empty")), ValidationError);
}

TEST(TestCommand, StrongPortfolioOnEasyInstances) {
  const fs::path dir = fresh_dir("test_cmd");
  const fs::path inst = dir / "instances";
  cmd_gen_instances(InstanceSpace{6, 1'000'000}, 15, 3, kTestIdBase, inst);
  const std::vector<SolverConfig> ap{SolverConfig::from_genes({3, 0, 4, 5, 9})};
  MetricSpec spec{Budget::of_steps(5000), 0.05, 1};
  const auto set = load_instance_dir(inst);
  ASSERT_EQ(set.size(), 15u);
  const auto res = cmd_test(ap, set, spec, 18, 2, std::nullopt, dir);
  EXPECT_EQ(res.applicability, 1.0);

  // The summary is recomputable from the per-instance CSV.
  std::istringstream csv(read_text(dir / "test_instances.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "instance,optimum,best_peo,applicable");
  int rows = 0, applicable = 0;
  while (std::getline(csv, line)) {
    ++rows;
    applicable += line.back() == '1';
  }
  EXPECT_EQ(rows, 15);
  EXPECT_EQ(static_cast<double>(applicable) / rows, read_json(dir / "test_summary.json")["applicability"].get<double>());
}

TEST(TestCommand, EmptyDirectoryRejected) {
  EXPECT_THROW(load_instance_dir(fresh_dir("empty_set")), ValidationError);
  EXPECT_THROW(load_instance_dir("/nonexistent/liangyi"), ValidationError);
}

TEST(Compare, EqualBudgetRows) {
  const RunConfig rc = small_config(24);
  const fs::path dir = fresh_dir("compare");
  const auto trained = cmd_train(rc, dir, 2);
  CompareOptions opt;
  opt.workers = 2;
  const auto rows = cmd_compare({dir}, opt, dir / "cmp.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].method, "liangyi");
  EXPECT_EQ(rows[1].method, "PH_random");
  EXPECT_EQ(rows[2].method, "PH_LiangYi");
  EXPECT_EQ(rows[0].evaluations, trained.training_runs);
  for (const auto& r : rows) EXPECT_LE(r.evaluations, trained.training_runs);
  EXPECT_EQ(read_text(dir / "cmp.csv"), comparison_csv(rows));
}

TEST(Cli, ExitCodes) {
  const fs::path dir = fresh_dir("cli");
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("train --config /nonexistent.toml --out " + dir.string()), 1);
  { std::ofstream(dir / "bad.toml") << "[run]\nn_ip = 10\n[ins]\nres = 0.3\n"; }
  EXPECT_EQ(run_cli("train --config " + (dir / "bad.toml").string() + " --out " + dir.string()), 1);

  EXPECT_EQ(run_cli("gen-instances --n 20 --count 2 --seed 1", "LIANGYI_OUT_DIR=" + (dir / "big").string()), 0);
  EXPECT_EQ(fs::exists(dir / "big"), true);
  std::string first;
  for (const auto& e : fs::directory_iterator(dir / "big")) first = e.path().string();
  EXPECT_EQ(run_cli("solve-one --instance " + first + " --genes 0,0,0,0,0"), 3);

  EXPECT_EQ(run_cli("gen-instances --n 8 --count 1 --seed 1 --out " + (dir / "small").string()), 0);
  for (const auto& e : fs::directory_iterator(dir / "small")) first = e.path().string();
  EXPECT_EQ(run_cli("solve-one --instance " + first + " --genes 1,0,2,3,4"), 0);
  EXPECT_EQ(run_cli("solve-one --instance " + first + " --genes 9,0,2,3,4"), 1);
}

TEST(Cli, TrainAndReportThroughEnv) {
  const fs::path dir = fresh_dir("cli_train");
  {
    std::ofstream(dir / "run.toml") << "[run]\nn_ap = 2\nn_ip = 10\ncycles = 1\nseed = 4\n"
                                       "[alg]\ngenerations = 3\n[ins]\ngenerations = 2\nres = 0.2\n"
                                       "[space]\nn = 8\n[metric]\nbudget = \"steps:60\"\n"
                                       "[analysis]\ntest_set_size = 10\n";
  }
  const std::string env = "LIANGYI_OUT_DIR=" + (dir / "out").string() + " LIANGYI_WORKERS=2";
  EXPECT_EQ(run_cli("train --config " + (dir / "run.toml").string(), env), 0);
  EXPECT_TRUE(fs::exists(dir / "out/final_ap.json"));
  EXPECT_EQ(run_cli("report", env), 0);
  EXPECT_TRUE(fs::exists(dir / "out/reports/summary.json"));
  EXPECT_EQ(run_cli("test --ap " + (dir / "out/final_ap.json").string() + " --n 8 --count 5", ""), 0);
  EXPECT_EQ(run_cli("train --config " + (dir / "run.toml").string(), "LIANGYI_WORKERS=x LIANGYI_OUT_DIR=/tmp/x"), 1);
}
