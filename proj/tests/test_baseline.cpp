#include <gtest/gtest.h>

#include "liangyi/baseline/two_stage.hpp"
#include "support.hpp"

using namespace liangyi;
using namespace liangyi::testing;

namespace {

std::vector<TspInstance> training_set(std::uint64_t seed, int count, int n = 9) {
  Rng rng = make_rng(seed);
  std::vector<TspInstance> out;
  for (int i = 0; i < count; ++i) out.push_back(random_instance(rng, n, 1'000'000, i + 1));
  return out;
}

std::vector<SolverConfig> pool_of(std::uint64_t seed, int count) {
  Rng rng = make_rng(seed);
  std::set<SolverConfig> picked;
  while (static_cast<int>(picked.size()) < count) picked.insert(random_config(rng));
  return {picked.begin(), picked.end()};
}

}  // namespace

TEST(Baseline, CandidateOrdering) {
  using detail::Candidate;
  const SolverConfig lo = SolverConfig::from_rank(3), hi = SolverConfig::from_rank(9);
  EXPECT_TRUE(detail::better(Candidate{hi, 0.2, 0.1}, Candidate{lo, 0.1, 0.9}));
  EXPECT_TRUE(detail::better(Candidate{hi, 0.1, 0.5}, Candidate{lo, 0.1, 0.4}));
  EXPECT_TRUE(detail::better(Candidate{lo, 0.1, 0.5}, Candidate{hi, 0.1, 0.5}));
  EXPECT_FALSE(detail::better(Candidate{hi, 0.1, 0.5}, Candidate{lo, 0.1, 0.5}));
}

TEST(Baseline, SizeOnePicksBestSoloConfig) {
  const auto training = training_set(71, 12);
  const auto pool = pool_of(72, 20);
  OptimumStore oracle;
  Evaluator eval(MetricSpec{}, oracle, 2);
  BaselineConfig bc{training, 1, static_cast<long long>(pool.size() * training.size()),
                    SearchStrategy::random_search, pool};
  Rng rng = make_rng(73);
  const auto res = build_portfolio(bc, eval, rng);
  ASSERT_EQ(res.ap.size(), 1u);
  double best = -1;
  for (const auto& cfg : pool) {
    const std::vector<SolverConfig> one{cfg};
    best = std::max(best, eval.perf_ap_set(std::span<const SolverConfig>(one), training));
  }
  EXPECT_EQ(res.iterations[0].solo, best);
  EXPECT_EQ(res.iterations[0].marginal, best);
}

// Exhaustive greedy over a 64-config pool, recomputed from a plain
// applicability table.
TEST(Baseline, ExhaustiveGreedyMatchesTable) {
  const auto training = training_set(74, 15);
  const auto pool = pool_of(75, 64);
  OptimumStore oracle;
  Evaluator eval(MetricSpec{}, oracle, 4);
  Rows table;
  for (const auto& cfg : pool) {
    std::vector<double> row;
    for (const auto& ins : training) row.push_back(eval.perf_alg_instance(cfg, ins));
    table.push_back(row);
  }

  std::vector<double> covered(training.size(), 0.0);
  std::vector<SolverConfig> expected;
  for (int it = 0; it < 4; ++it) {
    double base = 0;
    for (double c : covered) base += c;
    base /= covered.size();
    std::size_t pick = 0;
    double pick_gain = -1, pick_solo = -1;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      double with = 0, solo = 0;
      for (std::size_t c = 0; c < covered.size(); ++c) {
        with += std::max(covered[c], table[i][c]);
        solo += table[i][c];
      }
      const double gain = with / covered.size() - base;
      solo /= covered.size();
      if (gain > pick_gain || (gain == pick_gain && (solo > pick_solo || (solo == pick_solo && pool[i] < pool[pick])))) {
        pick = i;
        pick_gain = gain;
        pick_solo = solo;
      }
    }
    expected.push_back(pool[pick]);
    for (std::size_t c = 0; c < covered.size(); ++c) covered[c] = std::max(covered[c], table[pick][c]);
  }

  BaselineConfig bc{training, 4, static_cast<long long>(64 * training.size()), SearchStrategy::random_search, pool};
  Rng rng = make_rng(76);
  const auto res = build_portfolio(bc, eval, rng);
  EXPECT_EQ(res.ap, expected);
  for (const auto& it : res.iterations) EXPECT_EQ(it.configs_tried, 64);
}

TEST(Baseline, EvaluationsRespectBudget) {
  const auto training = training_set(77, 10);
  OptimumStore oracle;
  Evaluator eval(MetricSpec{}, oracle);
  for (auto strategy : {SearchStrategy::random_search, SearchStrategy::local_search_on_genes}) {
    BaselineConfig bc{training, 3, 95, strategy, std::nullopt};
    EXPECT_EQ(bc.configs_per_iteration(), 9);
    Rng rng = make_rng(78);
    const auto res = build_portfolio(bc, eval, rng);
    ASSERT_EQ(res.ap.size(), 3u);
    for (const auto& it : res.iterations) {
      EXPECT_LE(it.configs_tried, 9);
      EXPECT_LE(it.evaluations, 95);
    }
    // Applicability on the training set never drops as members are added.
    for (std::size_t i = 1; i < res.iterations.size(); ++i)
      EXPECT_GE(res.iterations[i].p_after, res.iterations[i - 1].p_after);
  }
}

TEST(Baseline, IdenticalPortfoliosGiveZeroDelta) {
  const auto test = training_set(79, 20);
  OptimumStore oracle;
  Evaluator eval(MetricSpec{}, oracle);
  const auto ap = pool_of(80, 3);
  const auto c = compare_runs(5, ap, 100, ap, 100, "PH_random", test, eval);
  EXPECT_EQ(c.delta_applicability, 0.0);
  EXPECT_EQ(c.delta_mean_peo, 0.0);
  EXPECT_EQ(c.baseline.method, "PH_random");
}

TEST(Baseline, ComparisonCsvLayout) {
  const std::vector<ComparisonRow> rows{{1, "liangyi", 0.75, 0.5, 100}, {1, "PH_random", 0.5, 1.25, 100}};
  const std::string csv = comparison_csv(rows);
  EXPECT_EQ(csv,
            "run_seed,method,applicability,mean_peo,evaluations\n"
            "1,liangyi,0.75,0.5,100\n"
            "1,PH_random,0.5,1.25,100\n");
}

TEST(Baseline, InvalidConfigRejected) {
  const auto training = training_set(81, 10);
  OptimumStore oracle;
  Evaluator eval(MetricSpec{}, oracle);
  Rng rng = make_rng(82);
  EXPECT_THROW(build_portfolio(BaselineConfig{{}, 2, 100, SearchStrategy::random_search, std::nullopt}, eval, rng), ValidationError);
  EXPECT_THROW(build_portfolio(BaselineConfig{training, 0, 100, SearchStrategy::random_search, std::nullopt}, eval, rng), ValidationError);
  EXPECT_THROW(build_portfolio(BaselineConfig{training, 2, 5, SearchStrategy::random_search, std::nullopt}, eval, rng), ValidationError);
  EXPECT_THROW(build_portfolio(BaselineConfig{training, 2, 100, SearchStrategy::local_search_on_genes,
                                              pool_of(83, 4)},
                               eval, rng),
               ValidationError);
  EXPECT_THROW(strategy_from_string("annealing"), ValidationError);
}
