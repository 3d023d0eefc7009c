#include <gtest/gtest.h>

#include "properties.hpp"

using namespace liangyi::testing;

namespace {

void expect_all_ok(const std::vector<PropertyResult>& results) {
  ASSERT_FALSE(results.empty());
  for (const auto& r : results)
    EXPECT_TRUE(r.ok()) << r.name << ": " << r.failures << "/" << r.cases << " failed, first: " << r.first_failure;
}

}  // namespace

TEST(Properties, Domain) { expect_all_ok(domain_properties(1001, 200)); }
TEST(Properties, Solver) { expect_all_ok(solver_properties(1002, 200)); }
TEST(Properties, Oracle) { expect_all_ok(oracle_properties(1003, 200)); }
TEST(Properties, Metrics) { expect_all_ok(metrics_properties(1004, 200)); }
TEST(Properties, Coevo) { expect_all_ok(coevo_properties(1005, 200)); }
TEST(Properties, Baseline) { expect_all_ok(baseline_properties(1006, 200)); }
TEST(Properties, Harness) { expect_all_ok(harness_properties(1007, 200)); }
