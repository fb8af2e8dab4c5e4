#include <gtest/gtest.h>

#include "support.hpp"

TEST(RelfixRandom, SemiNaiveMatchesNaiveOracle) {
  rdis::support::OracleSummary s = rdis::support::check_random_programs(20260101, 100);
  EXPECT_EQ(s.checked, 100);
  EXPECT_EQ(s.mismatches, 0) << s.first_mismatch;
}
