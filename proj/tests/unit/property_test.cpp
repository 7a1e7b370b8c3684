#include <gtest/gtest.h>

#include "test_support.hpp"

namespace gshape::testing {
namespace {

constexpr std::size_t kCases = 1000;

void expect_ok(const PropertyOutcome& r) {
  EXPECT_GE(r.cases, kCases);
  EXPECT_TRUE(r.ok()) << r.failures << " failures, first: " << r.first_failure;
}

TEST(Properties, MomentsScaleCovariance) { expect_ok(check_moments_scale_covariance(kCases, 101)); }
TEST(Properties, MomentBounds) { expect_ok(check_moment_bounds(kCases, 102)); }
TEST(Properties, MbEntropyMonotone) { expect_ok(check_mb_entropy_monotone(kCases, 103)); }
TEST(Properties, NormalizeIdempotent) { expect_ok(check_normalize_idempotent(kCases, 104)); }
TEST(Properties, FileRoundTrip) { expect_ok(check_file_round_trip(kCases, 105)); }

}  // namespace
}  // namespace gshape::testing
