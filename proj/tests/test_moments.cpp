#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "cannonball/errors.hpp"
#include "cannonball/moments.hpp"
#include "oracle.hpp"

using namespace cannonball;

namespace {

BigInt oracle_moment(std::uint64_t lo, std::uint64_t hi, unsigned k) {
  BigInt s = 0;
  for (std::uint64_t n = lo; n <= hi; ++n) s += pow(oracle::nearest_square(n).second, k);
  return s;
}

}  // namespace

TEST(Moments, GoldenValues) {
  EXPECT_EQ(moment_sum(1, 24, 1), 410);
  EXPECT_EQ(moment_sum(1, 24, 2), 12732);
  EXPECT_EQ(moment_sum(1, 100, 3), BigInt("1009168949"));
  EXPECT_EQ(moment_sum(1, 1000, 1), 3685625);
  EXPECT_EQ(moment(10000, 1).exact, BigInt("1154390467"));
  EXPECT_EQ(moment(10000, 2).exact, BigInt("278299680629547"));
}

TEST(Moments, MatchOracleForEveryOrder) {
  for (unsigned k = 1; k <= kMaxMomentOrder; ++k) {
    EXPECT_EQ(moment_sum(1, 3000, k), oracle_moment(1, 3000, k)) << k;
  }
}

TEST(Moments, LargeIndicesMatchOracle) {
  const std::uint64_t lo = (std::uint64_t{1} << 40) - 50;
  const std::uint64_t hi = (std::uint64_t{1} << 40) + 50;
  for (unsigned k : {1u, 5u, 12u}) EXPECT_EQ(moment_sum(lo, hi, k), oracle_moment(lo, hi, k));
}

TEST(Moments, RangesAddAndWorkersDoNotMatter) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 20; ++i) {
    const std::uint64_t split = 1 + rng() % 49999;
    const unsigned k = 1 + rng() % 4;
    ReductionOptions wide{.workers = 5, .chunk = 1 + rng() % 5000};
    EXPECT_EQ(moment_sum(1, split, k) + moment_sum(split + 1, 50000, k),
              moment_sum(1, 50000, k, wide));
  }
  EXPECT_EQ(moment_sum(10, 9, 1), 0);
}

TEST(Moments, OrderOutsideRangeThrows) {
  EXPECT_THROW(check_moment_order(0), ConfigError);
  EXPECT_THROW(check_moment_order(kMaxMomentOrder + 1), ConfigError);
  EXPECT_THROW(moment(10, 13), ConfigError);
}

TEST(Moments, MainCoefficientClosedForm) {
  EXPECT_NEAR(static_cast<double>(main_coefficient(1)), 1.0 / (5.0 * std::sqrt(3.0)), 1e-15);
  EXPECT_NEAR(static_cast<double>(main_coefficient(2)), 1.0 / 36.0, 1e-15);
  for (unsigned k = 1; k <= 12; ++k) {
    const double e = 1.5 * k;
    const double c = 1.0 / (std::pow(3.0, k / 2.0) * (e + 1) * (k + 1));
    EXPECT_NEAR(static_cast<double>(main_coefficient(k)) / c, 1.0, 1e-13) << k;
  }
}

TEST(Moments, SummaryFieldsAreConsistent) {
  const MomentSummary s = moment(10000, 1);
  EXPECT_EQ(s.x, 10000u);
  EXPECT_EQ(s.k, 1u);
  EXPECT_LT(abs(Real(s.exact) - s.main - s.residual), 1e-20);
  const Real scale = pow(Real(10000), Real(3) / 2 + Real(11) / 12);
  EXPECT_LT(abs(s.normalized * scale - s.residual), 1e-15);
}

TEST(Average, ExactRationalAndMainTerm) {
  const Average a = average(24);
  EXPECT_EQ(a.exact, BigRational(205, 12));
  EXPECT_NEAR(static_cast<double>(a.value), 205.0 / 12.0, 1e-13);
  EXPECT_NEAR(static_cast<double>(a.main), std::pow(24.0, 1.5) / (5 * std::sqrt(3.0)), 1e-11);
  const Average b = summarize_average(24, BigInt(410));
  EXPECT_EQ(b.exact, a.exact);
}

TEST(Sandwich, BinsMatchHighPrecisionDistance) {
  for (unsigned L : {2u, 10u, 100u}) {
    for (std::uint64_t n = 1; n <= 3000; ++n) {
      const Term t = term(n);
      const long double d = std::fabs(static_cast<long double>(sqrt_pyramidal(n) - Real(t.y)));
      unsigned expect = static_cast<unsigned>(std::ceil(d * L));
      if (expect == 0) expect = 1;
      ASSERT_EQ(distance_bin(t, L), expect) << n << " " << L;
    }
  }
}

TEST(Sandwich, BracketHoldsAndRefines) {
  for (unsigned k : {1u, 2u, 5u}) {
    const SandwichResult coarse = sandwich(5000, k, 10);
    const SandwichResult fine = sandwich(5000, k, 100);
    EXPECT_TRUE(coarse.certified());
    EXPECT_TRUE(fine.certified());
    EXPECT_EQ(coarse.exact, moment_sum(1, 5000, k));
    EXPECT_LE(coarse.lower, Real(coarse.exact));
    EXPECT_GE(coarse.upper, Real(coarse.exact));
    EXPECT_LT(fine.relative_width(), coarse.relative_width());
    std::uint64_t total = 0;
    for (auto c : fine.bin_counts) total += c;
    EXPECT_EQ(total, 5000u);
    EXPECT_EQ(fine.bin_counts.size(), 50u);
  }
}

TEST(Sandwich, EndpointsMatchFloatingEvaluation) {
  const unsigned L = 10;
  const unsigned k = 2;
  Real lower = 0;
  Real upper = 0;
  for (std::uint64_t n = 1; n <= 2000; ++n) {
    const Term t = term(n);
    const Real w = pow(sqrt_pyramidal(n) + Real(t.y), k);
    const unsigned j = distance_bin(t, L);
    lower += pow(Real(j - 1) / L, k) * w;
    upper += pow(Real(j) / L, k) * w;
  }
  const SandwichResult r = sandwich(2000, k, L);
  EXPECT_LT(abs(r.lower - lower) / upper, 1e-15);
  EXPECT_LT(abs(r.upper - upper) / upper, 1e-15);
}

TEST(Sandwich, PartialsMergeLikeOneRange) {
  SandwichPartial a = sandwich_partial(1, 3000, 3, 20);
  a.merge(sandwich_partial(3001, 7000, 3, 20, kDefaultSandwichBits, {.workers = 3, .chunk = 100}));
  const SandwichResult merged = finish_sandwich(7000, a);
  const SandwichResult whole = sandwich(7000, 3, 20);
  EXPECT_EQ(merged.lower_num, whole.lower_num);
  EXPECT_EQ(merged.upper_num, whole.upper_num);
  EXPECT_EQ(merged.exact, whole.exact);
}

TEST(Sandwich, RejectsOddOrZeroBinCount) {
  EXPECT_THROW(check_bin_count(0), ConfigError);
  EXPECT_THROW(check_bin_count(7), ConfigError);
  EXPECT_THROW(sandwich(100, 1, 3), ConfigError);
}

TEST(Fit, RecoversSyntheticPowerLaw) {
  std::vector<std::uint64_t> xs = {10, 100, 1000, 10000};
  std::vector<Real> ys;
  for (auto x : xs) ys.push_back(3 * pow(Real(x), Real(7) / 4));
  const FitReport f = fit_loglog(xs, ys);
  EXPECT_NEAR(f.slope, 1.75, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-10);
}

TEST(Fit, TooFewPointsThrows) {
  std::vector<std::uint64_t> xs = {10, 100, 1000};
  std::vector<Real> ys = {Real(1), Real(0), Real(5)};
  EXPECT_THROW(fit_loglog(xs, ys), InsufficientDataError);
}

TEST(Fit, MomentsAtMatchesIndividualRuns) {
  const std::vector<std::uint64_t> xs = {10, 500, 2000, 2001};
  const auto m = moments_at(xs, 2, {.workers = 2, .chunk = 300});
  ASSERT_EQ(m.size(), xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_EQ(m[i], moment_sum(1, xs[i], 2));
}

TEST(Fit, ResidualSlopeBelowErrorExponent) {
  const std::vector<std::uint64_t> xs = {1000, 3000, 10000, 30000, 100000};
  const FitReport f = fit_residual(xs, 1);
  EXPECT_EQ(f.values.size(), xs.size());
  EXPECT_LT(f.slope, 1.5 + 11.0 / 12.0 + 0.1);
}
