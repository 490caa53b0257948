#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "cannonball/minimax.hpp"

using namespace cannonball;

namespace {

Rational R(long long n, long long d = 1) { return Rational(n, d); }

// min over a dense log grid of max(F, G_1, ...).
double grid_minimum(const MinMaxProblem& p, int points = 100000) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double t = p.lo * std::pow(p.hi / p.lo, static_cast<double>(i) / (points - 1));
    double h = p.F(t);
    for (const auto& g : p.Gs) h = std::max(h, g(t));
    best = std::min(best, h);
  }
  return best;
}

}  // namespace

TEST(Rationals, ParseSums) {
  EXPECT_EQ(parse_rational_sum("3/2"), R(3, 2));
  EXPECT_EQ(parse_rational_sum("-1/2"), R(-1, 2));
  EXPECT_EQ(parse_rational_sum("3/2+1"), R(5, 2));
  EXPECT_EQ(parse_rational_sum("5/2-1/12"), R(29, 12));
  EXPECT_EQ(parse_rational_sum(" 2 "), R(2));
  EXPECT_THROW(parse_rational_sum(""), std::invalid_argument);
  EXPECT_THROW(parse_rational_sum("1/0"), std::invalid_argument);
  EXPECT_THROW(parse_rational_sum("a/2"), std::invalid_argument);
  EXPECT_EQ(to_string(R(29, 12)), "29/12");
  EXPECT_EQ(to_string(R(-3)), "-3");
}

TEST(Monomials, ParseMultiplyAndSubstitute) {
  const Monomial m = Monomial::parse("x:3/2+1,K:-1/2");
  EXPECT_EQ(m.exponent("x"), R(5, 2));
  EXPECT_EQ(m.exponent("K"), R(-1, 2));
  EXPECT_EQ(m.exponent("L"), R(0));
  EXPECT_EQ(m.to_string(), "K:-1/2,x:5/2");
  EXPECT_EQ(Monomial::parse("x:1,x:-1").to_string(), "1");
  const Monomial sub = m.substitute("K", Monomial::parse("x:1/6"));
  EXPECT_EQ(sub.to_string(), "x:29/12");
  EXPECT_TRUE((m * m.pow(R(-1))).same_exponents(Monomial{}));
  EXPECT_THROW(Monomial::parse("x"), std::invalid_argument);
  EXPECT_THROW(Monomial::parse("x:1,:2"), std::invalid_argument);
}

TEST(Monomials, Domination) {
  const Monomial a = Monomial::parse("x:2,K:-1");
  const Monomial b = Monomial::parse("x:2,K:1");
  const Monomial c = Monomial::parse("x:3,K:1");
  EXPECT_TRUE(a.dominated_by(b, "K"));
  EXPECT_FALSE(b.dominated_by(a, "K"));
  EXPECT_FALSE(a.dominated_by(c, "K"));
}

TEST(Exponents, BalancesFirstMomentTruncation) {
  const auto sol = solve_exponents(Monomial::parse("x:5/2,K:-1/2"),
                                   {Monomial::parse("x:19/8,K:1/4")}, "K");
  ASSERT_TRUE(sol.active.has_value());
  EXPECT_EQ(sol.argmin().to_string(), "x:1/6");
  EXPECT_EQ(sol.value().exponent("x"), R(29, 12));
}

TEST(Exponents, ChunkCountHasExpectedShape) {
  for (long long k = 1; k <= 3; ++k) {
    const MomentErrorChain c = moment_error_chain(R(k));
    const Monomial& M = c.eliminate_m.argmin();
    EXPECT_EQ(M.exponent("K"), R(1, 4));
    EXPECT_EQ(M.exponent("x"), R(3, 8));
    EXPECT_EQ(M.exponent("L"), R(-1, 2));
    EXPECT_EQ(M.exponents().size(), 3u);
  }
}

TEST(Exponents, ChainReachesErrorExponent) {
  for (long long k = 1; k <= 6; ++k) {
    const MomentErrorChain c = moment_error_chain(R(k));
    EXPECT_EQ(c.final_exponent(), R(3 * k, 2) + R(11, 12)) << k;
    EXPECT_EQ(c.eliminate_k.argmin().to_string(), "x:1/6");
  }
  // Non-integer orders go through the same algebra.
  EXPECT_EQ(moment_error_chain(R(1, 2)).final_exponent(), R(3, 4) + R(11, 12));
}

TEST(Exponents, UnorderableCrossingsHaveNoArgmin) {
  const auto sol = solve_exponents(Monomial::parse("L:-1,x:2"),
                                   {Monomial::parse("L:1,K:1"), Monomial::parse("L:1,x:1")}, "L");
  EXPECT_FALSE(sol.active.has_value());
  EXPECT_THROW(sol.argmin(), std::logic_error);
  EXPECT_EQ(sol.crossings.size(), 2u);
}

TEST(Exponents, PicksSmallestCrossing) {
  const auto sol = solve_exponents(Monomial::parse("t:-1,x:2"),
                                   {Monomial::parse("t:1,x:1"), Monomial::parse("t:1")}, "t");
  // crossings t = x^(1/2) and t = x; the smaller one binds.
  ASSERT_TRUE(sol.active.has_value());
  EXPECT_EQ(sol.argmin().to_string(), "x:1/2");
  EXPECT_EQ(sol.value().to_string(), "x:3/2");
}

TEST(Exponents, InvalidProblems) {
  EXPECT_THROW(solve_exponents(Monomial::parse("K:1"), {Monomial::parse("K:1")}, "K"),
               InvalidProblemError);
  EXPECT_THROW(solve_exponents(Monomial::parse("K:-1"), {}, "K"), InvalidProblemError);
  EXPECT_THROW(solve_exponents(Monomial::parse("K:-1"), {Monomial::parse("K:-2")}, "K"),
               InvalidProblemError);
}

TEST(Numeric, MatchesDenseGrid) {
  MinMaxProblem p;
  p.F = [](double t) { return 1e6 / t; };
  p.Gs = {[](double t) { return t * t; }, [](double t) { return 50 * t; }};
  p.lo = 1e-3;
  p.hi = 1e6;
  const NumericSolution s = solve_numeric(p);
  // 1e6/t = 50t at t = sqrt(2e4) ~ 141.4 while t^2 crosses at 100: that binds.
  EXPECT_NEAR(s.argmin, 100.0, 1e-8);
  EXPECT_NEAR(s.value, 1e4, 1e-6);
  EXPECT_EQ(s.active, 0u);
  EXPECT_EQ(s.crossings.size(), 2u);
  const double grid = grid_minimum(p);
  EXPECT_GE(grid, s.value * (1 - 1e-9));
  EXPECT_LE(grid, s.value * (1 + 1e-3));
  EXPECT_TRUE(verify_solution(p, s));
}

TEST(Numeric, AgreesWithExponentMode) {
  const Monomial F = Monomial::parse("x:5/2,K:-1/2");
  const Monomial G = Monomial::parse("x:19/8,K:1/4");
  const std::map<std::string, double> env = {{"x", 1e6}};
  MinMaxProblem p;
  p.F = monomial_function(F, "K", env);
  p.Gs = {monomial_function(G, "K", env)};
  p.lo = 1e-6;
  p.hi = 1e12;
  const NumericSolution s = solve_numeric(p);
  EXPECT_NEAR(s.argmin / std::pow(1e6, 1.0 / 6), 1.0, 1e-9);
  EXPECT_NEAR(std::log(s.value) / std::log(1e6), 29.0 / 12, 1e-9);
  EXPECT_GE(grid_minimum(p), s.value * (1 - 1e-9));
}

TEST(Numeric, RejectsNonMonotoneInputs) {
  MinMaxProblem p;
  p.F = [](double t) { return t; };
  p.Gs = {[](double t) { return t; }};
  p.lo = 1;
  p.hi = 10;
  EXPECT_THROW(validate_problem(p), InvalidProblemError);
  p.F = [](double t) { return 1 / t; };
  p.Gs = {[](double t) { return std::sin(t); }};
  p.hi = 100;
  EXPECT_THROW(validate_problem(p), InvalidProblemError);
  p.Gs = {[](double t) { return t; }};
  p.lo = 0;
  EXPECT_THROW(solve_numeric(p), InvalidProblemError);
}

TEST(Numeric, NoCrossingInsideDomain) {
  MinMaxProblem p;
  p.F = [](double t) { return 1 / t; };
  p.Gs = {[](double t) { return t; }, [](double t) { return 1e-9 * t; }};
  p.lo = 0.5;
  p.hi = 100;
  try {
    solve_numeric(p);
    FAIL() << "expected NoCrossingError";
  } catch (const NoCrossingError& e) {
    EXPECT_EQ(e.index(), 1u);
  }
}

TEST(Numeric, VerifyRejectsWrongAnswer) {
  MinMaxProblem p;
  p.F = [](double t) { return 1 / t; };
  p.Gs = {[](double t) { return t; }};
  p.lo = 0.01;
  p.hi = 100;
  NumericSolution s = solve_numeric(p);
  EXPECT_TRUE(verify_solution(p, s));
  s.argmin = 2;
  s.value = 0.5;
  EXPECT_FALSE(verify_solution(p, s));
}
