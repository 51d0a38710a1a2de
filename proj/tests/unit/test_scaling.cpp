#include <gtest/gtest.h>

#include <cmath>

#include "bfree/covering.hpp"
#include "bfree/scaling.hpp"
#include "oracles.hpp"

using namespace bfree;

namespace {

ToeplitzRule kappa_rule(Rational kappa) {
  ToeplitzRule r;
  r.r_rule = ToeplitzRule::RRule::kappa;
  r.kappa = std::move(kappa);
  return r;
}

Integer square_product(std::size_t n) {
  Integer l = 1;
  for (auto p : first_primes(n)) l *= from_u64(p * p);
  return l;
}

}  // namespace

TEST(ToeplitzFamily, BigMExamples) {
  auto f = ToeplitzFamily::make(ToeplitzRule{}, 6);
  EXPECT_EQ(f.big_m(1), Rational(3, 2));
  EXPECT_EQ(f.big_m(2), Rational(5, 2));
  EXPECT_EQ(f.big_m(3), Rational(5, 2));
  EXPECT_EQ(ToeplitzFamily::make(kappa_rule(Rational(1)), 3).big_m(2), Rational(5, 2));
  EXPECT_THROW(f.big_m(6), ValidationError);
  EXPECT_EQ(f.b(1), 6);
  EXPECT_EQ(f.b(2), 20);
  EXPECT_EQ(f.ell(2), 60);
}

TEST(ToeplitzFamily, KappaRuleExponents) {
  auto f = ToeplitzFamily::make(kappa_rule(Rational(1)), 4);
  // floor(log2 3) = 1, floor(log2 15) = 3, floor(log2 105) = 6, floor(log2 1155) = 10
  EXPECT_EQ(f.r(1), 1u);
  EXPECT_EQ(f.r(2), 3u);
  EXPECT_EQ(f.r(3), 6u);
  EXPECT_EQ(f.r(4), 10u);
  auto h = ToeplitzFamily::make(kappa_rule(Rational(1, 2)), 3);
  EXPECT_EQ(h.r(1), 1u);  // floor(log2(3)/2) = 0, bumped to 1
  EXPECT_EQ(h.r(2), 2u);  // floor(log2(15)/2) = 1, bumped to 2
  EXPECT_EQ(h.r(3), 3u);
}

TEST(ToeplitzEps, MatchesFiniteTruncationDistance) {
  for (auto rule : {ToeplitzRule{}, kappa_rule(Rational(1))}) {
    for (std::size_t n = 1; n <= 3; ++n) {
      const std::size_t tail = n + 5;
      auto f = ToeplitzFamily::make(rule, tail + 1);
      auto eps = toeplitz_eps(f, n, tail);
      auto bs = f.prefix.b();
      std::vector<Integer> trunc(bs.begin(), bs.begin() + static_cast<long>(tail));
      Rational direct = d1_shift(BSet::explicit_set(trunc), f.ell(n));
      EXPECT_EQ(eps.lo(), direct) << "n=" << n;
      EXPECT_GT(eps.hi(), eps.lo());
    }
  }
}

TEST(ToeplitzEps, SmallCaseAgainstPeriodCount) {
  // b = 6, 20, 56: the period is small enough to count directly
  auto f = ToeplitzFamily::make(ToeplitzRule{}, 4);
  auto eps = toeplitz_eps(f, 1, 3);
  EXPECT_EQ(eps.lo(), oracle::d1({6, 20, 56}, 6));
}

TEST(ToeplitzEps, DecreasingAndValidated) {
  auto f = ToeplitzFamily::make(kappa_rule(Rational(1)), 60);
  Rational prev = 2;
  for (std::size_t n = 1; n <= 12; ++n) {
    auto e = toeplitz_eps(f, n, n + 40);
    EXPECT_LT(e.hi(), prev);
    prev = e.lo();
  }
  EXPECT_THROW(toeplitz_eps(f, 0, 5), ValidationError);
  EXPECT_THROW(toeplitz_eps(f, 5, 4), ValidationError);
  EXPECT_THROW(toeplitz_eps(f, 5, 60), ValidationError);
  EXPECT_THROW(toeplitz_eps(f, 5, 6, Rational(1, 1000000)), ValidationError);
}

TEST(ToeplitzEps, LowerGapBoundsEpsLowerOfTruncation) {
  for (std::size_t n = 1; n <= 3; ++n) {
    const std::size_t tail = n + 4;
    auto f = ToeplitzFamily::make(ToeplitzRule{}, tail + 1);
    auto bs = f.prefix.b();
    std::vector<Integer> trunc(bs.begin(), bs.begin() + static_cast<long>(tail));
    auto b = BSet::explicit_set(trunc);
    Rational eps = d1_shift(b, f.ell(n));
    Rational lower = eps_lower(b, to_u64(f.ell(n)));
    EXPECT_GE(lower, eps / f.big_m(n)) << "n=" << n;
  }
}

TEST(ToeplitzScaling, RowsAndFits) {
  auto sc = toeplitz_scaling(kappa_rule(Rational(1)), 3, 12);
  ASSERT_EQ(sc.rows.size(), 10u);
  for (const auto& row : sc.rows) {
    EXPECT_EQ(row.upper_eps.lo(), 2 * row.eps.lo());
    EXPECT_NEAR(row.log_ell, std::log(to_double(Rational(row.ell))), 1e-9 * row.log_ell);
  }
  EXPECT_GT(sc.upper.fit.exponent, 1.0);
  EXPECT_GT(sc.lower.fit.exponent, 1.0);
  EXPECT_THROW(toeplitz_scaling(kappa_rule(Rational(1)), 0, 3), ValidationError);
}

TEST(Squarefree, EpsMatchesClosedFormOnTruncations) {
  // the closed form on a finite coprime set against a direct period count
  auto b = BSet::explicit_set({Integer(4), Integer(9), Integer(25), Integer(49)});
  for (std::size_t n = 1; n <= 3; ++n) {
    Integer l = square_product(n);
    EXPECT_EQ(d1_shift_coprime(b, l, 4).lo(), oracle::d1({4, 9, 25, 49}, to_u64(l)));
  }
}

TEST(Squarefree, EpsEnclosureAgreesWithShiftEnclosure) {
  const std::size_t tail = 400;
  auto sf = BSet::squarefree(tail);
  for (std::size_t n = 1; n <= 4; ++n) {
    auto e = squarefree_eps(n, tail);
    auto d = d1_shift_coprime(sf, square_product(n), tail);
    EXPECT_TRUE(e.overlaps(d)) << "n=" << n;
  }
}

TEST(Squarefree, RowsMatchSingleEvaluations) {
  auto rows = squarefree_eps_rows({3, 7, 5}, 300);
  EXPECT_EQ(rows[0], squarefree_eps(3, 300));
  EXPECT_EQ(rows[1], squarefree_eps(7, 300));
  EXPECT_EQ(rows[2], squarefree_eps(5, 300));
  EXPECT_LT(rows[1].hi(), rows[2].lo());
  EXPECT_THROW(squarefree_eps(10, 10), ValidationError);
}

TEST(Squarefree, TailConstant) {
  EXPECT_EQ(detail::squarefree_tail(7), Rational(1, 16));
  EXPECT_EQ(detail::squarefree_tail(2), Rational(1, 4));
}

TEST(Squarefree, LogEllIsTwiceLogPrimorial) {
  auto l = squarefree_log_ell({1, 2, 5});
  EXPECT_NEAR(l[0], 2 * std::log(2.0), 1e-14);
  EXPECT_NEAR(l[1], 2 * std::log(6.0), 1e-14);
  EXPECT_NEAR(l[2], 2 * std::log(2310.0), 1e-13);
}

TEST(Reference, TwelveOverPiSquared) {
  auto r = reference_twelve_over_pi2(20000);
  const double want = 12.0 / (M_PI * M_PI);
  EXPECT_LE(to_double(r.lo()), want + 1e-15);
  EXPECT_GE(to_double(r.hi()), want - 1e-15);
  EXPECT_LT(to_double(r.width()), 1e-8);
}

TEST(Fits, SyntheticPowerLawIsRecovered) {
  std::vector<ScalingPoint> pts;
  for (int k = 1; k <= 10; ++k) {
    Rational e = make_rational(1, pow2(static_cast<unsigned long>(k)));
    pts.push_back({k, RationalInterval(e), 2.5 * k * std::log(2.0), "synthetic"});
  }
  auto f = fit_dimensional_exponent(pts);
  EXPECT_NEAR(f.exponent, 2.5, 1e-12);
  EXPECT_EQ(f.first, 2u);
  EXPECT_EQ(f.last, 10u);
  EXPECT_LT(f.residual_norm, 1e-10);
  auto all = fit_dimensional_exponent(pts, FitWindow{0, 10});
  EXPECT_NEAR(all.exponent, 2.5, 1e-12);
}

TEST(Fits, SyntheticPowerExponentialIsRecovered) {
  std::vector<ScalingPoint> pts;
  for (int k = 1; k <= 8; ++k) {
    double inv = std::ldexp(1.0, k);
    pts.push_back({k, RationalInterval(make_rational(1, pow2(static_cast<unsigned long>(k)))), std::pow(inv, 0.75), "s"});
  }
  EXPECT_NEAR(fit_power_exponential_exponent(pts).exponent, 0.75, 1e-12);
}

TEST(Fits, Errors) {
  std::vector<ScalingPoint> two{{1, RationalInterval(Rational(1, 2)), 1.0, ""}, {2, RationalInterval(Rational(1, 4)), 2.0, ""}};
  EXPECT_THROW(fit_dimensional_exponent(two), ValidationError);
  std::vector<ScalingPoint> same(4, ScalingPoint{1, RationalInterval(Rational(1, 2)), 1.0, ""});
  EXPECT_THROW(fit_dimensional_exponent(same), ValidationError);
  std::vector<ScalingPoint> zero(4, ScalingPoint{1, RationalInterval(Rational(0)), 1.0, ""});
  EXPECT_THROW(fit_dimensional_exponent(zero), ValidationError);
  std::vector<ScalingPoint> neg;
  for (int k = 1; k <= 4; ++k) neg.push_back({k, RationalInterval(Rational(1, k + 1)), -1.0, ""});
  EXPECT_THROW(fit_power_exponential_exponent(neg), ValidationError);
  EXPECT_THROW(fit_dimensional_exponent(neg, FitWindow{3, 2}), ValidationError);
}
