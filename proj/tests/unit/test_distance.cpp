#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bfree/distance.hpp"
#include "oracles.hpp"

using namespace bfree;

namespace {

std::vector<Integer> ints(std::initializer_list<long> v) {
  std::vector<Integer> out;
  for (auto x : v) out.emplace_back(x);
  return out;
}

BSet ex(std::initializer_list<long> v) { return BSet::explicit_set(ints(v)); }

std::vector<std::uint64_t> random_primitive(std::mt19937& gen, std::size_t max_size, std::uint64_t max_elem,
                                            std::uint64_t max_lcm) {
  for (;;) {
    std::vector<Integer> raw;
    std::size_t k = 1 + gen() % max_size;
    for (std::size_t i = 0; i < k; ++i) raw.push_back(from_u64(2 + gen() % (max_elem - 1)));
    auto b = minimal_under_divisibility(raw);
    if (lcm_of(b) > from_u64(max_lcm)) continue;
    std::vector<std::uint64_t> out;
    for (const auto& x : b) out.push_back(to_u64(x));
    return out;
  }
}

}  // namespace

TEST(TrCount, Examples) {
  EXPECT_EQ(t_r_count(ints({2, 3}), Integer(0), ints({2, 3})), 1);
  EXPECT_EQ(t_r_count(ints({4, 6}), Integer(2), {}), 4);
  EXPECT_EQ(t_r_count(ints({2, 3}), Integer(1), {}), 4);
}

TEST(TrCount, MatchesSubsetEnumeration) {
  std::mt19937 gen(3);
  for (int t = 0; t < 200; ++t) {
    auto s = random_primitive(gen, 5, 40, 1'000'000);
    std::uint64_t r = gen() % 200;
    std::vector<Integer> div;
    for (auto x : s)
      if (r % x == 0) div.push_back(from_u64(x));
    // K ranges over subsets of S \ B_{|r}
    std::vector<std::uint64_t> rest;
    for (auto x : s)
      if (r % x != 0) rest.push_back(x);
    std::uint64_t count = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << rest.size()); ++mask) {
      std::uint64_t lk = 1, lc = 1;
      for (auto x : s) {
        bool in_k = false;
        for (std::size_t i = 0; i < rest.size(); ++i)
          if ((mask >> i & 1U) && rest[i] == x) in_k = true;
        if (in_k) {
          lk = std::lcm(lk, x);
        } else {
          lc = std::lcm(lc, x);
        }
      }
      if (r % std::gcd(lk, lc) == 0) ++count;
    }
    EXPECT_EQ(t_r_count(oracle::to_integers(s), from_u64(r), div), count);
  }
}

TEST(DensityUnionShift, Examples) {
  EXPECT_EQ(density_union_shift(ex({4, 6}), Integer(2)), Rational(1, 2));
  EXPECT_EQ(density_union_shift(ex({2, 3}), Integer(0)), Rational(2, 3));
  EXPECT_EQ(density_union_shift(ex({2, 3}), Integer(1)), Rational(1));
}

TEST(D1Shift, Examples) {
  EXPECT_EQ(d1_shift(ex({2, 3}), Integer(1)), Rational(2, 3));
  EXPECT_EQ(d1_shift(ex({2, 3}), Integer(2)), Rational(1, 3));
  EXPECT_EQ(d1_shift(ex({2, 3}), Integer(6)), Rational(0));
  EXPECT_EQ(d1_shift(ex({2, 3}), Integer(-1)), Rational(2, 3));
  EXPECT_THROW(d1_shift(BSet::squarefree(3), Integer(1)), ValidationError);
}

TEST(D1Shift, SubsetCapIsEnforced) {
  std::vector<Integer> b;
  for (long p : {3, 5, 7, 11, 13, 17, 19, 23}) b.emplace_back(2 * p);
  EXPECT_THROW(d1_shift(BSet::explicit_set(b), Integer(1), Caps{4, 100'000'000}), ResourceError);
}

TEST(D1Shift, AgreesWithBruteForceCount) {
  std::mt19937 gen(5);
  for (int t = 0; t < 150; ++t) {
    auto b = random_primitive(gen, 6, 50, 200'000);
    auto bs = BSet::explicit_set(oracle::to_integers(b));
    const auto l = oracle::lcm_u64(b);
    for (int k = 0; k < 8; ++k) {
      std::uint64_t r = gen() % (l + 1);
      ASSERT_EQ(d1_shift(bs, from_u64(r)), oracle::d1(b, r)) << "r=" << r;
    }
  }
}

TEST(D1ShiftCoprime, Examples) {
  auto iv = d1_shift_coprime(ex({4, 9}), Integer(2), 2);
  EXPECT_TRUE(iv.is_point());
  EXPECT_EQ(iv.lo(), Rational(5, 9));
  EXPECT_EQ(iv.lo(), oracle::d1({4, 9}, 2));
  EXPECT_EQ(d1_shift_coprime(ex({2, 3}), Integer(6), 2).lo(), 0);
  EXPECT_EQ(d1_shift_coprime(ex({2, 3}), Integer(3), 2).lo(), Rational(2, 3));
  EXPECT_THROW(d1_shift_coprime(ex({4, 6}), Integer(1), 2), ValidationError);
}

TEST(D1ShiftCoprime, SquarefreeEnclosureContainsTruncations) {
  auto sf = BSet::squarefree(1000);
  auto iv = d1_shift_coprime(sf, Integer(4), 1000);
  EXPECT_LT(iv.lo(), iv.hi());
  // a coarser truncation encloses the same limit
  auto wide = d1_shift_coprime(sf, Integer(4), 50);
  EXPECT_TRUE(wide.overlaps(iv));
  EXPECT_LT(to_double(iv.width()), 1e-3);
  EXPECT_THROW(d1_shift_coprime(BSet::squarefree(2), Integer(100), 2), ValidationError);
}

TEST(D1Oracle, Examples) {
  EXPECT_EQ(d1_oracle_periodic(eta_word(ints({2, 3})), Integer(1)), Rational(2, 3));
  EXPECT_EQ(d1_oracle_periodic(eta_word(ints({2, 3})), Integer(0)), Rational(0));
  EXPECT_EQ(d1_oracle_periodic(eta_word(ints({4, 6})), Integer(2)), Rational(1, 3));
}

TEST(D1Oracle, WordLevelCountMatchesBitwise) {
  std::mt19937 gen(9);
  for (int t = 0; t < 60; ++t) {
    auto b = random_primitive(gen, 4, 200, 50'000);
    auto w = eta_word(oracle::to_integers(b));
    const auto l = w.period();
    for (int k = 0; k < 10; ++k) {
      std::uint64_t r = gen() % (3 * l);
      std::uint64_t c = 0;
      for (std::uint64_t i = 0; i < l; ++i) c += w.get(i) != w.get((i + r) % l);
      Rational want(from_u64(c), from_u64(l));
      want.canonicalize();
      ASSERT_EQ(d1_oracle_periodic(w, from_u64(r)), want);
    }
  }
}

TEST(D1Empirical, Examples) {
  CodedWord x{-5, {1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0}};
  EXPECT_EQ(d1_empirical(x, x, 5), 0.0);
  CodedWord y = x;
  for (auto& v : y.bits) v = 1 - v;
  EXPECT_EQ(d1_empirical(x, y, 5), 1.0);
  // [2,3] word against its shift by 1 over n = 6000 (2n+1 = 12001 positions)
  auto w = eta_word(ints({2, 3}));
  CodedWord a{-6000, {}}, b{-6000, {}};
  for (long i = -6000; i <= 6000; ++i) {
    a.bits.push_back(w.at(Integer(i)));
    b.bits.push_back(w.at(Integer(i + 1)));
  }
  double e = d1_empirical(a, b, 6000);
  EXPECT_NEAR(e, 2.0 / 3.0, 1.0 / 12001);
  CodedWord shorter{-5, {1, 0}};
  EXPECT_THROW(d1_empirical(x, shorter, 5), ValidationError);
}

TEST(DistanceProfile, Examples) {
  auto p = distance_profile(ex({2, 3}), 5);
  std::vector<Rational> want{0, Rational(2, 3), Rational(1, 3), Rational(2, 3), Rational(1, 3), Rational(2, 3)};
  EXPECT_EQ(p.values, want);
  EXPECT_TRUE(p.formula_path);
  EXPECT_TRUE(p.oracle_path);
  auto q = distance_profile(ex({2}), 1);
  EXPECT_EQ(q.values, (std::vector<Rational>{0, 1}));
  auto full = distance_profile(ex({4, 6}), 100);
  EXPECT_EQ(full.values.size(), 12u);
  EXPECT_EQ(full.at(6), d1_shift(ex({4, 6}), Integer(6)));
}

TEST(DistanceProfile, Invariants) {
  std::mt19937 gen(13);
  for (int t = 0; t < 80; ++t) {
    auto b = random_primitive(gen, 5, 50, 20'000);
    auto bs = BSet::explicit_set(oracle::to_integers(b));
    auto p = distance_profile(bs, 1'000'000);
    ASSERT_TRUE(p.complete());
    const auto l = p.period;
    Rational d = density_MB(bs);
    Rational cap = 2 * std::min(d, Rational(Rational(1) - d));
    EXPECT_EQ(p.values[0], 0);
    for (std::uint64_t r = 1; r < l; ++r) {
      EXPECT_EQ(p.values[r], p.values[l - r]);
      EXPECT_GE(p.values[r], 0);
      EXPECT_LE(p.values[r], cap);
    }
  }
}

TEST(DistanceProfile, LogarithmicWeightsAgree) {
  // sum_{i<=N} (1_M(i) - d) / i converges, so the harmonic-weighted frequency of
  // M_B tends to d(M_B); check that the partial sums have settled
  for (auto b : {std::vector<std::uint64_t>{2, 3}, {4, 6}, {6, 10, 15}}) {
    const auto l = oracle::lcm_u64(b);
    const long double d = to_double(density_MB(oracle::to_integers(b)));
    long double sum = 0, at_half = 0;
    for (std::uint64_t i = 1; i <= 2000 * l; ++i) {
      sum += ((oracle::is_free(i, b) ? 0.0L : 1.0L) - d) / static_cast<long double>(i);
      if (i == 1000 * l) at_half = sum;
    }
    EXPECT_LT(std::fabs(static_cast<double>(sum - at_half)), 1e-3);
  }
}

TEST(ReduceR, Examples) {
  EXPECT_EQ(reduce_r(ex({2, 3}), Integer(4)), 2);
  EXPECT_EQ(reduce_r(ex({2, 3}), Integer(5)), 1);
  EXPECT_EQ(reduce_r(ex({2, 3}), Integer(6)), 6);
  EXPECT_THROW(reduce_r(ex({2, 3}), Integer(0)), ValidationError);
  EXPECT_THROW(reduce_r(ex({4, 6}), Integer(2)), ValidationError);
}

TEST(ShiftEngine, GenericPathForMoreThanTwelveElements) {
  // ten pairwise products of {2,3,5,7,11} plus three primes: 13 elements
  std::vector<std::uint64_t> b;
  const std::uint64_t ps[] = {2, 3, 5, 7, 11};
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) b.push_back(ps[i] * ps[j]);
  for (std::uint64_t p : {13, 17, 19}) b.push_back(p);
  ShiftDistanceEngine eng(oracle::to_integers(b));
  for (std::uint64_t r : {1ULL, 6ULL, 35ULL, 2ULL * 13 * 17}) EXPECT_EQ(eng.d1(from_u64(r)), oracle::d1(b, r)) << r;
}
