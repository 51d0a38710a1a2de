#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bfree/golden.hpp"
#include "oracles.hpp"

using namespace bfree;

namespace {

const QSqrt5 kAlpha = QSqrt5::alpha();
QSqrt5 q(long n, long d = 1) { return QSqrt5(Rational(n, d)); }

// x in (-delta, 0] for bit 1, x in (0, delta] for bit 0
bool in_half(const QSqrt5& x, const QSqrt5& delta, std::uint8_t bit) {
  if (bit) return -delta < x && x <= QSqrt5();
  return QSqrt5() < x && x <= delta;
}

}  // namespace

TEST(QSqrt5, GoldenIdentities) {
  EXPECT_EQ(kAlpha * kAlpha + kAlpha - q(1), QSqrt5());
  EXPECT_EQ(kAlpha * QSqrt5::phi(), q(1));
  for (unsigned m = 0; m <= 30; ++m)
    for (unsigned k = 0; k + m <= 60; k += 7) EXPECT_EQ(kAlpha.pow(m) * kAlpha.pow(k), kAlpha.pow(m + k));
  EXPECT_EQ(QSqrt5::sqrt5().norm(), -5);
}

TEST(QSqrt5, ExactSignAndFloor) {
  EXPECT_EQ(kAlpha.sign(), 1);
  EXPECT_EQ((kAlpha - q(618034, 1000000)).sign(), -1);
  EXPECT_EQ((kAlpha - q(618033, 1000000)).sign(), 1);
  // 1 - alpha^2 - alpha = 0 exactly
  EXPECT_EQ((q(1) - kAlpha * kAlpha - kAlpha).sign(), 0);
  EXPECT_EQ((q(2) * kAlpha).floor(), 1);
  EXPECT_EQ((-kAlpha).floor(), -1);
  auto e = kAlpha.pow(40).enclose(200);
  EXPECT_TRUE(e.lo() < e.hi());
  EXPECT_NEAR(to_double(e.lo()), std::pow(0.6180339887498949, 40), 1e-20);
}

TEST(Fibonacci, DataExamples) {
  auto d0 = fibonacci_data(0);
  EXPECT_EQ(d0.q, 1);
  EXPECT_EQ(d0.p, 0);
  EXPECT_EQ(d0.theta, kAlpha);
  EXPECT_EQ(fibonacci_data(5).q, 8);
  EXPECT_EQ(fibonacci_data(2).c_qn, q(2) * kAlpha - q(1));
  EXPECT_EQ(fib_q(10), 89);
  EXPECT_THROW(fib_q_u64(91), ResourceError);
}

TEST(Fibonacci, ThetaIdentities) {
  for (std::size_t n = 0; n <= 40; ++n) {
    auto d = fibonacci_data(n);
    EXPECT_EQ(d.theta, kAlpha.pow(n + 1));
    QSqrt5 diff = QSqrt5(Rational(d.q)) * kAlpha - QSqrt5(Rational(d.p));
    EXPECT_EQ(n % 2 == 0 ? diff : -diff, d.theta) << n;
    if (n >= 1) {
      EXPECT_EQ(centered(d.c_qn), n % 2 == 0 ? d.theta : -d.theta);
      EXPECT_TRUE(d.j.contains(centered(d.c_qn)));
    }
  }
}

TEST(Omega, SegmentsContainAllBlocks) {
  auto w = omega_sequence(12);
  EXPECT_EQ(w.size(), fib_q_u64(13));
  EXPECT_EQ(w[0], 0);
  EXPECT_TRUE(verify_omega(w, 12));
  // n = 4: segment [5, 8) of length 3 holds "0" and "1"
  std::vector<std::uint8_t> seg4(w.begin() + 5, w.begin() + 8);
  EXPECT_EQ(seg4, (std::vector<std::uint8_t>{0, 1, 0}));
  // n = 8: segment [34, 55) of length 21 starts with 00 01 10 11
  std::vector<std::uint8_t> seg8(w.begin() + 34, w.begin() + 42);
  EXPECT_EQ(seg8, (std::vector<std::uint8_t>{0, 0, 0, 1, 1, 0, 1, 1}));
  auto broken = w;
  std::fill(broken.begin() + 34, broken.begin() + 55, 0);
  EXPECT_FALSE(verify_omega(broken, 12));
  EXPECT_THROW(omega_sequence(0), ValidationError);
}

TEST(Window, FirstStage) {
  auto st = build_window(Rational(2), 1);
  EXPECT_EQ(st.window.measure(), q(1, 2) * kAlpha.pow(5));
  EXPECT_EQ(st.window.circle_arc_count(), 1u);
  // omega_0 = 0 picks the right half (c_1, c_1 + delta_1]
  EXPECT_EQ(st.window.arcs().front().a, kAlpha);
  EXPECT_EQ(delta_exponent(Rational(3, 2), 3), 2u + 4u + 1u);
}

TEST(Window, ValidationAndCaps) {
  EXPECT_THROW(build_window(Rational(1), 3), ValidationError);
  EXPECT_THROW(build_window(Rational(9), 3), ValidationError);
  EXPECT_THROW(build_window(Rational(2), 0), ValidationError);
  EXPECT_THROW(build_window(Rational(2), 21), ResourceError);
  EXPECT_THROW(build_window(Rational(2), 8, 6), ResourceError);
}

TEST(Window, StageInvariants) {
  for (const Rational& s : {Rational(3, 2), Rational(2), Rational(3)}) {
    WindowBuilder b(s, 11);
    while (b.stage() < 11) {
      b.step();
      const std::size_t n = b.stage();
      const QSqrt5 qprev(Rational(fib_q(n - 1)));
      ASSERT_TRUE(check_disjoint_returns(b.centers(), b.delta())) << "O1 at n=" << n;
      EXPECT_EQ(b.v1().measure(), qprev * b.delta());
      EXPECT_EQ(b.v0().measure(), qprev * b.delta());
      EXPECT_TRUE(set_intersection(b.v1(), b.v0()).empty());
      EXPECT_EQ(set_intersection(b.window(), b.v1()), b.v1());
      EXPECT_TRUE(set_intersection(b.window(), b.v0()).empty());
      EXPECT_LE(b.window().circle_arc_count(), 4 * fib_q_u64(n));
      if (n >= 2) {
        auto diff = set_symmetric_difference(b.previous(), b.window());
        EXPECT_LE(diff.measure(), q(2) * qprev * b.delta());
      }
    }
  }
}

TEST(Window, EquivalenceOnSampledPoints) {
  WindowBuilder b(Rational(2), 9);
  auto xs = random_points(20, 7);
  while (b.stage() < 9) {
    b.step();
    const std::size_t n = b.stage();
    const auto qn = fib_q_u64(n), qn1 = fib_q_u64(n + 1);
    for (const auto& u : xs) {
      QSqrt5 x = (q(2) * u - q(1)) * b.delta();
      if (x == -b.delta()) continue;
      for (auto k = qn; k < qn1; ++k) {
        QSqrt5 p = x + QSqrt5(Rational(from_u64(k))) * kAlpha;
        EXPECT_EQ(b.window().contains(p), in_half(x, b.delta(), b.omega()[k - qn])) << "n=" << n << " k=" << k;
      }
    }
  }
}

TEST(Window, ReturnsBound) {
  const Rational s(2);
  for (std::size_t n = 1; n <= 6; ++n) {
    for (std::size_t np = n + 1; np <= 10; ++np) {
      auto count = returns_count(s, n, np);
      QSqrt5 bound = q(4) * delta_of(s, n) / kAlpha.pow(np + 2) + q(1);
      EXPECT_LE(QSqrt5(Rational(from_u64(count))), bound) << n << "," << np;
    }
  }
}

TEST(Window, TailBoundDominatesLaterStages) {
  const Rational s(2);
  auto st = build_window(s, 12);
  auto early = build_window(s, 6);
  auto diff = set_symmetric_difference(early.window, st.window).measure();
  EXPECT_LE(diff.enclose(128).hi(), early.tail_bound);
  // direct partial sum of 2 q_{m-1} delta_m over 6 < m <= 40
  QSqrt5 sum;
  for (std::size_t m = 7; m <= 40; ++m) sum += q(2) * QSqrt5(Rational(fib_q(m - 1))) * delta_of(s, m);
  EXPECT_LE(sum.enclose(128).hi(), early.tail_bound);
  EXPECT_GT(to_double(early.tail_bound), 0.0);
}

TEST(DW, SingleArc) {
  auto w = CircleIntervalSet::single(q(1, 10), q(3, 10));
  EXPECT_EQ(d_W(w, QSqrt5()), QSqrt5());
  EXPECT_EQ(d_W(w, q(1, 20)), q(1, 10));
  EXPECT_EQ(d_W(w, q(-1, 20)), q(1, 10));
  EXPECT_EQ(d_W(w, q(1, 2)), q(2, 5));
  EXPECT_EQ(d_W(w, q(1)), QSqrt5());
}

TEST(DW, MatchesPairwiseOverlapOracle) {
  auto st = build_window(Rational(2), 7);
  auto hs = random_points(40, 11);
  for (const auto& h : hs) {
    EXPECT_EQ(d_W(st.window, h), oracle::d_w(st.window, h));
    QSqrt5 hq = h + kAlpha;
    EXPECT_EQ(d_W(st.window, hq), oracle::d_w(st.window, hq));
  }
}

TEST(DW, SymmetryAndTriangle) {
  auto st = build_window(Rational(2), 10);
  auto hs = random_points(100, 5);
  for (std::size_t i = 0; i < hs.size(); ++i) {
    EXPECT_EQ(d_W(st.window, hs[i]), d_W(st.window, -hs[i]));
    const auto& h2 = hs[(i + 1) % hs.size()];
    EXPECT_LE(d_W(st.window, hs[i] + h2), d_W(st.window, hs[i]) + d_W(st.window, h2));
  }
}

TEST(Sublevel, SingleArcAnalytic) {
  auto w = CircleIntervalSet::single(QSqrt5(), q(1, 10));
  for (auto e : {Rational(1, 100), Rational(1, 7), Rational(19, 100)}) {
    auto g = sublevel_mass(w, e, {SublevelMode::exact});
    EXPECT_TRUE(g.contains(e)) << e;
    auto gg = sublevel_mass(w, e, {SublevelMode::grid});
    EXPECT_TRUE(gg.contains(e));
    EXPECT_LT(to_double(gg.width()), 1e-3 * to_double(e));
  }
  EXPECT_EQ(sublevel_mass(w, Rational(1, 5), {SublevelMode::exact}).lo(), 1);
  EXPECT_EQ(sublevel_mass(w, Rational(1, 2), {SublevelMode::exact}).lo(), 1);
  EXPECT_THROW(sublevel_mass(w, Rational(-1)), ValidationError);
}

TEST(Sublevel, ExactProfileMatchesDW) {
  auto st = build_window(Rational(2), 6);
  ExactOverlapProfile prof(st.window);
  EXPECT_EQ(prof.lambda(), st.window.measure());
  for (const auto& h : random_points(30, 3)) EXPECT_EQ(prof.d_w_at(h), d_W(st.window, h));
  EXPECT_THROW(ExactOverlapProfile(st.window, 4), ResourceError);
}

TEST(Sublevel, ExactAndGridAgreeAndAreMonotone) {
  auto st = build_window(Rational(2), 9);
  const Rational lam = st.window.measure().enclose(64).lo();
  RationalInterval prev(Rational(0));
  for (int k = 1; k <= 6; ++k) {
    Rational e = lam * Rational(k, 4);
    auto ex = sublevel_mass(st.window, e, {SublevelMode::exact});
    auto gr = sublevel_mass(st.window, e, {SublevelMode::grid});
    EXPECT_TRUE(ex.overlaps(gr)) << k;
    EXPECT_GE(ex.hi(), prev.lo());
    prev = ex;
  }
  EXPECT_EQ(sublevel_mass(st.window, 2 * st.window.measure().enclose(64).hi(), {SublevelMode::exact}).lo(), 1);
  auto z = sublevel_mass(st.window, Rational(0), {SublevelMode::exact});
  EXPECT_EQ(z.lo(), 0);
  EXPECT_LT(to_double(z.hi()), 1e-30);
}

TEST(P3, SingleArcSlopeIsOne) {
  auto w = CircleIntervalSet::single(QSqrt5(), q(1, 10));
  auto grid = log_grid(Rational(1, 100000), 3, 7);
  auto rep = p3_slope_on_grid(w, grid);
  EXPECT_NEAR(rep.slope, 1.0, 1e-3);
  EXPECT_THROW(log_grid(Rational(1, 10), 2, 2), ValidationError);
}

TEST(P3, RejectsGridsOutsideResolvedRange) {
  auto st = build_window(Rational(2), 4);
  EXPECT_THROW(verify_P3_slope(st, 1.5), ValidationError);
  EXPECT_THROW(verify_P3_slope(st, 6), ValidationError);
}

TEST(Coding, HalfCircleExample) {
  auto w = CircleIntervalSet::single(QSqrt5(), q(1, 2));
  auto c = code_orbit(w, QSqrt5(), 0, 4);
  EXPECT_EQ(c.bits, (std::vector<std::uint8_t>{0, 0, 1, 0, 1}));
  auto d = code_orbit(w, q(1, 4), 0, 0);
  EXPECT_EQ(d.bits.front(), 1);
  EXPECT_THROW(code_orbit(w, QSqrt5(), 3, 2), ValidationError);
}

TEST(Coding, FloatingPathAgreesWithExactMembership) {
  auto st = build_window(Rational(2), 8);
  auto h = random_points(1, 17).front();
  auto word = code_orbit(st.window, h, -500, 500);
  for (long k = -500; k <= 500; ++k) {
    QSqrt5 p = h + QSqrt5(Rational(k)) * kAlpha;
    ASSERT_EQ(word.bits[static_cast<std::size_t>(k + 500)], st.window.contains(p) ? 1 : 0) << k;
  }
}

TEST(Coding, EmpiricalMatchesExactForEqualAndNearbyPoints) {
  auto st = build_window(Rational(2), 8);
  auto h = random_points(2, 29);
  auto same = empirical_vs_exact(st.window, h[0], h[0], 2000);
  EXPECT_EQ(same.gap, 0.0);
  auto far = empirical_vs_exact(st.window, h[0], h[1], 20000);
  EXPECT_LT(far.gap, 0.02);
  EXPECT_THROW(empirical_vs_exact(st.window, h[0], h[1], 10), ValidationError);
  QSqrt5 tiny(Rational(1, 1000000));
  auto near = d_W(st.window, tiny);
  EXPECT_LE(near, q(2) * QSqrt5(Rational(from_u64(st.window.circle_arc_count()))) * tiny);
}

TEST(Blocks, Examples) {
  std::vector<std::uint8_t> zeros(50, 0);
  EXPECT_EQ(block_density_check(zeros, {1}).count, 0u);
  EXPECT_FALSE(block_density_check(zeros, {1}).first.has_value());
  EXPECT_EQ(block_density_check(zeros, {}).count, 50u);
  std::vector<std::uint8_t> w{0, 1, 1, 0, 1};
  auto bc = block_density_check(w, {1, 0});
  EXPECT_EQ(bc.count, 1u);
  EXPECT_EQ(*bc.first, 2u);
  EXPECT_THROW(block_density_check(w, std::vector<std::uint8_t>(7, 1)), ValidationError);
}

TEST(Blocks, ShortBlocksOccurInRandomCoding) {
  auto st = build_window(Rational(2), 10);
  auto h = random_points(1, 99).front();
  auto word = code_orbit(st.window, h, 0, 99999);
  EXPECT_GE(block_density_check(word.bits, {0, 1}).count, 1u);
  EXPECT_GE(block_density_check(word.bits, {1, 1}).count, 1u);
}
