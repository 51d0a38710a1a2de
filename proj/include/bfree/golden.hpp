#pragma once

// Windows W_n on the circle for the golden rotation R(x) = x + alpha mod 1,
// the coding h -> (1_W(h + k alpha))_k, and the sublevel mass of
// h -> lambda(W symmetric-difference (W + h)).

#include <mpfr.h>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bfree/bigfloat.hpp"
#include "bfree/circle.hpp"
#include "bfree/distance.hpp"
#include "bfree/errors.hpp"
#include "bfree/qsqrt5.hpp"
#include "bfree/rational.hpp"
#include "bfree/scaling.hpp"

namespace bfree {

// ------------------------------------------------------------- Fibonacci data

// q_0 = q_1 = 1, q_{n+1} = q_n + q_{n-1}
inline Integer fib_q(std::size_t n) {
  Integer a = 1, b = 1;
  for (std::size_t i = 1; i < n; ++i) {
    Integer c = a + b;
    a = b;
    b = c;
  }
  return n == 0 ? Integer(1) : b;
}

inline std::uint64_t fib_q_u64(std::size_t n) {
  if (n > 90) throw ResourceError("Fibonacci index too large");
  return to_u64(fib_q(n));
}

// c_k = k alpha mod 1
inline QSqrt5 orbit_point(const Integer& k) { return (QSqrt5(Rational(k)) * QSqrt5::alpha()).frac(); }

// Signed representative in (-1/2, 1/2] of x mod 1.
inline QSqrt5 centered(const QSqrt5& x) {
  QSqrt5 y = x.frac();
  if (y > QSqrt5(Rational(1, 2))) y -= QSqrt5(Rational(1));
  return y;
}

// J_n as a signed interval around 0: (-theta_{n-1}, theta_n] for even n,
// [-theta_n, theta_{n-1}) for odd n.
struct SignedArc {
  QSqrt5 lo;
  QSqrt5 hi;
  bool lo_closed;
  bool hi_closed;
  bool contains(const QSqrt5& x) const {
    bool above = lo_closed ? lo <= x : lo < x;
    bool below = hi_closed ? x <= hi : x < hi;
    return above && below;
  }
};

struct FibonacciData {
  std::size_t n = 0;
  Integer q;
  Integer p;
  QSqrt5 theta;  // alpha^{n+1}
  QSqrt5 c_qn;   // c_{q_n}
  SignedArc j;   // J_n (n >= 1)
};

inline FibonacciData fibonacci_data(std::size_t n) {
  FibonacciData d;
  d.n = n;
  d.q = fib_q(n);
  d.p = n == 0 ? Integer(0) : fib_q(n - 1);
  QSqrt5 a = QSqrt5::alpha();
  d.theta = a.pow(n + 1);
  d.c_qn = orbit_point(d.q);
  if (n >= 1) {
    QSqrt5 tn = d.theta, tp = a.pow(n);
    if (n % 2 == 0) {
      d.j = {-tp, tn, false, true};
    } else {
      d.j = {-tn, tp, true, false};
    }
  }
  return d;
}

// ---------------------------------------------------------------------- omega

// omega_0 = 0; the segment at indices [q_n, q_{n+1}) holds every binary block of
// length floor(n/4), concatenated in lexicographic order, then zeros.
inline std::vector<std::uint8_t> omega_sequence(std::size_t n_max) {
  if (n_max < 1) throw ValidationError("n_max must be >= 1");
  const std::uint64_t total = fib_q_u64(n_max + 1);
  std::vector<std::uint8_t> w(total, 0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    const std::uint64_t a = fib_q_u64(n), b = fib_q_u64(n + 1);
    const std::size_t len = n / 4;
    std::uint64_t pos = a;
    if (len > 0) {
      for (std::uint64_t blk = 0; blk < (std::uint64_t{1} << len); ++blk) {
        for (std::size_t t = 0; t < len; ++t) {
          if (pos >= b) throw CrossCheckError("omega segment too short");
          w[pos++] = static_cast<std::uint8_t>((blk >> (len - 1 - t)) & 1U);
        }
      }
    }
  }
  return w;
}

// True iff every segment [q_n, q_{n+1}), 1 <= n <= n_max, contains all blocks of
// length floor(n/4).
inline bool verify_omega(const std::vector<std::uint8_t>& w, std::size_t n_max) {
  for (std::size_t n = 1; n <= n_max; ++n) {
    const std::uint64_t a = fib_q_u64(n), b = fib_q_u64(n + 1);
    if (b > w.size()) return false;
    const std::size_t len = n / 4;
    if (len == 0) continue;
    std::vector<std::uint8_t> seen(std::size_t{1} << len, 0);
    for (std::uint64_t i = a; i + len <= b; ++i) {
      std::size_t v = 0;
      for (std::size_t t = 0; t < len; ++t) v = (v << 1) | w[i + t];
      seen[v] = 1;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) return false;
  }
  return true;
}

// ------------------------------------------------------------------- windows

struct WindowParams {
  Rational s;
  std::size_t stage_cap = 20;
};

inline void validate_s(const Rational& s) {
  if (s <= 1 || s > 8) throw ValidationError("s must lie in (1, 8]");
}

// delta_m = alpha^{ceil(s) + floor(s m) + 1} / 2
inline unsigned long delta_exponent(const Rational& s, std::size_t m) {
  Integer e = ceil_of(s) + floor_of(s * Rational(from_u64(m))) + 1;
  return static_cast<unsigned long>(to_u64(e));
}

inline QSqrt5 delta_of(const Rational& s, std::size_t m) {
  return QSqrt5(Rational(1, 2)) * QSqrt5::alpha().pow(delta_exponent(s, m));
}

// Upper bound for sum_{m>n} 2 q_{m-1} delta_m, namely
// alpha^{ceil(s)+1+(s-1)(n+1)} / (1 - alpha^{s-1}), rounded upward.
inline Rational window_tail_bound(const Rational& s, std::size_t n) {
  const mpfr_prec_t prec = 128;
  BigFloat five = BigFloat::from_integer(5, prec);
  BigFloat alpha_up(prec);
  mpfr_sqrt(alpha_up.get(), five.get(), MPFR_RNDU);
  mpfr_sub_ui(alpha_up.get(), alpha_up.get(), 1, MPFR_RNDU);
  mpfr_div_ui(alpha_up.get(), alpha_up.get(), 2, MPFR_RNDU);
  // alpha < 1, so alpha^x shrinks as x grows: round exponents down
  Rational x = Rational(ceil_of(s)) + 1 + (s - 1) * Rational(from_u64(n + 1));
  BigFloat xd = BigFloat::from_rational(x, prec, MPFR_RNDD);
  BigFloat sd = BigFloat::from_rational(s - 1, prec, MPFR_RNDD);
  BigFloat num(prec), den(prec), r(prec);
  mpfr_pow(num.get(), alpha_up.get(), xd.get(), MPFR_RNDU);
  mpfr_pow(den.get(), alpha_up.get(), sd.get(), MPFR_RNDU);
  mpfr_ui_sub(den.get(), 1, den.get(), MPFR_RNDD);
  if (mpfr_sgn(den.get()) <= 0) throw CrossCheckError("tail bound denominator not positive");
  mpfr_div(r.get(), num.get(), den.get(), MPFR_RNDU);
  return r.to_rational();
}

struct WindowStage {
  Rational s;
  std::size_t stage = 0;
  CircleIntervalSet window;           // W_n
  std::vector<QSqrt5> delta;          // delta[m] for m = 1..n (delta[0] unused)
  std::vector<std::uint8_t> omega;    // omega_0 .. omega_{q_{n+1}-1}
  Rational tail_bound;                // lambda(W symmetric-difference W_n) <= tail_bound
  std::vector<std::size_t> arc_counts;  // circle arc count of W_m, m = 1..n
};

// Incremental construction W_1, W_2, ...; the last V sets are kept for checks.
class WindowBuilder {
 public:
  explicit WindowBuilder(Rational s, std::size_t n_max, std::size_t stage_cap = 20)
      : s_(std::move(s)), n_max_(n_max) {
    validate_s(s_);
    if (n_max < 1) throw ValidationError("stage must be >= 1");
    if (n_max > stage_cap)
      throw ResourceError("stage " + std::to_string(n_max) + " exceeds the stage cap " + std::to_string(stage_cap));
    omega_ = omega_sequence(n_max + 1);
  }

  std::size_t stage() const { return m_; }
  const Rational& s() const { return s_; }
  const CircleIntervalSet& window() const { return w_; }
  const CircleIntervalSet& previous() const { return prev_; }
  const CircleIntervalSet& v1() const { return v1_; }
  const CircleIntervalSet& v0() const { return v0_; }
  const QSqrt5& delta() const { return delta_; }
  const std::vector<std::uint8_t>& omega() const { return omega_; }

  // Centers c_k, q_m <= k < q_{m+1}, of the current stage.
  const std::vector<QSqrt5>& centers() const { return centers_; }

  void step() {
    if (m_ >= n_max_) throw ValidationError("builder already at its final stage");
    ++m_;
    delta_ = delta_of(s_, m_);
    const std::uint64_t a = fib_q_u64(m_), b = fib_q_u64(m_ + 1);
    std::vector<Arc> one, zero;
    centers_.clear();
    for (std::uint64_t k = a; k < b; ++k) {
      QSqrt5 c = orbit_point(from_u64(k));
      centers_.push_back(c);
      Arc left{c - delta_, c}, right{c, c + delta_};
      if (omega_[k - a]) {
        one.push_back(left);
        zero.push_back(right);
      } else {
        one.push_back(right);
        zero.push_back(left);
      }
    }
    v1_ = CircleIntervalSet::from_arcs(one);
    v0_ = CircleIntervalSet::from_arcs(zero);
    prev_ = w_;
    if (m_ == 1) {
      w_ = v1_;
    } else {
      w_ = set_union(set_difference(w_, v0_), v1_);
    }
    arc_counts_.push_back(w_.circle_arc_count());
    deltas_.push_back(delta_);
  }

  WindowStage result() const {
    WindowStage st;
    st.s = s_;
    st.stage = m_;
    st.window = w_;
    st.delta.push_back(QSqrt5());
    st.delta.insert(st.delta.end(), deltas_.begin(), deltas_.end());
    st.omega = omega_;
    st.tail_bound = window_tail_bound(s_, m_);
    st.arc_counts = arc_counts_;
    return st;
  }

 private:
  Rational s_;
  std::size_t n_max_;
  std::size_t m_ = 0;
  std::vector<std::uint8_t> omega_;
  CircleIntervalSet w_, prev_, v1_, v0_;
  QSqrt5 delta_;
  std::vector<QSqrt5> centers_;
  std::vector<QSqrt5> deltas_;
  std::vector<std::size_t> arc_counts_;
};

inline WindowStage build_window(const Rational& s, std::size_t n, std::size_t stage_cap = 20) {
  WindowBuilder b(s, n, stage_cap);
  while (b.stage() < n) b.step();
  return b.result();
}

// --------------------------------------------------------------- structure checks

// (O1): the arcs c_k + I_n, q_n <= k < q_{n+1}, are pairwise disjoint, i.e. the
// sorted centers are at circular distance >= 2 delta_n.
inline bool check_disjoint_returns(const std::vector<QSqrt5>& centers, const QSqrt5& delta) {
  if (centers.size() < 2) return true;
  auto c = centers;
  std::sort(c.begin(), c.end());
  QSqrt5 two_delta = QSqrt5(Rational(2)) * delta;
  for (std::size_t i = 0; i + 1 < c.size(); ++i)
    if (c[i + 1] - c[i] < two_delta) return false;
  return (c.front() + QSqrt5(Rational(1))) - c.back() >= two_delta;
}

// |T_{n,n'}|: k' in [0, q_{n'+1}) with (c_{k'} + I_{n'}) meeting I_n.
inline std::uint64_t returns_count(const Rational& s, std::size_t n, std::size_t n_prime) {
  QSqrt5 dn = delta_of(s, n), dp = delta_of(s, n_prime), reach = dn + dp;
  const std::uint64_t kmax = fib_q_u64(n_prime + 1);
  const long double lim = reach.approx() * (1 + 1e-9L) + 1e-30L;
  const long double a = QSqrt5::alpha().approx();
  std::uint64_t count = 0;
  for (std::uint64_t k = 0; k < kmax; ++k) {
    long double x = std::fmod(static_cast<long double>(k) * a, 1.0L);
    if (x > 0.5L) x -= 1.0L;
    if (std::fabs(x) > lim + 1e-12L) continue;
    QSqrt5 c = centered(orbit_point(from_u64(k)));
    QSqrt5 ac = c.sign() < 0 ? -c : c;
    if (ac < reach) ++count;
  }
  return count;
}

// ------------------------------------------------------------------- coding

namespace detail {

struct LdArc {
  long double a, b;
};

inline std::vector<LdArc> approx_arcs(const CircleIntervalSet& w) {
  std::vector<LdArc> out;
  out.reserve(w.size());
  for (const auto& arc : w.arcs()) out.push_back({arc.a.approx(), arc.b.approx()});
  return out;
}

}  // namespace detail

// Bits 1_W(h + k alpha) for k = k_min .. k_max. Decided in long double unless
// the point lies within 1e-12 of an endpoint, then exactly.
class OrbitCoder {
 public:
  explicit OrbitCoder(const CircleIntervalSet& w) : w_(w), arcs_(detail::approx_arcs(w)) {}

  CodedWord code(const QSqrt5& h, long long k_min, long long k_max) const {
    if (k_min > k_max) throw ValidationError("k_min must be <= k_max");
    CodedWord out;
    out.first_index = k_min;
    out.bits.reserve(static_cast<std::size_t>(k_max - k_min + 1));
    const QSqrt5 h0 = h.frac();
    const long double hx = h0.approx();
    const long double a = QSqrt5::alpha().approx();
    for (long long k = k_min; k <= k_max; ++k) {
      long double x = std::fmod(hx + std::fmod(static_cast<long double>(k) * a, 1.0L), 1.0L);
      if (x < 0) x += 1.0L;
      out.bits.push_back(member(x, h0, k));
    }
    return out;
  }

  bool member(long double x, const QSqrt5& h0, long long k) const {
    const long double tol = 1e-12L;
    if (x < tol || x > 1 - tol) return exact(h0, k);
    auto it = std::lower_bound(arcs_.begin(), arcs_.end(), x, [](const detail::LdArc& arc, long double v) { return arc.b < v; });
    if (it != arcs_.end() && std::fabs(it->b - x) < tol) return exact(h0, k);
    if (it != arcs_.end() && std::fabs(it->a - x) < tol) return exact(h0, k);
    if (it != arcs_.begin() && std::fabs(std::prev(it)->b - x) < tol) return exact(h0, k);
    return it != arcs_.end() && it->a < x;
  }

 private:
  bool exact(const QSqrt5& h0, long long k) const {
    QSqrt5 p = h0 + QSqrt5(Rational(Integer(static_cast<long>(k)))) * QSqrt5::alpha();
    return w_.contains(p);
  }

  const CircleIntervalSet& w_;
  std::vector<detail::LdArc> arcs_;
};

inline CodedWord code_orbit(const CircleIntervalSet& w, const QSqrt5& h, long long k_min, long long k_max) {
  return OrbitCoder(w).code(h, k_min, k_max);
}

// Random circle points: rationals j / 2^32 from a seeded generator.
inline std::vector<QSqrt5> random_points(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<QSqrt5> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t j = gen() >> 32;
    out.emplace_back(make_rational(from_u64(j), pow2(32)));
  }
  return out;
}

struct EmpiricalComparison {
  double empirical = 0.0;
  QSqrt5 exact;
  double gap = 0.0;
};

inline EmpiricalComparison empirical_vs_exact(const CircleIntervalSet& w, const QSqrt5& h1, const QSqrt5& h2,
                                              long long n_window) {
  if (n_window < 1000) throw ValidationError("window must be >= 1000");
  OrbitCoder coder(w);
  auto x = coder.code(h1, -n_window, n_window);
  auto y = coder.code(h2, -n_window, n_window);
  EmpiricalComparison c;
  c.empirical = d1_empirical(x, y, n_window);
  c.exact = d_W(w, h1 - h2);
  c.gap = std::fabs(c.empirical - static_cast<double>(c.exact.approx()));
  return c;
}

struct BlockCount {
  std::uint64_t count = 0;
  std::optional<std::uint64_t> first;
};

inline BlockCount block_density_check(const std::vector<std::uint8_t>& word, const std::vector<std::uint8_t>& block,
                                      std::size_t max_block = 6) {
  if (block.size() > max_block) throw ValidationError("block longer than the configured maximum");
  BlockCount bc;
  if (block.empty()) {
    bc.count = word.size();
    if (!word.empty()) bc.first = 0;
    return bc;
  }
  if (word.size() < block.size()) return bc;
  for (std::size_t i = 0; i + block.size() <= word.size(); ++i) {
    if (std::equal(block.begin(), block.end(), word.begin() + static_cast<long>(i))) {
      if (!bc.first) bc.first = i;
      ++bc.count;
    }
  }
  return bc;
}

// -------------------------------------------------------------- sublevel mass

enum class SublevelMode { exact, grid, automatic };

struct SublevelOptions {
  SublevelMode mode = SublevelMode::automatic;
  std::size_t breakpoint_cap = 200'000;
  double min_width_factor = 1e-3;   // grid cells stop at factor * eps / L
  std::uint64_t eval_budget = 50'000'000;
};

// h -> A(h) = lambda(W n (W + h)) is piecewise linear with kinks at endpoint
// differences; d_W(h) = 2 (lambda(W) - A(h)).
class ExactOverlapProfile {
 public:
  explicit ExactOverlapProfile(const CircleIntervalSet& w, std::size_t breakpoint_cap = 200'000) {
    // treat (a, 1] and (0, b] as one arc
    std::vector<Arc> arcs = w.arcs();
    const QSqrt5 one(Rational(1));
    if (arcs.size() >= 2 && arcs.front().a.sign() == 0 && arcs.back().b == one) {
      Arc wrap{arcs.back().a, arcs.front().b + one};
      arcs.pop_back();
      arcs.erase(arcs.begin());
      arcs.push_back(wrap);
    }
    const std::size_t m = arcs.size();
    if (4 * m * m > breakpoint_cap)
      throw ResourceError("exact sublevel mode needs " + std::to_string(4 * m * m) + " breakpoints, cap is " +
                          std::to_string(breakpoint_cap));
    lambda_ = w.measure();
    struct Ev {
      QSqrt5 x;
      long double ax;
      int w;
    };
    std::vector<Ev> ev;
    ev.reserve(4 * m * m);
    auto push = [&](const QSqrt5& x, int wt) {
      QSqrt5 f = x.frac();
      long double ax = f.approx();
      ev.push_back({std::move(f), ax, wt});
    };
    for (const auto& ai : arcs)
      for (const auto& aj : arcs) {
        push(ai.a - aj.b, +1);
        push(ai.a - aj.a, -1);
        push(ai.b - aj.b, -1);
        push(ai.b - aj.a, +1);
      }
    std::sort(ev.begin(), ev.end(), [](const Ev& u, const Ev& v) { return u.ax < v.ax; });
    // exact order inside clusters of nearly equal approximations
    const long double tol = 1e-15L;
    std::size_t i = 0;
    while (i < ev.size()) {
      std::size_t j = i + 1;
      while (j < ev.size() && ev[j].ax - ev[j - 1].ax < tol) ++j;
      if (j - i > 1) std::sort(ev.begin() + static_cast<long>(i), ev.begin() + static_cast<long>(j), [](const Ev& u, const Ev& v) { return u.x < v.x; });
      i = j;
    }
    // group equal positions
    int w0 = 0;
    for (std::size_t k = 0; k < ev.size();) {
      std::size_t l = k;
      int wt = 0;
      while (l < ev.size() && ev[l].x == ev[k].x) wt += ev[l++].w;
      if (ev[k].x.sign() == 0) {
        w0 += wt;
      } else if (wt != 0) {
        xs_.push_back(ev[k].x);
        ws_.push_back(wt);
      }
      k = l;
    }
    if (w0 % 2 != 0) throw CrossCheckError("odd kink weight at 0");
    // walk from A(0) = lambda with slope w0/2
    long slope = w0 / 2;
    QSqrt5 pos, val = lambda_;
    nodes_.push_back(pos);
    values_.push_back(val);
    for (std::size_t k = 0; k < xs_.size(); ++k) {
      val += QSqrt5(Rational(slope)) * (xs_[k] - pos);
      pos = xs_[k];
      nodes_.push_back(pos);
      values_.push_back(val);
      slope += ws_[k];
    }
    val += QSqrt5(Rational(slope)) * (QSqrt5(Rational(1)) - pos);
    nodes_.push_back(QSqrt5(Rational(1)));
    values_.push_back(val);
    if (val != lambda_) throw CrossCheckError("overlap profile does not close up at h = 1");
  }

  std::size_t breakpoints() const { return xs_.size(); }
  const QSqrt5& lambda() const { return lambda_; }

  // A(h) at the nodes; linear in between.
  const std::vector<QSqrt5>& nodes() const { return nodes_; }
  const std::vector<QSqrt5>& values() const { return values_; }

  QSqrt5 d_w_at(const QSqrt5& h) const {
    QSqrt5 x = h.frac();
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    std::size_t k = static_cast<std::size_t>(it - nodes_.begin());
    if (k == 0) k = 1;
    if (k >= nodes_.size()) k = nodes_.size() - 1;
    const QSqrt5 &x0 = nodes_[k - 1], &x1 = nodes_[k], &y0 = values_[k - 1], &y1 = values_[k];
    QSqrt5 a = y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    return QSqrt5(Rational(2)) * (lambda_ - a);
  }

  // lambda{h : d_W(h) <= eps}, exactly.
  QSqrt5 sublevel(const Rational& eps) const {
    QSqrt5 t = lambda_ - QSqrt5(eps / 2);
    QSqrt5 total;
    for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) {
      const QSqrt5 &a0 = values_[k], &a1 = values_[k + 1];
      QSqrt5 len = nodes_[k + 1] - nodes_[k];
      bool in0 = a0 >= t, in1 = a1 >= t;
      if (in0 && in1) {
        total += len;
      } else if (in0) {
        total += len * (a0 - t) / (a0 - a1);
      } else if (in1) {
        total += len * (a1 - t) / (a1 - a0);
      }
    }
    return total;
  }

 private:
  QSqrt5 lambda_;
  std::vector<QSqrt5> xs_;
  std::vector<int> ws_;
  std::vector<QSqrt5> nodes_;
  std::vector<QSqrt5> values_;
};

// Floating evaluation of d_W with a Lipschitz-certified adaptive grid.
class GridOverlap {
 public:
  explicit GridOverlap(const CircleIntervalSet& w) {
    auto arcs = detail::approx_arcs(w);
    arcs_ = arcs;
    for (const auto& a : arcs_) lambda_ += a.b - a.a;
    lipschitz_ = 2.0L * static_cast<long double>(w.circle_arc_count());
    slack_ = 64.0L * static_cast<long double>(arcs_.size() + 1) * LDBL_EPSILON;
  }

  long double lipschitz() const { return lipschitz_; }
  long double slack() const { return slack_; }
  long double lambda() const { return lambda_; }

  long double d_w(long double h) const {
    h = h - std::floor(h);
    shifted_.clear();
    for (const auto& a : arcs_) {
      long double x = a.a + h, y = a.b + h;
      if (x >= 1) {
        shifted_.push_back({x - 1, y - 1});
      } else if (y > 1) {
        shifted_.push_back({x, 1});
        shifted_.push_back({0, y - 1});
      } else {
        shifted_.push_back({x, y});
      }
    }
    std::sort(shifted_.begin(), shifted_.end(), [](const detail::LdArc& u, const detail::LdArc& v) { return u.a < v.a; });
    long double inter = 0;
    std::size_t i = 0, j = 0;
    while (i < arcs_.size() && j < shifted_.size()) {
      long double lo = std::max(arcs_[i].a, shifted_[j].a), hi = std::min(arcs_[i].b, shifted_[j].b);
      if (hi > lo) inter += hi - lo;
      if (arcs_[i].b < shifted_[j].b) {
        ++i;
      } else {
        ++j;
      }
    }
    return 2 * (lambda_ - inter);
  }

  // Enclosure of lambda{h : d_W(h) <= eps}.
  RationalInterval sublevel(const Rational& eps_q, const SublevelOptions& opt) const {
    const long double eps = detail::ld_of(eps_q);
    long double min_w = static_cast<long double>(opt.min_width_factor) * eps / lipschitz_;
    if (min_w < std::ldexp(1.0L, -58)) min_w = std::ldexp(1.0L, -58);
    // cells of [0, 1/2] at depth e have width 2^-e; start at depth 12
    const int start_depth = 12;
    std::map<int, std::uint64_t> inside, unknown;
    std::uint64_t evals = 0;
    struct Cell {
      long double a, fa, fb;
      int depth;
    };
    std::vector<Cell> stack;
    const std::uint64_t n0 = std::uint64_t{1} << (start_depth - 1);
    std::vector<long double> f0(n0 + 1);
    for (std::uint64_t k = 0; k <= n0; ++k) f0[k] = d_w(std::ldexp(static_cast<long double>(k), -start_depth));
    evals += n0 + 1;
    for (std::uint64_t k = n0; k-- > 0;)
      stack.push_back({std::ldexp(static_cast<long double>(k), -start_depth), f0[k], f0[k + 1], start_depth});
    while (!stack.empty()) {
      Cell c = stack.back();
      stack.pop_back();
      long double width = std::ldexp(1.0L, -c.depth);
      long double avg = (c.fa + c.fb) / 2, spread = lipschitz_ * width / 2 + slack_;
      if (avg - spread > eps) continue;
      if (avg + spread <= eps) {
        ++inside[c.depth];
        continue;
      }
      if (width <= min_w) {
        ++unknown[c.depth];
        continue;
      }
      if (++evals > opt.eval_budget) throw ResourceError("grid sublevel evaluation budget exceeded");
      long double mid = c.a + width / 2;
      long double fm = d_w(mid);
      stack.push_back({mid, fm, c.fb, c.depth + 1});
      stack.push_back({c.a, c.fa, fm, c.depth + 1});
    }
    evals_ = evals;
    auto total = [](const std::map<int, std::uint64_t>& m) {
      Rational s = 0;
      for (const auto& [d, n] : m) s += make_rational(from_u64(n), pow2(static_cast<unsigned long>(d)));
      return s;
    };
    // symmetric in h, so double the half-circle measure
    Rational lo = 2 * total(inside);
    Rational hi = lo + 2 * total(unknown);
    return {lo, hi};
  }

  std::uint64_t last_evaluations() const { return evals_; }

 private:
  std::vector<detail::LdArc> arcs_;
  mutable std::vector<detail::LdArc> shifted_;
  long double lambda_ = 0;
  long double lipschitz_ = 0;
  long double slack_ = 0;
  mutable std::uint64_t evals_ = 0;
};

inline RationalInterval sublevel_mass(const CircleIntervalSet& w, const Rational& eps, const SublevelOptions& opt = {}) {
  if (eps < 0) throw ValidationError("epsilon must be non-negative");
  const std::size_t m = w.circle_arc_count();
  bool use_exact = opt.mode == SublevelMode::exact ||
                   (opt.mode == SublevelMode::automatic && 4 * m * m <= opt.breakpoint_cap);
  if (use_exact) {
    ExactOverlapProfile prof(w, opt.breakpoint_cap);
    QSqrt5 g = prof.sublevel(eps);
    return g.enclose(128);
  }
  return GridOverlap(w).sublevel(eps, opt);
}

// ------------------------------------------------------------------- P3 slope

struct P3Report {
  Rational s;
  std::size_t stage = 0;
  Rational eps_floor;    // tail bound of the stage
  Rational eps_ceiling;  // lambda(W_n), rounded down
  std::vector<Rational> eps;
  std::vector<RationalInterval> g;
  double slope = 0.0;      // through the interval midpoints
  double slope_min = 0.0;  // extremes over the enclosures at the end points
  double slope_max = 0.0;
  double expected = 0.0;
  std::vector<double> residuals;
};

// eps_k = lo * 10^(decades * k / (points - 1)), rounded to 60-bit dyadics.
inline std::vector<Rational> log_grid(const Rational& lo, double decades, std::size_t points) {
  if (points < 3) throw ValidationError("grid needs at least 3 points");
  std::vector<Rational> out;
  const double l0 = log_abs(lo);
  for (std::size_t k = 0; k < points; ++k) {
    double e = std::exp(l0 + std::log(10.0) * decades * static_cast<double>(k) / static_cast<double>(points - 1));
    out.push_back(round_up_dyadic(from_long_double(e), 80));
  }
  out.front() = lo;
  return out;
}

inline P3Report p3_slope_on_grid(const CircleIntervalSet& w, const std::vector<Rational>& grid,
                                 const SublevelOptions& opt = {}) {
  P3Report rep;
  rep.eps = grid;
  std::vector<ScalingPoint> pts;
  for (const auto& e : grid) {
    auto g = sublevel_mass(w, e, opt);
    if (g.lo() <= 0) throw ValidationError("sublevel mass not resolved away from 0 at eps = " + e.get_str());
    rep.g.push_back(g);
    pts.push_back({0, RationalInterval(e), std::log(to_double(g.midpoint())), "g"});
  }
  // slope of log g against log eps equals the dimensional fit of g against 1/eps, negated
  auto fit = fit_dimensional_exponent(pts, FitWindow{0, pts.size()});
  rep.slope = -fit.exponent;
  rep.residuals = fit.residuals;
  const double dl = log_abs(grid.back()) - log_abs(grid.front());
  rep.slope_min = (log_abs(rep.g.back().lo()) - log_abs(rep.g.front().hi())) / dl;
  rep.slope_max = (log_abs(rep.g.back().hi()) - log_abs(rep.g.front().lo())) / dl;
  return rep;
}

// P3 at stage n: eps on a log grid over [eps_n, eps_n 10^decades], which must
// stay below lambda(W_n).
inline P3Report verify_P3_slope(const WindowStage& st, double decades, std::size_t points = 9,
                                const SublevelOptions& opt = {}) {
  if (decades < 2) throw ValidationError("the eps grid must span at least 2 decades");
  Rational floor_eps = st.tail_bound;
  Rational ceiling = st.window.measure().enclose(64).lo();
  auto grid = log_grid(floor_eps, decades, points);
  if (grid.back() > ceiling)
    throw ValidationError("eps grid [" + std::to_string(to_double(floor_eps)) + ", " +
                          std::to_string(to_double(grid.back())) + "] leaves the resolved range; lambda(W_n) = " +
                          std::to_string(to_double(ceiling)));
  auto rep = p3_slope_on_grid(st.window, grid, opt);
  rep.s = st.s;
  rep.stage = st.stage;
  rep.eps_floor = floor_eps;
  rep.eps_ceiling = ceiling;
  rep.expected = to_double(st.s / (st.s - 1));
  return rep;
}

}  // namespace bfree
