#pragma once

// Example families (Toeplitz-type b_i = 2^{r_i} c_i and squares of primes), their
// certified epsilon sequences, and log-log slope fits for scaling exponents.

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bfree/bigfloat.hpp"
#include "bfree/bset.hpp"
#include "bfree/errors.hpp"
#include "bfree/primes.hpp"
#include "bfree/rational.hpp"

namespace bfree {

// ------------------------------------------------------------------ Toeplitz

struct ToeplitzFamily {
  ToeplitzRule rule;
  ToeplitzPrefix prefix;  // c_1..c_N, r_1..r_N

  static ToeplitzFamily make(ToeplitzRule rule, std::size_t n) {
    if (!rule.c_explicit.empty()) validate_toeplitz_c(rule.c_explicit);
    ToeplitzFamily f{std::move(rule), {}};
    f.prefix = toeplitz_prefix(f.rule, n);
    return f;
  }

  std::size_t size() const { return prefix.c.size(); }
  const Integer& c(std::size_t i) const { return prefix.c.at(i - 1); }  // 1-based
  unsigned long r(std::size_t i) const { return prefix.r.at(i - 1); }
  Integer b(std::size_t i) const { return pow2(r(i)) * c(i); }

  // l_n = 2^{r_n} lcm(c_1..c_n)
  Integer ell(std::size_t n) const {
    std::vector<Integer> cs(prefix.c.begin(), prefix.c.begin() + static_cast<long>(n));
    return pow2(r(n)) * lcm_of(cs);
  }

  BigFloat log_ell(std::size_t n, mpfr_prec_t bits = 128) const { return BigFloat::log_of(ell(n), bits); }

  // M_n = max_{m<=n} (c_{m+1}/c_m - 1)^{-1}; needs c_{n+1}.
  Rational big_m(std::size_t n) const {
    if (n + 1 > size()) throw ValidationError("M_n needs c_{n+1}");
    Rational best = 0;
    for (std::size_t m = 1; m <= n; ++m) {
      Rational v = make_rational(c(m), c(m + 1) - c(m));
      if (v > best) best = v;
    }
    return best;
  }
};

// eps_{l_n} = 2 prod_{i<=n}(1 - 1/c_i) d(M_{B \ S_n}), with d(M_{B \ S_n}) enclosed
// by the exact density of b_{n+1}..b_tail plus sum_{i>tail} 1/b_i
// <= 2^{1-r_{tail+1}} / c_{tail+1}.
inline RationalInterval toeplitz_eps(const ToeplitzFamily& f, std::size_t n, std::size_t tail,
                                     std::optional<Rational> max_rel_width = std::nullopt) {
  if (n < 1) throw ValidationError("n must be >= 1");
  if (tail < n) throw ValidationError("tail must be >= n");
  if (f.size() < tail + 1) throw ValidationError("family materialized with too few elements for this tail");
  Rational free_n = 1;
  for (std::size_t i = 1; i <= n; ++i) free_n *= make_rational(f.c(i) - 1, f.c(i));
  std::vector<Integer> cs(f.prefix.c.begin() + static_cast<long>(n), f.prefix.c.begin() + static_cast<long>(tail));
  std::vector<unsigned long> rs(f.prefix.r.begin() + static_cast<long>(n), f.prefix.r.begin() + static_cast<long>(tail));
  Rational dlo = density_two_adic(cs, rs);
  Rational rem = make_rational(2, pow2(f.r(tail + 1)) * f.c(tail + 1));
  RationalInterval eps(2 * free_n * dlo, 2 * free_n * (dlo + rem));
  if (max_rel_width && eps.width() > *max_rel_width * eps.lo())
    throw ValidationError("tail " + std::to_string(tail) + " too small to certify the requested precision");
  return eps;
}

// Lower bound M_n^{-1} eps_{l_n} for eps_lower at l_n.
inline RationalInterval toeplitz_lower_gap(const ToeplitzFamily& f, std::size_t n, std::size_t tail) {
  auto eps = toeplitz_eps(f, n, tail);
  Rational m = f.big_m(n);
  return {eps.lo() / m, eps.hi() / m};
}

struct ToeplitzRow {
  std::size_t n = 0;
  RationalInterval eps;        // eps_{l_n}
  RationalInterval upper_eps;  // 2 eps_{l_n}: N at this radius is <= l_n
  RationalInterval lower_eps;  // eps_{l_n} / c_n: N at this radius is >= l_n
  RationalInterval gap;        // eps_{l_n} / M_n
  Rational big_m;
  Integer ell;
  double log_ell = 0.0;
};

inline ToeplitzRow toeplitz_row(const ToeplitzFamily& f, std::size_t n, std::size_t tail) {
  ToeplitzRow row;
  row.n = n;
  row.eps = toeplitz_eps(f, n, tail);
  row.upper_eps = Rational(2) * row.eps;
  row.lower_eps = make_rational(1, f.c(n)) * row.eps;
  row.big_m = f.big_m(n);
  row.gap = (Rational(1) / row.big_m) * row.eps;
  row.ell = f.ell(n);
  row.log_ell = f.log_ell(n).to_double();
  return row;
}

// ---------------------------------------------------------------- square-free

namespace detail {

// Fixed-point enclosure [lo, hi] / 2^bits of a running product, rounded outward.
struct FixedEnclosure {
  Integer lo, hi;
  unsigned long bits;
  explicit FixedEnclosure(unsigned long b) : lo(pow2(b)), hi(pow2(b)), bits(b) {}
  void multiply(const Integer& num, const Integer& den) {
    lo *= num;
    mpz_fdiv_q(lo.get_mpz_t(), lo.get_mpz_t(), den.get_mpz_t());
    hi *= num;
    mpz_cdiv_q(hi.get_mpz_t(), hi.get_mpz_t(), den.get_mpz_t());
  }
  RationalInterval value() const { return {make_rational(lo, pow2(bits)), make_rational(hi, pow2(bits))}; }
};

// sum over primes p > p_t of 1/(p^2-1) <= 1/(2(m0-1)), m0 the first odd number > p_t
inline Rational squarefree_tail(std::uint64_t p_t) {
  std::uint64_t m0 = (p_t % 2 == 0) ? p_t + 1 : p_t + 2;
  return make_rational(1, from_u64(2 * (m0 - 1)));
}

}  // namespace detail

// eps_{l_n} = 2 d(F) (1 - prod_{i>n} (1 - 1/(p_i^2 - 1))) for each n in ns, from the
// first `tail` primes. d(F) = prod_i (1 - 1/p_i^2) and the inner product are both
// enclosed by their partial products over i <= tail times [1 - tau, 1].
inline std::vector<RationalInterval> squarefree_eps_rows(const std::vector<std::size_t>& ns, std::size_t tail,
                                                          unsigned long bits = 256) {
  if (ns.empty()) return {};
  std::size_t nmax = *std::max_element(ns.begin(), ns.end());
  std::size_t nmin = *std::min_element(ns.begin(), ns.end());
  if (nmin < 1) throw ValidationError("n must be >= 1");
  if (tail <= nmax) throw ValidationError("tail must exceed n");
  auto primes = first_primes(tail);
  Rational tau = detail::squarefree_tail(primes.back());
  Rational keep = tau >= 1 ? Rational(0) : Rational(1) - tau;

  detail::FixedEnclosure free(bits);
  for (auto p : primes) {
    Integer pp = from_u64(p) * from_u64(p);
    free.multiply(pp - 1, pp);
  }
  RationalInterval dF = free.value();
  dF = RationalInterval(dF.lo() * keep, dF.hi());

  std::vector<std::size_t> order(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ns[a] > ns[b]; });
  std::vector<RationalInterval> out(ns.size());
  detail::FixedEnclosure inner(bits);
  std::size_t i = tail;  // inner holds prod over (i, tail]
  for (auto idx : order) {
    std::size_t n = ns[idx];
    while (i > n) {
      Integer pp = from_u64(primes[i - 1]) * from_u64(primes[i - 1]);
      inner.multiply(pp - 2, pp - 1);
      --i;
    }
    RationalInterval q = inner.value();
    Rational qlo = q.lo() * keep;
    Rational qhi = q.hi();
    out[idx] = RationalInterval(2 * dF.lo() * (1 - qhi), 2 * dF.hi() * (1 - qlo));
  }
  return out;
}

inline RationalInterval squarefree_eps(std::size_t n, std::size_t tail) { return squarefree_eps_rows({n}, tail)[0]; }

// 12/pi^2 from pi^2/6 in [S_K + 1/(K+1), S_K + 1/K], S_K = sum_{k<=K} 1/k^2.
inline RationalInterval reference_twelve_over_pi2(std::uint64_t k_terms = 100000, unsigned long bits = 160) {
  Integer lo = 0, hi = 0;
  Integer one = pow2(bits);
  for (std::uint64_t k = 1; k <= k_terms; ++k) {
    Integer kk = from_u64(k) * from_u64(k);
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), one.get_mpz_t(), kk.get_mpz_t());
    lo += q;
    mpz_cdiv_q(q.get_mpz_t(), one.get_mpz_t(), kk.get_mpz_t());
    hi += q;
  }
  Rational s_lo = make_rational(lo, one), s_hi = make_rational(hi, one);
  Rational z_lo = s_lo + make_rational(1, from_u64(k_terms + 1));
  Rational z_hi = s_hi + make_rational(1, from_u64(k_terms));
  return {Rational(2) / z_hi, Rational(2) / z_lo};
}

// log l_n = 2 sum_{i<=n} log p_i for each n in ns (high-precision accumulation).
inline std::vector<double> squarefree_log_ell(const std::vector<std::size_t>& ns, mpfr_prec_t bits = 128) {
  std::size_t nmax = ns.empty() ? 0 : *std::max_element(ns.begin(), ns.end());
  auto primes = first_primes(nmax);
  std::vector<double> prefix(nmax + 1, 0.0);
  BigFloat acc(bits);
  BigFloat term(bits);
  for (std::size_t i = 1; i <= nmax; ++i) {
    BigFloat lp = BigFloat::log_of(from_u64(primes[i - 1]), bits);
    mpfr_mul_ui(term.get(), lp.get(), 2, MPFR_RNDN);
    mpfr_add(acc.get(), acc.get(), term.get(), MPFR_RNDN);
    prefix[i] = acc.to_double();
  }
  std::vector<double> out;
  for (auto n : ns) out.push_back(prefix[n]);
  return out;
}

// ------------------------------------------------------------------ fitting

struct ScalingPoint {
  long long index = 0;  // n for family rows
  RationalInterval epsilon;
  double log_scale = 0.0;  // log of the count (or of l_n)
  std::string bound_kind;
};

struct FitResult {
  double exponent = 0.0;
  double intercept = 0.0;
  std::size_t first = 0;  // window [first, last) into the sorted points
  std::size_t last = 0;
  std::vector<double> residuals;
  double residual_norm = 0.0;
};

struct ScalingReport {
  std::vector<ScalingPoint> points;  // sorted by decreasing epsilon
  FitResult fit;
  std::string scale;  // "dimensional" or "power-exp"
  std::vector<std::string> notes;
};

struct FitWindow {
  std::optional<std::size_t> first;
  std::optional<std::size_t> last;
};

namespace detail {

inline double log_of_interval(const RationalInterval& iv) {
  if (iv.lo() <= 0) throw ValidationError("epsilon must be positive");
  return 0.5 * (log_abs(iv.lo()) + log_abs(iv.hi()));
}

inline FitResult least_squares(const std::vector<long double>& x, const std::vector<long double>& y,
                               std::size_t first, std::size_t last) {
  if (last - first < 3) throw ValidationError("a fit needs at least 3 points");
  long double n = static_cast<long double>(last - first), sx = 0, sy = 0;
  for (std::size_t i = first; i < last; ++i) {
    sx += x[i];
    sy += y[i];
  }
  long double mx = sx / n, my = sy / n, sxx = 0, sxy = 0;
  for (std::size_t i = first; i < last; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw ValidationError("degenerate fit: all epsilon equal");
  FitResult f;
  long double slope = sxy / sxx;
  f.exponent = static_cast<double>(slope);
  f.intercept = static_cast<double>(my - slope * mx);
  f.first = first;
  f.last = last;
  long double rn = 0;
  for (std::size_t i = first; i < last; ++i) {
    long double r = y[i] - (my + slope * (x[i] - mx));
    f.residuals.push_back(static_cast<double>(r));
    rn += r * r;
  }
  f.residual_norm = static_cast<double>(std::sqrt(rn));
  return f;
}

inline std::vector<ScalingPoint> sorted_points(std::vector<ScalingPoint> pts) {
  std::stable_sort(pts.begin(), pts.end(),
                   [](const ScalingPoint& a, const ScalingPoint& b) { return a.epsilon.midpoint() > b.epsilon.midpoint(); });
  return pts;
}

inline std::pair<std::size_t, std::size_t> resolve_window(std::size_t n, const FitWindow& w) {
  std::size_t first = w.first.value_or(n >= 5 ? 2 : 0);
  std::size_t last = w.last.value_or(n);
  if (last > n || first >= last) throw ValidationError("invalid fit window");
  return {first, last};
}

}  // namespace detail

// Slope of log(count) against log(1/eps). Default window drops the two
// largest-eps points.
inline FitResult fit_dimensional_exponent(const std::vector<ScalingPoint>& points, const FitWindow& window = {}) {
  auto pts = detail::sorted_points(points);
  std::vector<long double> x, y;
  for (const auto& p : pts) {
    x.push_back(-static_cast<long double>(detail::log_of_interval(p.epsilon)));
    y.push_back(p.log_scale);
  }
  auto [first, last] = detail::resolve_window(pts.size(), window);
  return detail::least_squares(x, y, first, last);
}

// Slope of log(log-count) against log(1/eps).
inline FitResult fit_power_exponential_exponent(const std::vector<ScalingPoint>& points,
                                                const FitWindow& window = {}) {
  auto pts = detail::sorted_points(points);
  std::vector<long double> x, y;
  for (const auto& p : pts) {
    if (!(p.log_scale > 0)) throw ValidationError("log-count must be positive for the power-exponential fit");
    x.push_back(-static_cast<long double>(detail::log_of_interval(p.epsilon)));
    y.push_back(std::log(static_cast<long double>(p.log_scale)));
  }
  auto [first, last] = detail::resolve_window(pts.size(), window);
  return detail::least_squares(x, y, first, last);
}

// Rows n = n_lo..n_hi of a Toeplitz family as two scaling reports: the upper
// row (2 eps, l_n) and the lower row (eps / c_n, l_n).
struct ToeplitzScaling {
  std::vector<ToeplitzRow> rows;
  ScalingReport upper;
  ScalingReport lower;
};

inline ToeplitzScaling toeplitz_scaling(const ToeplitzRule& rule, std::size_t n_lo, std::size_t n_hi,
                                        std::size_t extra_tail = 40, const FitWindow& window = {}) {
  if (n_lo < 1 || n_hi < n_lo) throw ValidationError("invalid n range");
  auto fam = ToeplitzFamily::make(rule, n_hi + extra_tail + 1);
  ToeplitzScaling out;
  out.upper.scale = out.lower.scale = "dimensional";
  for (std::size_t n = n_lo; n <= n_hi; ++n) {
    auto row = toeplitz_row(fam, n, n + extra_tail);
    out.upper.points.push_back({static_cast<long long>(n), row.upper_eps, row.log_ell, "upper"});
    out.lower.points.push_back({static_cast<long long>(n), row.lower_eps, row.log_ell, "lower"});
    out.rows.push_back(std::move(row));
  }
  out.upper.points = detail::sorted_points(out.upper.points);
  out.lower.points = detail::sorted_points(out.lower.points);
  out.upper.fit = fit_dimensional_exponent(out.upper.points, window);
  out.lower.fit = fit_dimensional_exponent(out.lower.points, window);
  return out;
}

inline ScalingReport squarefree_scaling(std::size_t n_lo, std::size_t n_hi, std::size_t tail,
                                        const FitWindow& window = {}) {
  if (n_lo < 1 || n_hi < n_lo) throw ValidationError("invalid n range");
  std::vector<std::size_t> ns;
  for (std::size_t n = n_lo; n <= n_hi; ++n) ns.push_back(n);
  auto eps = squarefree_eps_rows(ns, tail);
  auto logs = squarefree_log_ell(ns);
  ScalingReport rep;
  rep.scale = "power-exp";
  for (std::size_t i = 0; i < ns.size(); ++i)
    rep.points.push_back({static_cast<long long>(ns[i]), eps[i], logs[i], "eps_l_n"});
  rep.points = detail::sorted_points(rep.points);
  rep.fit = fit_power_exponential_exponent(rep.points, window);
  return rep;
}

}  // namespace bfree
