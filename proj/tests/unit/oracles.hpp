#pragma once

// Brute-force reference implementations used only by the tests. They share no
// code with the library beyond the number types.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "bfree/circle.hpp"
#include "bfree/qsqrt5.hpp"
#include "bfree/rational.hpp"

namespace oracle {

using bfree::Integer;
using bfree::Rational;

inline std::uint64_t lcm_u64(const std::vector<std::uint64_t>& b) {
  std::uint64_t l = 1;
  for (auto x : b) l = std::lcm(l, x);
  return l;
}

inline bool is_free(std::uint64_t i, const std::vector<std::uint64_t>& b) {
  for (auto x : b)
    if (i % x == 0) return false;
  return true;
}

inline Rational density_multiples(const std::vector<std::uint64_t>& b) {
  const std::uint64_t l = lcm_u64(b);
  std::uint64_t c = 0;
  for (std::uint64_t i = 0; i < l; ++i) c += is_free(i, b) ? 0 : 1;
  Rational q(bfree::from_u64(c), bfree::from_u64(l));
  q.canonicalize();
  return q;
}

// d(M symmetric-difference (M + r)) by a direct count over one period.
inline Rational d1(const std::vector<std::uint64_t>& b, std::uint64_t r) {
  const std::uint64_t l = lcm_u64(b);
  std::uint64_t c = 0;
  for (std::uint64_t i = 0; i < l; ++i) c += is_free(i, b) != is_free((i + r) % l, b) ? 1 : 0;
  Rational q(bfree::from_u64(c), bfree::from_u64(l));
  q.canonicalize();
  return q;
}

inline std::vector<Integer> to_integers(const std::vector<std::uint64_t>& b) {
  std::vector<Integer> out;
  for (auto x : b) out.push_back(bfree::from_u64(x));
  return out;
}

// Minimum number of translates of s covering Z/nZ, by exhaustive search over
// center sets in increasing size.
inline std::uint64_t min_cover(std::uint64_t n, const std::vector<std::uint64_t>& s) {
  if (n > 20) throw std::invalid_argument("oracle cover only for n <= 20");
  std::uint64_t best = n;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    auto k = static_cast<std::uint64_t>(__builtin_popcountll(mask));
    if (k >= best) continue;
    std::uint64_t cov = 0;
    for (std::uint64_t i = 0; i < n; ++i)
      if (mask >> i & 1U)
        for (auto x : s) cov |= std::uint64_t{1} << ((i + x) % n);
    if (cov == (std::uint64_t{1} << n) - 1) best = k;
  }
  return best;
}

// lambda(W n (W + h)) as a sum of pairwise arc overlaps on the circle.
inline bfree::QSqrt5 overlap(const bfree::CircleIntervalSet& w, const bfree::QSqrt5& h) {
  using bfree::QSqrt5;
  const QSqrt5 zero, one(Rational(1));
  QSqrt5 total;
  for (const auto& x : w.arcs()) {
    for (const auto& y : w.arcs()) {
      // y + h + k for the integer shifts k that can meet x
      QSqrt5 ya = y.a + h, yb = y.b + h;
      for (long k = -2; k <= 2; ++k) {
        QSqrt5 a = ya + QSqrt5(Rational(k)), b = yb + QSqrt5(Rational(k));
        QSqrt5 lo = std::max(a, x.a), hi = std::min(b, x.b);
        if (lo < hi) total += hi - lo;
      }
    }
  }
  return total;
}

inline bfree::QSqrt5 d_w(const bfree::CircleIntervalSet& w, const bfree::QSqrt5& h) {
  return bfree::QSqrt5(Rational(2)) * (w.measure() - overlap(w, h));
}

}  // namespace oracle
