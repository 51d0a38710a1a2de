#pragma once

// d_1(eta, sigma^r eta) for B-free systems, computed three ways: the
// inclusion-exclusion count T_r(S), the closed form for pairwise coprime B, and
// a brute-force mismatch count over one period of the eta word.

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bfree/bset.hpp"
#include "bfree/errors.hpp"
#include "bfree/rational.hpp"

namespace bfree {

// Number of K subset of S \ B_{|r} with gcd(lcm K, lcm(S\K)) | r.
inline Integer t_r_count(const std::vector<Integer>& s, const Integer& r, const std::vector<Integer>& b_div_r) {
  std::vector<Integer> free, fixed;
  for (const auto& x : s) {
    if (std::find(b_div_r.begin(), b_div_r.end(), x) != b_div_r.end()) {
      fixed.push_back(x);
    } else {
      free.push_back(x);
    }
  }
  if (free.size() > 62) throw ResourceError("t_r_count: too many free elements");
  if (pairwise_coprime(s)) return pow2(free.size());
  Integer fixed_lcm = lcm_of(fixed);
  Integer count = 0;
  const std::uint64_t n_sub = std::uint64_t{1} << free.size();
  for (std::uint64_t mask = 0; mask < n_sub; ++mask) {
    Integer lk = 1, lrest = fixed_lcm;
    for (std::size_t i = 0; i < free.size(); ++i) {
      if (mask >> i & 1U) {
        lk = lcm_pair(lk, free[i]);
      } else {
        lrest = lcm_pair(lrest, free[i]);
      }
    }
    if (divides(gcd_of(lk, lrest), r)) ++count;
  }
  return count;
}

// Evaluates d(M_B u (r + M_B)) and d_1 for many r over one finite B.
//
// For |B| <= 12 with a period below 2^62 every (S, K) pair is folded into a
// table keyed by (K, gcd) with integer weights sign * period / lcm(S), so one
// shift costs a pass over a few hundred entries. Larger sets fall back to
// evaluating T_r(S) per subset.
class ShiftDistanceEngine {
 public:
  explicit ShiftDistanceEngine(std::vector<Integer> b, const Caps& caps = {}) : b_(std::move(b)), caps_(caps) {
    if (b_.empty()) throw ValidationError("empty B");
    if (b_.size() > caps_.subset_cap)
      throw ResourceError("inclusion-exclusion over " + std::to_string(b_.size()) +
                          " elements exceeds the subset cap " + std::to_string(caps_.subset_cap));
    period_ = lcm_of(b_);
    density_ = density_MB(b_, caps_);
    fast_ = b_.size() <= 12 && bit_length(period_) <= 62;
    if (fast_) build_table();
  }

  const Integer& period() const { return period_; }
  const Rational& density() const { return density_; }
  const std::vector<Integer>& elements() const { return b_; }

  Rational density_union(const Integer& r) const {
    Integer rr;
    mpz_fdiv_r(rr.get_mpz_t(), r.get_mpz_t(), period_.get_mpz_t());
    if (fast_) return make_rational(Integer(to_string_i128(union_numerator_fast(to_u64(rr)))), period_);
    return union_generic(rr);
  }

  Rational d1(const Integer& r) const { return 2 * (density_union(r) - density_); }

  // Same as d1 but for r already reduced into [0, period) and a u64 period.
  Rational d1_reduced(std::uint64_t r) const {
    if (!fast_) return d1(from_u64(r));
    __int128 num = union_numerator_fast(r) - density_num_;
    return make_rational(Integer(to_string_i128(2 * num)), period_);
  }

 private:
  struct Entry {
    std::uint32_t k_mask;
    std::uint32_t g_index;
    std::int64_t weight;
  };

  static std::string to_string_i128(__int128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
    std::string s;
    while (u > 0) {
      s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
      u /= 10;
    }
    if (neg) s.push_back('-');
    std::reverse(s.begin(), s.end());
    return s;
  }

  void build_table() {
    const std::size_t n = b_.size();
    std::vector<std::uint64_t> bb(n);
    for (std::size_t i = 0; i < n; ++i) bb[i] = to_u64(b_[i]);
    const std::uint64_t L = to_u64(period_);
    const std::uint32_t full = (1U << n) - 1;
    // lcm of every subset; all divide L < 2^62 so no overflow.
    std::vector<std::uint64_t> lcm(std::size_t{1} << n, 1);
    for (std::uint32_t m = 1; m <= full; ++m) {
      int low = __builtin_ctz(m);
      std::uint64_t a = lcm[m & (m - 1)], x = bb[static_cast<std::size_t>(low)];
      lcm[m] = a / std::gcd(a, x) * x;
    }
    std::map<std::pair<std::uint32_t, std::uint64_t>, std::int64_t> acc;
    density_num_ = 0;
    for (std::uint32_t s = 1; s <= full; ++s) {
      std::int64_t sign = (__builtin_popcount(s) % 2 == 1) ? 1 : -1;
      std::int64_t w = sign * static_cast<std::int64_t>(L / lcm[s]);
      density_num_ += w;
      // all K subset of S (including empty)
      for (std::uint32_t k = s;; k = (k - 1) & s) {
        std::uint64_t g = std::gcd(lcm[k], lcm[s & ~k]);
        acc[{k, g}] += w;
        if (k == 0) break;
      }
    }
    std::map<std::uint64_t, std::uint32_t> g_ids;
    for (const auto& [key, w] : acc) {
      if (w == 0) continue;
      auto it = g_ids.find(key.second);
      if (it == g_ids.end()) it = g_ids.emplace(key.second, static_cast<std::uint32_t>(g_ids.size())).first;
      entries_.push_back({key.first, it->second, w});
    }
    gs_.assign(g_ids.size(), 0);
    for (const auto& [g, id] : g_ids) gs_[id] = g;
    bb_ = std::move(bb);
  }

  __int128 union_numerator_fast(std::uint64_t r) const {
    std::uint32_t d_mask = 0;
    for (std::size_t i = 0; i < bb_.size(); ++i)
      if (r % bb_[i] == 0) d_mask |= 1U << i;
    std::vector<std::uint8_t> g_div(gs_.size());
    for (std::size_t i = 0; i < gs_.size(); ++i) g_div[i] = (r % gs_[i] == 0);
    __int128 sum = 0;
    for (const auto& e : entries_)
      if ((e.k_mask & d_mask) == 0 && g_div[e.g_index]) sum += e.weight;
    return sum;
  }

  Rational union_generic(const Integer& r) const {
    auto d = divisors_in(b_, r);
    Rational acc = 0;
    const std::size_t n = b_.size();
    const std::uint64_t n_sub = std::uint64_t{1} << n;
    for (std::uint64_t mask = 1; mask < n_sub; ++mask) {
      std::vector<Integer> s, sd;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask >> i & 1U) {
          s.push_back(b_[i]);
          if (divides(b_[i], r)) sd.push_back(b_[i]);
        }
      }
      int sign = (__builtin_popcountll(mask) % 2 == 1) ? 1 : -1;
      acc += Rational(sign * t_r_count(s, r, sd)) / Rational(lcm_of(s));
    }
    return acc;
  }

  std::vector<Integer> b_;
  Caps caps_;
  Integer period_;
  Rational density_;
  bool fast_ = false;
  std::vector<std::uint64_t> bb_;
  std::vector<std::uint64_t> gs_;
  std::vector<Entry> entries_;
  __int128 density_num_ = 0;
};

inline void require_finite(const BSet& b) {
  if (b.is_infinite())
    throw ValidationError("this operation needs a finite B; use the coprime closed form for infinite families");
}

inline Rational density_union_shift(const BSet& b, const Integer& r, const Caps& caps = {}) {
  require_finite(b);
  return ShiftDistanceEngine(b.elements(), caps).density_union(r);
}

inline Rational d1_shift(const BSet& b, const Integer& r, const Caps& caps = {}) {
  require_finite(b);
  return ShiftDistanceEngine(b.elements(), caps).d1(r);
}

// 2 d(F_B) (1 - prod_{b not dividing r} (1 - 1/(b-1))) for pairwise coprime B,
// from the first n elements. Both infinite products are enclosed by their
// partial products times [1 - tail, 1]; for finite B the interval is a point.
inline RationalInterval d1_shift_coprime(const BSet& b, const Integer& r, std::size_t n) {
  const bool infinite = b.is_infinite();
  if (!infinite) n = b.size();
  if (n == 0) throw ValidationError("truncation must be positive");
  BSet pre = b.prefix(n);
  const auto& el = pre.elements();
  if (!pairwise_coprime(el)) throw ValidationError("elements are not pairwise coprime");
  Integer abs_r = abs(r);
  if (infinite && r != 0) {
    // every omitted element must be too large to divide r
    Integer next;
    if (b.kind() == BSetKind::squarefree) {
      auto p = first_primes(n + 1).back();
      next = from_u64(p) * from_u64(p);
    } else {
      next = el.back() + 1;
    }
    if (next <= abs_r)
      throw ValidationError("truncation too small: omitted elements may divide r; increase the tail");
  }
  const unsigned long bits = infinite ? 256 : (1UL << 30);
  ProductEnclosure free(bits), shifted(bits);
  for (const auto& x : el) {
    free.multiply(make_rational(x - 1, x));
    if (!divides(x, r)) shifted.multiply(make_rational(x - 2, x - 1));
  }
  RationalInterval f = free.value(), p = shifted.value();
  if (infinite && r != 0) {
    Rational t0 = b.tail_sum_bound(n, 0), t1 = b.tail_sum_bound(n, 1);
    Rational k0 = t0 >= 1 ? Rational(0) : Rational(1) - t0;
    Rational k1 = t1 >= 1 ? Rational(0) : Rational(1) - t1;
    f = RationalInterval(f.lo() * k0, f.hi());
    p = RationalInterval(p.lo() * k1, p.hi());
  } else if (infinite) {
    return RationalInterval(Rational(0));
  }
  Rational lo = 2 * f.lo() * (1 - p.hi());
  Rational hi = 2 * f.hi() * (1 - p.lo());
  return {lo, hi};
}

// Mismatch counts of an eta word against its own rotations.
class PeriodicShiftOracle {
 public:
  explicit PeriodicShiftOracle(const PeriodicWord& w) : w_(w) {
    const std::uint64_t l = w.period();
    // twice the word plus one spare 64-bit word, so any 64-bit window is readable
    doubled_.assign((2 * l + 127) / 64 + 1, 0);
    for (std::uint64_t copy = 0; copy < 2; ++copy) {
      const auto& src = w.words();
      for (std::size_t k = 0; k < src.size(); ++k) {
        std::uint64_t bits = src[k];
        std::uint64_t nbits = std::min<std::uint64_t>(64, l - 64 * k);
        if (nbits < 64) bits &= (std::uint64_t{1} << nbits) - 1;
        put(copy * l + 64 * k, bits);
      }
    }
  }

  std::uint64_t mismatches(std::uint64_t r) const {
    const std::uint64_t l = w_.period();
    r %= l;
    const auto& src = w_.words();
    std::uint64_t count = 0;
    for (std::size_t k = 0; k < src.size(); ++k) {
      std::uint64_t x = src[k] ^ get(64 * k + r);
      std::uint64_t nbits = std::min<std::uint64_t>(64, l - 64 * k);
      if (nbits < 64) x &= (std::uint64_t{1} << nbits) - 1;
      count += static_cast<std::uint64_t>(__builtin_popcountll(x));
    }
    return count;
  }

  Rational d1(const Integer& r) const {
    Integer rr;
    mpz_fdiv_r_ui(rr.get_mpz_t(), r.get_mpz_t(), w_.period());
    return make_rational(from_u64(mismatches(to_u64(rr))), from_u64(w_.period()));
  }

 private:
  void put(std::uint64_t pos, std::uint64_t bits) {
    std::size_t i = pos >> 6;
    unsigned off = pos & 63;
    doubled_[i] |= bits << off;
    if (off != 0) doubled_[i + 1] |= bits >> (64 - off);
  }
  std::uint64_t get(std::uint64_t pos) const {
    std::size_t i = pos >> 6;
    unsigned off = pos & 63;
    if (off == 0) return doubled_[i];
    return (doubled_[i] >> off) | (doubled_[i + 1] << (64 - off));
  }

  const PeriodicWord& w_;
  std::vector<std::uint64_t> doubled_;
};

// (1/l) #{0 <= i < l : w_i != w_{i+r mod l}}
inline Rational d1_oracle_periodic(const PeriodicWord& w, const Integer& r) {
  return PeriodicShiftOracle(w).d1(r);
}

// A finite window of a 0/1 sequence, x_{first} .. x_{first + size - 1}.
struct CodedWord {
  long long first_index = 0;
  std::vector<std::uint8_t> bits;
};

// (2n+1)^{-1} times the number of mismatches on [-n, n]; a finite-window
// approximation of the upper density, not the limit. One-sided windows
// [0, 2n] are accepted when allow_one_sided is set.
inline double d1_empirical(const CodedWord& x, const CodedWord& y, long long n, bool allow_one_sided = false) {
  const auto len = static_cast<std::size_t>(2 * n + 1);
  if (n < 0) throw ValidationError("window half-length must be non-negative");
  if (x.bits.size() != len || y.bits.size() != len) throw ValidationError("length mismatch: expected 2n+1 symbols");
  if (x.first_index != y.first_index) throw ValidationError("windows start at different indices");
  if (x.first_index != -n && !(allow_one_sided && x.first_index == 0))
    throw ValidationError("window must cover [-n, n]");
  std::size_t mism = 0;
  for (std::size_t i = 0; i < len; ++i) mism += (x.bits[i] != y.bits[i]);
  return static_cast<double>(mism) / static_cast<double>(len);
}

// r -> d_1(eta, sigma^r eta) on r = 0 .. count-1 of one period.
struct DistanceProfile {
  std::vector<Integer> bset;
  std::uint64_t period = 0;
  std::vector<Rational> values;
  bool formula_path = false;
  bool oracle_path = false;

  bool complete() const { return values.size() == period; }
  const Rational& at(std::uint64_t r) const { return values.at(r % period); }
};

// Both paths are evaluated when feasible; any disagreement is a CrossCheckError.
inline DistanceProfile distance_profile(const BSet& b, std::uint64_t r_max, const Caps& caps = {}) {
  require_finite(b);
  const auto& el = b.elements();
  Integer l = lcm_of(el);
  if (!fits_u64(l) || bit_length(l) > 63) throw ResourceError("period does not fit in 64 bits");
  DistanceProfile p;
  p.bset = el;
  p.period = to_u64(l);
  const std::uint64_t count = std::min<std::uint64_t>(r_max, p.period - 1) + 1;
  p.formula_path = el.size() <= caps.subset_cap;
  p.oracle_path = p.period <= caps.period_cap;
  if (!p.formula_path && !p.oracle_path)
    throw ResourceError("neither the subset cap nor the period cap admits this B");
  std::optional<ShiftDistanceEngine> engine;
  std::optional<PeriodicWord> word;
  std::optional<PeriodicShiftOracle> oracle;
  if (p.formula_path) engine.emplace(el, caps);
  if (p.oracle_path) {
    word.emplace(eta_word(el, caps));
    oracle.emplace(*word);
  }
  p.values.reserve(count);
  for (std::uint64_t r = 0; r < count; ++r) {
    Rational v;
    if (engine) v = engine->d1_reduced(r);
    if (oracle) {
      Rational o = make_rational(from_u64(oracle->mismatches(r)), l);
      if (engine && o != v)
        throw CrossCheckError("d1 mismatch at r=" + std::to_string(r) + ": formula " + v.get_str() + " vs oracle " +
                              o.get_str());
      v = o;
    }
    p.values.push_back(std::move(v));
  }
  return p;
}

// Full-period profile of an arbitrary periodic word (e.g. the image of eta
// under a block code), by the mismatch count only.
inline DistanceProfile profile_from_word(const PeriodicWord& w) {
  DistanceProfile p;
  p.period = w.period();
  p.oracle_path = true;
  PeriodicShiftOracle o(w);
  for (std::uint64_t r = 0; r < p.period; ++r)
    p.values.push_back(make_rational(from_u64(o.mismatches(r)), from_u64(p.period)));
  return p;
}

// r' = lcm(B_{|r}) for pairwise coprime B; d_1 is the same at r and r'.
inline Integer reduce_r(const BSet& b, const Integer& r) {
  if (r == 0) throw ValidationError("reduce_r needs r != 0");
  if (!pairwise_coprime(b.elements())) throw ValidationError("elements are not pairwise coprime");
  return lcm_of(divisors_in(b, r));
}

}  // namespace bfree
