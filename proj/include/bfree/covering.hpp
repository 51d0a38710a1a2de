#pragma once

// Covering numbers of the orbit of eta under d_1: the distances eps_S and
// eps_lower, the ball-mass sandwich, greedy separated sets and exact minimum
// covers of Z/lZ by translates of the open ball S_eps = {k : d_1 at k < eps}.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bfree/bset.hpp"
#include "bfree/distance.hpp"
#include "bfree/errors.hpp"
#include "bfree/rational.hpp"

namespace bfree {

// eps_S = d_1(eta, sigma^{lcm S} eta); a point interval for finite B.
inline RationalInterval eps_S(const BSet& b, const std::vector<Integer>& s, const Caps& caps = {}) {
  for (const auto& x : s)
    if (std::find(b.elements().begin(), b.elements().end(), x) == b.elements().end())
      throw ValidationError("S is not a subset of B: " + x.get_str());
  Integer l = lcm_of(s);
  if (!b.is_infinite()) return RationalInterval(d1_shift(b, l, caps));
  return d1_shift_coprime(b, l, b.size());
}

// min{d_1(eta, sigma^j eta) : 1 <= j <= r}
inline Rational eps_lower(const DistanceProfile& p, std::uint64_t r) {
  if (r < 1) throw ValidationError("eps_lower needs r >= 1");
  if (r >= p.period) return Rational(0);
  if (p.values.size() <= r) throw ValidationError("profile too short for eps_lower");
  Rational m = p.values[1];
  for (std::uint64_t j = 2; j <= r; ++j)
    if (p.values[j] < m) m = p.values[j];
  return m;
}

inline Rational eps_lower(const BSet& b, std::uint64_t r, const Caps& caps = {}) {
  require_finite(b);
  Integer l = lcm_of(b.elements());
  if (from_u64(r) >= l) return Rational(0);
  return eps_lower(distance_profile(b, r, caps), r);
}

struct LemmaBound {
  Rational epsilon;
  Integer count;
  std::string tag;  // "upper-estimate": N_eps <= count; "lower-estimate": N_eps >= count
};

struct LemmaBounds {
  LemmaBound upper;
  LemmaBound lower;
  // For pairwise coprime B and S an initial segment of B: eps_lower at l_S == eps_S.
  std::optional<bool> coprime_segment_equality;
};

// Upper: N_{M eps_S} <= l_S for M > 1. Lower: N_{eps_lower(r)} >= r.
inline LemmaBounds lemma_bounds(const BSet& b, const std::vector<Integer>& s, std::uint64_t r,
                                const Rational& m = Rational(101, 100), const Caps& caps = {}) {
  require_finite(b);
  if (m <= 1) throw ValidationError("M must exceed 1");
  LemmaBounds out;
  Integer ls = lcm_of(s);
  Rational es = eps_S(b, s, caps).lo();
  out.upper = {m * es, ls, "upper-estimate"};
  out.lower = {eps_lower(b, r, caps), from_u64(r), "lower-estimate"};
  const auto& el = b.elements();
  if (pairwise_coprime(el) && !s.empty()) {
    auto smax = *std::max_element(s.begin(), s.end());
    std::vector<Integer> seg;
    for (const auto& x : el)
      if (x <= smax) seg.push_back(x);
    auto sorted = s;
    std::sort(sorted.begin(), sorted.end());
    if (seg == sorted && fits_u64(ls)) out.coprime_segment_equality = (eps_lower(b, to_u64(ls), caps) == es);
  }
  return out;
}

namespace detail {

inline void require_complete(const DistanceProfile& p) {
  if (!p.complete()) throw ValidationError("a full-period profile is required");
}

inline std::vector<std::uint64_t> ball_offsets(const DistanceProfile& p, const Rational& eps) {
  std::vector<std::uint64_t> s;
  for (std::uint64_t k = 0; k < p.period; ++k)
    if (p.values[k] < eps) s.push_back(k);
  return s;
}

}  // namespace detail

// Mirsky measure of an open d_1 ball: #{k : values[k] < eps} / l.
inline Rational ball_mass(const DistanceProfile& p, const Rational& eps) {
  detail::require_complete(p);
  std::uint64_t c = 0;
  for (const auto& v : p.values)
    if (v < eps) ++c;
  return make_rational(from_u64(c), from_u64(p.period));
}

struct CoveringBounds {
  Rational epsilon;
  Integer lower;
  Integer upper;
  std::optional<Integer> separated;
  std::optional<Integer> exact;
  std::string lower_tag = "ball-mass";
  std::string upper_tag = "half-radius-ball-mass";
};

// lower = ceil(1 / mass(eps)), upper = floor(1 / mass(eps / 2)).
inline CoveringBounds covering_sandwich(const DistanceProfile& p, const Rational& eps) {
  if (eps <= 0) throw ValidationError("epsilon must be positive");
  CoveringBounds cb;
  cb.epsilon = eps;
  cb.lower = ceil_of(Rational(1) / ball_mass(p, eps));
  cb.upper = floor_of(Rational(1) / ball_mass(p, eps / 2));
  return cb;
}

// Greedy maximal eps-separated subset of Z/lZ, scanning residues upward.
inline std::uint64_t separated_cover(const DistanceProfile& p, const Rational& eps) {
  detail::require_complete(p);
  if (eps <= 0) throw ValidationError("epsilon must be positive");
  const std::uint64_t l = p.period;
  auto s = detail::ball_offsets(p, eps);
  std::vector<std::uint8_t> covered(l, 0);
  std::uint64_t picked = 0;
  for (std::uint64_t i = 0; i < l; ++i) {
    if (covered[i]) continue;
    ++picked;
    for (auto k : s) covered[(i + k) % l] = 1;
  }
  return picked;
}

namespace detail {

class TranslateCover {
 public:
  TranslateCover(std::uint64_t n, const std::vector<std::uint64_t>& s, std::uint64_t node_budget)
      : n_(n), words_((n + 63) / 64), s_(s), budget_(node_budget) {
    translates_.assign(n_ * words_, 0);
    for (std::uint64_t i = 0; i < n_; ++i)
      for (auto k : s_) set_bit(&translates_[i * words_], (i + k) % n_);
    full_.assign(words_, ~std::uint64_t{0});
    if (n_ % 64) full_.back() = (std::uint64_t{1} << (n_ % 64)) - 1;
  }

  std::uint64_t solve(std::uint64_t upper_bound) {
    best_ = upper_bound;
    // rotating any cover moves one of its translates to 0
    std::vector<std::uint64_t> cov(translates_.begin(), translates_.begin() + static_cast<long>(words_));
    dfs(cov, 1);
    return best_;
  }

 private:
  struct WordsHash {
    std::size_t operator()(const std::vector<std::uint64_t>& v) const {
      std::uint64_t h = 0x9E3779B97F4A7C15ULL;
      for (auto w : v) h = (h ^ w) * 0x100000001B3ULL + (h >> 29);
      return static_cast<std::size_t>(h);
    }
  };

  static void set_bit(std::uint64_t* w, std::uint64_t i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }

  std::uint64_t gain(std::uint64_t i, const std::vector<std::uint64_t>& cov) const {
    const std::uint64_t* t = &translates_[i * words_];
    std::uint64_t g = 0;
    for (std::size_t w = 0; w < words_; ++w) g += static_cast<std::uint64_t>(__builtin_popcountll(t[w] & ~cov[w]));
    return g;
  }

  void dfs(const std::vector<std::uint64_t>& cov, std::uint64_t depth) {
    if (++nodes_ > budget_) throw ResourceError("exact cover search exceeded its node budget");
    // a covered set reached before at the same or smaller depth has been explored already
    if (auto it = seen_.find(cov); it != seen_.end()) {
      if (it->second <= depth) return;
      it->second = depth;
    } else if (seen_.size() < kMemoCap) {
      seen_.emplace(cov, depth);
    }
    std::uint64_t unc = 0;
    for (std::size_t w = 0; w < words_; ++w) unc += static_cast<std::uint64_t>(__builtin_popcountll(full_[w] & ~cov[w]));
    if (unc == 0) {
      best_ = std::min(best_, depth);
      return;
    }
    std::uint64_t max_gain = 1;
    for (std::uint64_t i = 0; i < n_; ++i) max_gain = std::max(max_gain, gain(i, cov));
    std::uint64_t need = (unc + max_gain - 1) / max_gain;
    if (depth + need >= best_) return;
    // branch on the uncovered point with the fewest useful translates (first
    // uncovered point when that scan would be expensive)
    std::uint64_t u = 0, u_best = ~std::uint64_t{0};
    const bool scan = n_ * s_.size() <= 40000;
    for (std::uint64_t x = 0; x < n_; ++x) {
      if (cov[x >> 6] >> (x & 63) & 1U) continue;
      if (!scan) {
        u = x;
        break;
      }
      std::uint64_t distinct = 0;
      for (auto k : s_) distinct += gain((x + n_ - k) % n_, cov) > 0 ? 1 : 0;
      if (distinct < u_best) {
        u_best = distinct;
        u = x;
      }
    }
    std::vector<std::pair<std::uint64_t, std::uint64_t>> cand;
    for (auto k : s_) {
      std::uint64_t i = (u + n_ - k) % n_;
      cand.push_back({gain(i, cov), i});
    }
    std::sort(cand.begin(), cand.end(), [](auto a, auto b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
    std::vector<std::uint64_t> next(words_);
    for (const auto& [g, i] : cand) {
      const std::uint64_t* t = &translates_[i * words_];
      for (std::size_t w = 0; w < words_; ++w) next[w] = cov[w] | t[w];
      dfs(next, depth + 1);
      if (depth + need >= best_) return;
    }
  }

  std::uint64_t n_;
  std::size_t words_;
  std::vector<std::uint64_t> s_;
  std::vector<std::uint64_t> translates_;
  std::vector<std::uint64_t> full_;
  static constexpr std::size_t kMemoCap = 2'000'000;
  std::unordered_map<std::vector<std::uint64_t>, std::uint64_t, WordsHash> seen_;
  std::uint64_t best_ = 0;
  std::uint64_t nodes_ = 0;
  std::uint64_t budget_;
};

}  // namespace detail

// Minimum number of translates i + S_eps covering Z/lZ. S_eps is first reduced
// modulo its smallest period h | l (the cover problem on Z/hZ is equivalent),
// then solved by branch and bound.
inline std::uint64_t exact_cover_small(const DistanceProfile& p, const Rational& eps, std::uint64_t cap = 2000,
                                       std::uint64_t node_budget = 50'000'000) {
  detail::require_complete(p);
  if (eps <= 0) throw ValidationError("epsilon must be positive");
  const std::uint64_t l = p.period;
  if (l > cap) throw ResourceError("period " + std::to_string(l) + " exceeds the exact-cover cap " + std::to_string(cap));
  std::vector<std::uint8_t> in(l, 0);
  for (std::uint64_t k = 0; k < l; ++k) in[k] = p.values[k] < eps;
  std::uint64_t h = l;
  for (std::uint64_t d = 1; d < l; ++d) {
    if (l % d) continue;
    bool periodic = true;
    for (std::uint64_t k = 0; k < l && periodic; ++k) periodic = in[k] == in[(k + d) % l];
    if (periodic) {
      h = d;
      break;
    }
  }
  std::vector<std::uint64_t> s;
  for (std::uint64_t k = 0; k < h; ++k)
    if (in[k]) s.push_back(k);
  if (s.size() == h) return 1;
  // greedy separated set on Z/hZ as the starting upper bound
  std::vector<std::uint8_t> covered(h, 0);
  std::uint64_t greedy = 0;
  for (std::uint64_t i = 0; i < h; ++i) {
    if (covered[i]) continue;
    ++greedy;
    for (auto k : s) covered[(i + k) % h] = 1;
  }
  detail::TranslateCover tc(h, s, node_budget);
  return tc.solve(greedy);
}

inline CoveringBounds covering_bounds(const DistanceProfile& p, const Rational& eps, bool with_exact,
                                      std::uint64_t exact_cap = 2000) {
  auto cb = covering_sandwich(p, eps);
  cb.separated = from_u64(separated_cover(p, eps));
  if (with_exact) cb.exact = from_u64(exact_cover_small(p, eps, exact_cap));
  return cb;
}

// A sliding block code of length M: y_i = f(x_i, ..., x_{i+M-1}), with f given as
// a table of 2^M bits indexed by the block read as a binary number (x_i highest).
struct BlockCode {
  std::size_t length = 1;
  std::vector<std::uint8_t> table;
};

inline PeriodicWord apply_block_code(const PeriodicWord& x, const BlockCode& f) {
  if (f.length < 1 || f.length > 16) throw ValidationError("block length must lie in 1..16");
  if (f.table.size() != (std::size_t{1} << f.length)) throw ValidationError("block code table must have 2^M entries");
  const std::uint64_t l = x.period();
  PeriodicWord y(l);
  for (std::uint64_t i = 0; i < l; ++i) {
    std::size_t idx = 0;
    for (std::size_t t = 0; t < f.length; ++t) idx = (idx << 1) | (x.get((i + t) % l) ? 1U : 0U);
    y.set(i, f.table[idx] != 0);
  }
  return y;
}

// Full profile k -> d_1(w, sigma^k w) of a periodic word, on its stated period.
inline DistanceProfile word_profile(const PeriodicWord& w) {
  DistanceProfile p;
  p.period = w.period();
  p.values.reserve(p.period);
  for (std::uint64_t k = 0; k < p.period; ++k) p.values.push_back(d1_oracle_periodic(w, from_u64(k)));
  p.oracle_path = true;
  return p;
}

}  // namespace bfree
