#pragma once

// B-sets, their sets of multiples M_B and the B-free indicator word.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bfree/errors.hpp"
#include "bfree/primes.hpp"
#include "bfree/rational.hpp"

namespace bfree {

struct Caps {
  std::size_t subset_cap = 20;             // |B| for inclusion-exclusion (2^|B| subsets)
  std::uint64_t period_cap = 100'000'000;  // bits in an eta word
};

enum class BSetKind { explicit_list, squarefree, toeplitz, erdos_custom };

inline std::string kind_name(BSetKind k) {
  switch (k) {
    case BSetKind::explicit_list: return "explicit";
    case BSetKind::squarefree: return "squarefree";
    case BSetKind::toeplitz: return "toeplitz";
    case BSetKind::erdos_custom: return "erdos-custom";
  }
  return "?";
}

inline Integer lcm_of(const std::vector<Integer>& s) {
  Integer l = 1;
  for (const auto& x : s) l = lcm_pair(l, x);
  return l;
}

inline bool pairwise_coprime(const std::vector<Integer>& s) {
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j)
      if (gcd_of(s[i], s[j]) != 1) return false;
  return true;
}

// Minimal elements under divisibility, sorted ascending, duplicates removed.
inline std::vector<Integer> minimal_under_divisibility(std::vector<Integer> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  std::vector<Integer> out;
  for (const auto& x : v) {
    bool keep = true;
    for (const auto& y : out)
      if (divides(y, x)) { keep = false; break; }
    if (keep) out.push_back(x);
  }
  return out;
}

// Rules for the family b_i = 2^{r_i} c_i.
struct ToeplitzRule {
  enum class RRule { linear, kappa };
  RRule r_rule = RRule::linear;
  Rational kappa{1};
  std::vector<Integer> c_explicit;  // empty means the odd primes 3, 5, 7, ...

  bool operator==(const ToeplitzRule& o) const {
    return r_rule == o.r_rule && kappa == o.kappa && c_explicit == o.c_explicit;
  }
};

struct ToeplitzPrefix {
  std::vector<Integer> c;
  std::vector<unsigned long> r;
  std::vector<Integer> b() const {
    std::vector<Integer> out;
    for (std::size_t i = 0; i < c.size(); ++i) out.push_back(pow2(r[i]) * c[i]);
    return out;
  }
};

// r_i is the rule value, bumped up when needed so that r is strictly increasing
// from r_0 = 0. For the kappa rule floor(kappa log2 P) is computed exactly as
// floor((bitlen(P^p) - 1) / q) with kappa = p/q.
inline ToeplitzPrefix toeplitz_prefix(const ToeplitzRule& rule, std::size_t n) {
  ToeplitzPrefix out;
  if (rule.c_explicit.empty()) {
    for (auto p : first_odd_primes(n)) out.c.push_back(from_u64(p));
  } else {
    if (rule.c_explicit.size() < n)
      throw ValidationError("explicit c list has only " + std::to_string(rule.c_explicit.size()) +
                            " entries, " + std::to_string(n) + " requested");
    out.c.assign(rule.c_explicit.begin(), rule.c_explicit.begin() + static_cast<long>(n));
  }
  if (rule.r_rule == ToeplitzRule::RRule::kappa && rule.kappa <= 0)
    throw ValidationError("kappa must be positive");
  Integer prod = 1;
  unsigned long prev = 0;
  for (std::size_t i = 0; i < n; ++i) {
    prod *= out.c[i];
    unsigned long v = 0;
    if (rule.r_rule == ToeplitzRule::RRule::linear) {
      v = static_cast<unsigned long>(i + 1);
    } else {
      Integer pp;
      mpz_pow_ui(pp.get_mpz_t(), prod.get_mpz_t(), to_u64(Integer(rule.kappa.get_num())));
      Integer num = Integer(bit_length(pp) - 1);
      v = to_u64(Integer(num / Integer(rule.kappa.get_den())));
    }
    v = std::max(v, prev + 1);
    out.r.push_back(v);
    prev = v;
  }
  return out;
}

inline void validate_toeplitz_c(const std::vector<Integer>& c) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] < 3 || mpz_even_p(c[i].get_mpz_t()))
      throw ValidationError("toeplitz c_i must be odd and >= 3");
    if (i > 0 && c[i] <= c[i - 1]) throw ValidationError("toeplitz c_i must be strictly increasing");
  }
  if (!pairwise_coprime(c)) throw ValidationError("toeplitz c_i must be pairwise coprime");
}

class BSet {
 public:
  static BSet explicit_set(std::vector<Integer> elems) {
    BSet b;
    b.kind_ = BSetKind::explicit_list;
    b.set_normalized(std::move(elems));
    return b;
  }

  static BSet squarefree(std::size_t count) {
    if (count == 0) throw ValidationError("squarefree count must be positive");
    BSet b;
    b.kind_ = BSetKind::squarefree;
    for (auto p : first_primes(count)) {
      Integer z = from_u64(p);
      b.elements_.push_back(z * z);
    }
    return b;
  }

  static BSet toeplitz(ToeplitzRule rule, std::size_t count) {
    if (count == 0) throw ValidationError("toeplitz count must be positive");
    if (!rule.c_explicit.empty()) validate_toeplitz_c(rule.c_explicit);
    BSet b;
    b.kind_ = BSetKind::toeplitz;
    b.rule_ = std::move(rule);
    b.elements_ = toeplitz_prefix(b.rule_, count).b();
    return b;
  }

  // A user-supplied (typically pairwise coprime) prefix of an infinite set, with
  // an optional certified bound on the sum of 1/b over all omitted elements.
  static BSet erdos_custom(std::vector<Integer> elems, std::optional<Rational> tail_bound,
                           bool accept_truncation = false) {
    BSet b;
    b.kind_ = BSetKind::erdos_custom;
    b.set_normalized(std::move(elems));
    if (tail_bound && *tail_bound < 0) throw ValidationError("tail_bound must be non-negative");
    b.tail_bound_ = std::move(tail_bound);
    b.accept_truncation_ = accept_truncation;
    return b;
  }

  BSetKind kind() const { return kind_; }
  const std::vector<Integer>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  std::size_t truncation_index() const { return elements_.size(); }
  const ToeplitzRule& toeplitz_rule() const { return rule_; }
  const std::optional<Rational>& tail_bound() const { return tail_bound_; }
  bool accept_truncation() const { return accept_truncation_; }
  const std::vector<std::string>& notices() const { return notices_; }

  // True when the materialized elements are only a prefix of the intended set.
  bool is_infinite() const {
    switch (kind_) {
      case BSetKind::explicit_list: return false;
      case BSetKind::squarefree:
      case BSetKind::toeplitz: return true;
      case BSetKind::erdos_custom: return tail_bound_.has_value() && *tail_bound_ > 0;
    }
    return false;
  }

  // The same set with the first n elements materialized. Finite kinds cannot grow.
  BSet materialize(std::size_t n) const {
    switch (kind_) {
      case BSetKind::squarefree: return squarefree(n);
      case BSetKind::toeplitz: return toeplitz(rule_, n);
      case BSetKind::explicit_list:
      case BSetKind::erdos_custom: {
        if (n > elements_.size())
          throw ValidationError("cannot materialize " + std::to_string(n) + " elements of a list with " +
                                std::to_string(elements_.size()));
        BSet b = *this;
        b.elements_.resize(n);
        return b;
      }
    }
    return *this;
  }

  BSet prefix(std::size_t n) const {
    if (n > elements_.size()) return materialize(n);
    BSet b = *this;
    b.elements_.resize(n);
    return b;
  }

  // Certified bound on sum_{i>n} 1/(b_i - shift), shift in {0, 1}, over the whole
  // (possibly infinite) set.
  Rational tail_sum_bound(std::size_t n, int shift) const {
    if (shift != 0 && shift != 1) throw ValidationError("shift must be 0 or 1");
    switch (kind_) {
      case BSetKind::explicit_list: {
        Rational s = 0;
        for (std::size_t i = n; i < elements_.size(); ++i) s += Rational(1) / Rational(elements_[i] - shift);
        return s;
      }
      case BSetKind::squarefree: {
        // 1/p^2 <= 1/(p^2-1) = (1/(p-1) - 1/(p+1))/2, summed over odd m > p_n telescopes.
        if (n == 0) return Rational(1, 3) + Rational(1, 4);
        auto p = first_primes(n).back();
        Integer m0 = from_u64(p % 2 == 0 ? p + 1 : p + 2);
        return make_rational(1, 2 * (m0 - 1));
      }
      case BSetKind::toeplitz: {
        auto pre = toeplitz_prefix(rule_, n + 1);
        const Integer& c = pre.c[n];
        unsigned long r = pre.r[n];
        Rational t = make_rational(2, pow2(r) * c);
        if (shift == 1) {
          Integer b = pow2(r) * c;
          t *= make_rational(b, b - 1);
        }
        // sum_{i>n} 2^{-r_i}/c_i <= (1/c_{n+1}) sum_{j>=r_{n+1}} 2^{-j}
        return t;
      }
      case BSetKind::erdos_custom: {
        if (!tail_bound_ && !accept_truncation_)
          throw ValidationError("erdos-custom set has no certified tail bound; pass accept_truncation to "
                                "treat the listed elements as the whole set");
        Rational s = 0;
        for (std::size_t i = n; i < elements_.size(); ++i) s += Rational(1) / Rational(elements_[i] - shift);
        if (tail_bound_) {
          Rational t = *tail_bound_;
          if (shift == 1 && !elements_.empty()) {
            const Integer& last = elements_.back();
            t *= make_rational(last + 1, last);
          }
          s += t;
        }
        return s;
      }
    }
    return Rational(0);
  }

  friend bool operator==(const BSet& a, const BSet& b) {
    return a.kind_ == b.kind_ && a.elements_ == b.elements_ && a.rule_ == b.rule_ &&
           a.tail_bound_ == b.tail_bound_ && a.accept_truncation_ == b.accept_truncation_;
  }

 private:
  void set_normalized(std::vector<Integer> elems) {
    if (elems.empty()) throw ValidationError("empty element list");
    for (const auto& x : elems)
      if (x < 2) throw ValidationError("element " + x.get_str() + " is < 2");
    auto input_size = elems.size();
    auto sorted = elems;
    std::sort(sorted.begin(), sorted.end());
    elements_ = minimal_under_divisibility(std::move(elems));
    if (elements_.size() != input_size) {
      std::vector<std::string> dropped;
      std::size_t j = 0;
      for (const auto& x : sorted) {
        if (j < elements_.size() && elements_[j] == x) {
          ++j;
        } else {
          dropped.push_back(x.get_str());
        }
      }
      std::string msg = "normalized to a primitive set; dropped";
      for (const auto& d : dropped) msg += " " + d;
      notices_.push_back(msg);
    }
  }

  BSetKind kind_ = BSetKind::explicit_list;
  std::vector<Integer> elements_;
  ToeplitzRule rule_;
  std::optional<Rational> tail_bound_;
  bool accept_truncation_ = false;
  std::vector<std::string> notices_;
};

// Subset of minimal elements; M_B is unchanged.
inline BSet normalize_primitive(const BSet& b) {
  if (b.kind() == BSetKind::explicit_list) return BSet::explicit_set(b.elements());
  if (b.kind() == BSetKind::erdos_custom)
    return BSet::erdos_custom(b.elements(), b.tail_bound(), b.accept_truncation());
  return b;  // family kinds are primitive by construction
}

// B_{|r}: the elements dividing r. Every element divides 0.
inline std::vector<Integer> divisors_in(const std::vector<Integer>& b, const Integer& r) {
  std::vector<Integer> out;
  for (const auto& x : b)
    if (divides(x, r)) out.push_back(x);
  return out;
}

inline std::vector<Integer> divisors_in(const BSet& b, const Integer& r) { return divisors_in(b.elements(), r); }

// ---------------------------------------------------------------- spec files

namespace detail {

inline Integer json_integer(const nlohmann::json& j, const char* what) {
  if (j.is_number_unsigned()) return from_u64(j.get<std::uint64_t>());
  if (j.is_number_integer()) return Integer(static_cast<long>(j.get<std::int64_t>()));
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
      throw ValidationError(std::string("malformed integer in ") + what + ": '" + s + "'");
    return Integer(s);
  }
  throw ValidationError(std::string("expected integer for ") + what);
}

inline std::vector<Integer> json_integer_list(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array");
  std::vector<Integer> out;
  for (const auto& x : j) out.push_back(json_integer(x, what));
  auto sorted = out;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ValidationError(std::string(what) + " contains a duplicate entry");
  return out;
}

inline Rational json_rational(const nlohmann::json& j, const char* what) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer() || j.is_number_unsigned()) return Rational(json_integer(j, what));
  throw ValidationError(std::string(what) + " must be a string like \"1/2\" or an integer");
}

inline nlohmann::json integer_json(const Integer& z) {
  if (fits_u64(z) && z < Integer("9007199254740992")) return to_u64(z);
  return z.get_str();
}

inline std::size_t json_count(const nlohmann::json& doc) {
  if (!doc.contains("count")) throw ValidationError("family spec needs 'count'");
  Integer c = json_integer(doc["count"], "count");
  if (c < 1 || c > 100'000'000) throw ValidationError("count out of range");
  return static_cast<std::size_t>(to_u64(c));
}

}  // namespace detail

inline BSet parse_bset_spec(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed spec document: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("spec document must be an object");
  if (!doc.contains("kind") || !doc["kind"].is_string()) throw ValidationError("spec needs a string 'kind'");
  auto kind = doc["kind"].get<std::string>();
  if (kind == "explicit") {
    if (!doc.contains("elements")) throw ValidationError("explicit spec needs 'elements'");
    return BSet::explicit_set(detail::json_integer_list(doc["elements"], "elements"));
  }
  if (kind == "squarefree") return BSet::squarefree(detail::json_count(doc));
  if (kind == "toeplitz") {
    ToeplitzRule rule;
    auto rr = doc.value("r_rule", std::string("linear"));
    if (rr == "linear") {
      rule.r_rule = ToeplitzRule::RRule::linear;
    } else if (rr == "kappa") {
      rule.r_rule = ToeplitzRule::RRule::kappa;
      if (!doc.contains("kappa")) throw ValidationError("r_rule 'kappa' needs a 'kappa' field");
      rule.kappa = detail::json_rational(doc["kappa"], "kappa");
      if (rule.kappa <= 0) throw ValidationError("kappa must be positive");
    } else {
      throw ValidationError("unknown r_rule '" + rr + "'");
    }
    if (doc.contains("c_rule")) {
      const auto& c = doc["c_rule"];
      if (c.is_string()) {
        if (c.get<std::string>() != "odd-primes") throw ValidationError("unknown c_rule");
      } else if (c.is_object() && c.contains("explicit")) {
        rule.c_explicit = detail::json_integer_list(c["explicit"], "c_rule.explicit");
      } else {
        throw ValidationError("c_rule must be \"odd-primes\" or {\"explicit\": [...]}");
      }
    }
    return BSet::toeplitz(std::move(rule), detail::json_count(doc));
  }
  if (kind == "erdos-custom") {
    if (!doc.contains("elements")) throw ValidationError("erdos-custom spec needs 'elements'");
    std::optional<Rational> tail;
    if (doc.contains("tail_bound")) tail = detail::json_rational(doc["tail_bound"], "tail_bound");
    bool accept = doc.value("accept_truncation", false);
    return BSet::erdos_custom(detail::json_integer_list(doc["elements"], "elements"), tail, accept);
  }
  throw ValidationError("unknown kind '" + kind + "'");
}

inline BSet load_bset_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open spec file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_bset_spec(ss.str());
}

inline std::string to_spec(const BSet& b) {
  nlohmann::ordered_json doc;
  doc["kind"] = kind_name(b.kind());
  switch (b.kind()) {
    case BSetKind::explicit_list: {
      auto arr = nlohmann::json::array();
      for (const auto& x : b.elements()) arr.push_back(detail::integer_json(x));
      doc["elements"] = arr;
      break;
    }
    case BSetKind::squarefree: doc["count"] = b.size(); break;
    case BSetKind::toeplitz: {
      const auto& rule = b.toeplitz_rule();
      doc["count"] = b.size();
      if (rule.r_rule == ToeplitzRule::RRule::linear) {
        doc["r_rule"] = "linear";
      } else {
        doc["r_rule"] = "kappa";
        doc["kappa"] = rule.kappa.get_str();
      }
      if (rule.c_explicit.empty()) {
        doc["c_rule"] = "odd-primes";
      } else {
        auto arr = nlohmann::json::array();
        for (const auto& x : rule.c_explicit) arr.push_back(detail::integer_json(x));
        doc["c_rule"] = {{"explicit", arr}};
      }
      break;
    }
    case BSetKind::erdos_custom: {
      auto arr = nlohmann::json::array();
      for (const auto& x : b.elements()) arr.push_back(detail::integer_json(x));
      doc["elements"] = arr;
      if (b.tail_bound()) doc["tail_bound"] = b.tail_bound()->get_str();
      if (b.accept_truncation()) doc["accept_truncation"] = true;
      break;
    }
  }
  return doc.dump();
}

// ---------------------------------------------------------------- eta word

// eta restricted to one period: bit i is 1 iff i is B-free.
class PeriodicWord {
 public:
  PeriodicWord() = default;
  explicit PeriodicWord(std::uint64_t period) : period_(period), words_((period + 63) / 64, 0) {}

  std::uint64_t period() const { return period_; }
  bool get(std::uint64_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::uint64_t i, bool v) {
    if (v) {
      words_[i >> 6] |= (std::uint64_t{1} << (i & 63));
    } else {
      words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
    }
  }
  bool at(const Integer& k) const {
    Integer m;
    mpz_fdiv_r_ui(m.get_mpz_t(), k.get_mpz_t(), period_);
    return get(to_u64(m));
  }
  std::uint64_t count_ones() const {
    std::uint64_t c = 0;
    for (auto w : words_) c += static_cast<std::uint64_t>(__builtin_popcountll(w));
    return c;
  }
  const std::vector<std::uint64_t>& words() const { return words_; }

  std::string to_string() const {
    std::string s(period_, '0');
    for (std::uint64_t i = 0; i < period_; ++i)
      if (get(i)) s[i] = '1';
    return s;
  }

  friend bool operator==(const PeriodicWord& a, const PeriodicWord& b) {
    return a.period_ == b.period_ && a.words_ == b.words_;
  }

 private:
  std::uint64_t period_ = 0;
  std::vector<std::uint64_t> words_;
};

inline PeriodicWord eta_word(const std::vector<Integer>& b, const Caps& caps = {}) {
  Integer l = lcm_of(b);
  if (l > from_u64(caps.period_cap))
    throw ResourceError("period " + l.get_str() + " exceeds the cap of " + std::to_string(caps.period_cap) + " bits");
  auto period = to_u64(l);
  PeriodicWord w(period);
  for (std::uint64_t i = 0; i < period; ++i) w.set(i, true);
  for (const auto& x : b) {
    auto step = to_u64(x);
    for (std::uint64_t i = 0; i < period; i += step) w.set(i, false);
  }
  return w;
}

inline PeriodicWord eta_word(const BSet& b, const Caps& caps = {}) { return eta_word(b.elements(), caps); }

// ---------------------------------------------------------------- densities

// d(M_S) for S = {2^{r_j} c_j} with c odd, pairwise coprime and r strictly
// increasing: split by the 2-adic valuation v of x; x in M_S iff some c_j | x
// with r_j <= v.
inline Rational density_two_adic(const std::vector<Integer>& c, const std::vector<unsigned long>& r) {
  if (c.size() != r.size()) throw ValidationError("c and r lengths differ");
  for (std::size_t i = 1; i < r.size(); ++i)
    if (r[i] <= r[i - 1]) throw ValidationError("r must be strictly increasing");
  Rational sum = 0;
  Rational free_odd = 1;
  for (std::size_t j = 0; j < c.size(); ++j) {
    free_odd *= make_rational(c[j] - 1, c[j]);
    Rational layer = make_rational(1, pow2(r[j]));
    if (j + 1 < c.size()) layer -= make_rational(1, pow2(r[j + 1]));
    sum += layer * (Rational(1) - free_odd);
  }
  return sum;
}

namespace detail {

inline void inclusion_exclusion(const std::vector<Integer>& b, std::size_t i, const Integer& l, int sign,
                                Rational& acc) {
  for (std::size_t j = i; j < b.size(); ++j) {
    Integer nl = lcm_pair(l, b[j]);
    acc += Rational(sign) / Rational(nl);
    inclusion_exclusion(b, j + 1, nl, -sign, acc);
  }
}

}  // namespace detail

// Exact d(M_B) for finite B. Pairwise coprime sets use the product formula;
// everything else goes through inclusion-exclusion (|B| <= subset cap).
inline Rational density_MB(const std::vector<Integer>& b, const Caps& caps = {}) {
  if (b.empty()) return Rational(0);
  if (pairwise_coprime(b)) {
    Rational free = 1;
    for (const auto& x : b) free *= make_rational(x - 1, x);
    return Rational(1) - free;
  }
  if (b.size() > caps.subset_cap)
    throw ResourceError("inclusion-exclusion over " + std::to_string(b.size()) + " elements exceeds the subset cap " +
                        std::to_string(caps.subset_cap));
  Rational acc = 0;
  detail::inclusion_exclusion(b, 0, Integer(1), 1, acc);
  return acc;
}

inline Rational density_MB(const BSet& b, const Caps& caps = {}) {
  if (b.kind() == BSetKind::toeplitz) {
    auto pre = toeplitz_prefix(b.toeplitz_rule(), b.size());
    return density_two_adic(pre.c, pre.r);
  }
  return density_MB(b.elements(), caps);
}

// Enclosure of d(M_B) for the whole (possibly infinite) set from its first n
// elements. lo is exact; hi adds a certified bound for the omitted elements.
inline RationalInterval density_MB_bounds(const BSet& b, std::size_t n, const Caps& caps = {}) {
  if (b.kind() == BSetKind::explicit_list) {
    auto d = density_MB(b, caps);
    return RationalInterval(d);
  }
  if (b.kind() == BSetKind::erdos_custom && !b.tail_bound() && !b.accept_truncation())
    throw ValidationError("family lacks a certified tail bound; explicit truncation acceptance required");
  BSet pre = b.prefix(n);
  Rational lo = density_MB(pre, caps);
  Rational tail = b.tail_sum_bound(n, 0);
  if (b.kind() == BSetKind::squarefree) {
    // d(M_B) = 1 - prod(1-1/b) and prod_{i>n}(1-1/b_i) >= 1 - tail.
    Rational free_n = Rational(1) - lo;
    Rational hi = Rational(1) - free_n * (tail >= 1 ? Rational(0) : Rational(1) - tail);
    return {lo, hi};
  }
  Rational hi = lo + tail;
  if (hi > 1) hi = 1;
  return {lo, hi};
}

// True iff removing any single element strictly lowers the density.
inline bool is_taut(const std::vector<Integer>& b, const Caps& caps = {}) {
  Rational d = density_MB(b, caps);
  for (std::size_t i = 0; i < b.size(); ++i) {
    std::vector<Integer> rest;
    for (std::size_t j = 0; j < b.size(); ++j)
      if (j != i) rest.push_back(b[j]);
    if (!(density_MB(rest, caps) < d)) return false;
  }
  return true;
}

inline bool is_taut(const BSet& b, const Caps& caps = {}) {
  if (b.is_infinite()) throw ValidationError("tautness is only decided for finite B");
  return is_taut(b.elements(), caps);
}

}  // namespace bfree
