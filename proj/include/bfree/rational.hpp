#pragma once

// Exact integers and rationals (GMP), plus outward-rounded rational intervals.

#include <gmpxx.h>

#include <cmath>
#include <compare>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "bfree/errors.hpp"

namespace bfree {

using Integer = mpz_class;
using Rational = mpq_class;

inline Rational make_rational(const Integer& num, const Integer& den) {
  if (den == 0) throw ValidationError("rational with zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline Integer floor_of(const Rational& q) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline Integer ceil_of(const Rational& q) {
  Integer r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline Integer gcd_of(const Integer& a, const Integer& b) {
  Integer g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

inline Integer lcm_pair(const Integer& a, const Integer& b) {
  Integer l;
  mpz_lcm(l.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return l;
}

inline bool divides(const Integer& d, const Integer& n) {
  return mpz_divisible_p(n.get_mpz_t(), d.get_mpz_t()) != 0;
}

inline Integer pow2(unsigned long e) {
  Integer r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, e);
  return r;
}

inline std::size_t bit_length(const Integer& z) {
  return z == 0 ? 0 : mpz_sizeinbase(z.get_mpz_t(), 2);
}

inline bool fits_u64(const Integer& z) {
  return z >= 0 && bit_length(z) <= 64;
}

inline std::uint64_t to_u64(const Integer& z) {
  if (!fits_u64(z)) throw ResourceError("integer does not fit in 64 bits");
  std::uint64_t v = 0;
  mpz_export(&v, nullptr, -1, sizeof v, 0, 0, z.get_mpz_t());
  return v;
}

inline Integer from_u64(std::uint64_t v) {
  Integer z;
  mpz_import(z.get_mpz_t(), 1, -1, sizeof v, 0, 0, &v);
  return z;
}

inline std::string to_string(const Integer& z) { return z.get_str(); }

inline std::string to_string(const Rational& q) { return q.get_str(); }

// Natural log of |z| for z != 0, accurate to double precision for any size.
inline double log_abs(const Integer& z) {
  if (z == 0) throw ValidationError("log of zero");
  long exp = 0;
  double m = mpz_get_d_2exp(&exp, z.get_mpz_t());
  return std::log(std::fabs(m)) + static_cast<double>(exp) * std::log(2.0);
}

inline double log_abs(const Rational& q) {
  return log_abs(Integer(q.get_num())) - log_abs(Integer(q.get_den()));
}

inline double to_double(const Rational& q) {
  if (q == 0) return 0.0;
  // mpq_get_d underflows for tiny values with huge denominators.
  double l = log_abs(q);
  if (l > -700.0 && l < 700.0) return q.get_d();
  return (q < 0 ? -1.0 : 1.0) * std::exp(l);
}

// Exact rational value of a finite long double.
inline Rational from_long_double(long double x) {
  if (!std::isfinite(x)) throw ValidationError("non-finite floating value");
  if (x == 0.0L) return Rational(0);
  int exp = 0;
  long double m = std::fabs(std::frexp(x, &exp));
  // Up to 64 mantissa bits; split in two 32-bit halves so each step is exact.
  long double hi = std::floor(std::ldexp(m, 32));
  long double lo = std::ldexp(m, 64) - std::ldexp(hi, 32);
  Integer num = from_u64(static_cast<std::uint64_t>(hi)) * pow2(32) +
                from_u64(static_cast<std::uint64_t>(lo));
  if (x < 0) num = -num;
  int e = exp - 64;
  Rational q(num);
  if (e >= 0) {
    q *= Rational(pow2(static_cast<unsigned long>(e)));
  } else {
    q /= Rational(pow2(static_cast<unsigned long>(-e)));
  }
  q.canonicalize();
  return q;
}

// Parse "a", "-a", "a/b" or a decimal "x.y" (exactly) into a Rational.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  s = s.substr(b);
  if (s.empty()) throw ValidationError("empty rational literal");
  auto digits_ok = [](std::string_view t, bool allow_sign) {
    std::size_t i = 0;
    if (allow_sign && !t.empty() && (t[0] == '-' || t[0] == '+')) ++i;
    if (i >= t.size()) return false;
    for (; i < t.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
    return true;
  };
  auto strip_plus = [](std::string t) {
    if (!t.empty() && t[0] == '+') t.erase(0, 1);
    return t;
  };
  if (auto slash = s.find('/'); slash != std::string::npos) {
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    if (!digits_ok(num, true) || !digits_ok(den, false))
      throw ValidationError("malformed rational literal '" + s + "'");
    return make_rational(Integer(strip_plus(num)), Integer(den));
  }
  if (auto dot = s.find('.'); dot != std::string::npos) {
    std::string ip = s.substr(0, dot), fp = s.substr(dot + 1);
    bool neg = !ip.empty() && ip[0] == '-';
    if (!ip.empty() && (ip[0] == '-' || ip[0] == '+')) ip.erase(0, 1);
    if (ip.empty()) ip = "0";
    if (!digits_ok(ip, false) || (!fp.empty() && !digits_ok(fp, false)))
      throw ValidationError("malformed decimal literal '" + s + "'");
    Integer scale = 1;
    for (std::size_t i = 0; i < fp.size(); ++i) scale *= 10;
    Integer num = Integer(ip) * scale + (fp.empty() ? Integer(0) : Integer(fp));
    if (neg) num = -num;
    return make_rational(num, scale);
  }
  if (!digits_ok(s, true)) throw ValidationError("malformed rational literal '" + s + "'");
  return Rational(Integer(strip_plus(s)));
}

// floor(q * 2^bits) / 2^bits and the matching ceiling.
inline Rational round_down_dyadic(const Rational& q, unsigned long bits) {
  Integer scaled = q.get_num() * pow2(bits);
  Integer f;
  mpz_fdiv_q(f.get_mpz_t(), scaled.get_mpz_t(), q.get_den_mpz_t());
  return make_rational(f, pow2(bits));
}

inline Rational round_up_dyadic(const Rational& q, unsigned long bits) {
  Integer scaled = q.get_num() * pow2(bits);
  Integer c;
  mpz_cdiv_q(c.get_mpz_t(), scaled.get_mpz_t(), q.get_den_mpz_t());
  return make_rational(c, pow2(bits));
}

// Closed interval [lo, hi] of rationals. Every operation encloses the exact
// result; rounding, when requested, only ever widens.
class RationalInterval {
 public:
  RationalInterval() = default;
  explicit RationalInterval(const Rational& point) : lo_(point), hi_(point) {}
  RationalInterval(const Rational& lo, const Rational& hi) : lo_(lo), hi_(hi) {
    if (lo_ > hi_) throw ValidationError("interval with lo > hi");
  }

  const Rational& lo() const { return lo_; }
  const Rational& hi() const { return hi_; }
  Rational width() const { return hi_ - lo_; }
  Rational midpoint() const { return (lo_ + hi_) / 2; }
  bool is_point() const { return lo_ == hi_; }
  bool contains(const Rational& x) const { return lo_ <= x && x <= hi_; }
  bool contains(const RationalInterval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }
  bool overlaps(const RationalInterval& o) const { return lo_ <= o.hi_ && o.lo_ <= hi_; }
  bool strictly_below(const RationalInterval& o) const { return hi_ < o.lo_; }

  RationalInterval intersect(const RationalInterval& o) const {
    if (!overlaps(o)) throw ValidationError("intervals do not overlap");
    return {lo_ > o.lo_ ? lo_ : o.lo_, hi_ < o.hi_ ? hi_ : o.hi_};
  }

  RationalInterval rounded_outward(unsigned long bits) const {
    return {round_down_dyadic(lo_, bits), round_up_dyadic(hi_, bits)};
  }

  // Denominator size in bits of the larger endpoint denominator.
  std::size_t denominator_bits() const {
    return std::max(bit_length(Integer(lo_.get_den())), bit_length(Integer(hi_.get_den())));
  }

  friend RationalInterval operator+(const RationalInterval& a, const RationalInterval& b) {
    return {a.lo_ + b.lo_, a.hi_ + b.hi_};
  }
  friend RationalInterval operator-(const RationalInterval& a, const RationalInterval& b) {
    return {a.lo_ - b.hi_, a.hi_ - b.lo_};
  }
  friend RationalInterval operator*(const RationalInterval& a, const RationalInterval& b) {
    Rational p1 = a.lo_ * b.lo_, p2 = a.lo_ * b.hi_, p3 = a.hi_ * b.lo_, p4 = a.hi_ * b.hi_;
    Rational lo = p1, hi = p1;
    for (const Rational* p : {&p2, &p3, &p4}) {
      if (*p < lo) lo = *p;
      if (*p > hi) hi = *p;
    }
    return {lo, hi};
  }
  friend RationalInterval operator*(const Rational& k, const RationalInterval& a) {
    return k >= 0 ? RationalInterval(k * a.lo_, k * a.hi_) : RationalInterval(k * a.hi_, k * a.lo_);
  }

  friend bool operator==(const RationalInterval& a, const RationalInterval& b) {
    return a.lo_ == b.lo_ && a.hi_ == b.hi_;
  }

  friend std::ostream& operator<<(std::ostream& os, const RationalInterval& iv) {
    return os << '[' << iv.lo_ << ", " << iv.hi_ << ']';
  }

 private:
  Rational lo_{0};
  Rational hi_{0};
};

// Running enclosure of a product of factors in (0, 1], each given as an exact
// rational. Stays exact until the denominator exceeds `bits`, then switches to
// dyadic endpoints rounded outward after every step.
class ProductEnclosure {
 public:
  explicit ProductEnclosure(unsigned long bits = 256) : bits_(bits) {}

  void multiply(const Rational& factor) {
    if (factor < 0) throw ValidationError("ProductEnclosure factor must be non-negative");
    if (exact_) {
      lo_ *= factor;
      if (bit_length(Integer(lo_.get_den())) > bits_) {
        exact_ = false;
        hi_ = round_up_dyadic(lo_, bits_);
        lo_ = round_down_dyadic(lo_, bits_);
      } else {
        hi_ = lo_;
      }
      return;
    }
    lo_ = round_down_dyadic(lo_ * factor, bits_);
    hi_ = round_up_dyadic(hi_ * factor, bits_);
  }

  // Multiply by (num - 1)/num style factors without building a Rational first.
  void multiply_ratio(const Integer& num, const Integer& den) { multiply(make_rational(num, den)); }

  bool exact() const { return exact_; }
  RationalInterval value() const { return {lo_, exact_ ? lo_ : hi_}; }

 private:
  unsigned long bits_;
  bool exact_ = true;
  Rational lo_{1};
  Rational hi_{1};
};

}  // namespace bfree
