#pragma once

// Exact arithmetic in Q(sqrt 5): x = p + q sqrt5 with rational p, q.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>

#include "bfree/errors.hpp"
#include "bfree/rational.hpp"

namespace bfree {

namespace detail {

// z = m * 2^e with |m| in [0.5, 1), using the top 64 bits of z.
inline long double ld_frexp(const Integer& z, long& e) {
  if (z == 0) {
    e = 0;
    return 0.0L;
  }
  std::size_t bits = bit_length(z);
  Integer a = abs(z);
  std::uint64_t top = 0;
  if (bits <= 64) {
    top = to_u64(a);
    e = static_cast<long>(bits);
    long double m = std::ldexp(static_cast<long double>(top), -static_cast<int>(bits));
    return z < 0 ? -m : m;
  }
  Integer t;
  mpz_tdiv_q_2exp(t.get_mpz_t(), a.get_mpz_t(), bits - 64);
  top = to_u64(t);
  e = static_cast<long>(bits);
  long double m = std::ldexp(static_cast<long double>(top), -64);
  return z < 0 ? -m : m;
}

inline long double ld_of(const Rational& q) {
  long en = 0, ed = 0;
  long double mn = ld_frexp(Integer(q.get_num()), en);
  long double md = ld_frexp(Integer(q.get_den()), ed);
  if (mn == 0.0L) return 0.0L;
  return std::ldexp(mn / md, static_cast<int>(en - ed));
}

inline const long double kSqrt5 = 2.236067977499789696409173668731276235L;

}  // namespace detail

class QSqrt5 {
 public:
  QSqrt5() = default;
  QSqrt5(Rational p, Rational q = Rational(0)) : p_(std::move(p)), q_(std::move(q)) {}  // NOLINT
  explicit QSqrt5(long v) : p_(v), q_(0) {}

  static QSqrt5 sqrt5() { return {Rational(0), Rational(1)}; }
  // (sqrt5 - 1) / 2, satisfies alpha^2 = 1 - alpha
  static QSqrt5 alpha() { return {Rational(-1, 2), Rational(1, 2)}; }
  static QSqrt5 phi() { return {Rational(1, 2), Rational(1, 2)}; }

  const Rational& p() const { return p_; }
  const Rational& q() const { return q_; }
  bool is_rational() const { return q_ == 0; }

  QSqrt5 conjugate() const { return {p_, -q_}; }
  // p^2 - 5 q^2
  Rational norm() const { return p_ * p_ - 5 * q_ * q_; }

  int sign() const {
    int sp = sgn(p_), sq = sgn(q_);
    if (sq == 0) return sp;
    if (sp == 0) return sq;
    if (sp == sq) return sp;
    // opposite signs: compare p^2 with 5 q^2
    int c = cmp(p_ * p_, 5 * q_ * q_);
    if (c == 0) return 0;  // cannot happen for q != 0, sqrt5 irrational
    return c > 0 ? sp : sq;
  }

  QSqrt5 operator-() const { return {-p_, -q_}; }
  QSqrt5& operator+=(const QSqrt5& o) {
    p_ += o.p_;
    q_ += o.q_;
    return *this;
  }
  QSqrt5& operator-=(const QSqrt5& o) {
    p_ -= o.p_;
    q_ -= o.q_;
    return *this;
  }
  QSqrt5& operator*=(const QSqrt5& o) {
    Rational np = p_ * o.p_ + 5 * q_ * o.q_;
    Rational nq = p_ * o.q_ + q_ * o.p_;
    p_ = std::move(np);
    q_ = std::move(nq);
    return *this;
  }
  QSqrt5& operator/=(const QSqrt5& o) {
    Rational n = o.norm();
    if (n == 0) throw ValidationError("division by zero in Q(sqrt5)");
    *this *= o.conjugate();
    p_ /= n;
    q_ /= n;
    return *this;
  }
  friend QSqrt5 operator+(QSqrt5 a, const QSqrt5& b) { return a += b; }
  friend QSqrt5 operator-(QSqrt5 a, const QSqrt5& b) { return a -= b; }
  friend QSqrt5 operator*(QSqrt5 a, const QSqrt5& b) { return a *= b; }
  friend QSqrt5 operator/(QSqrt5 a, const QSqrt5& b) { return a /= b; }

  friend bool operator==(const QSqrt5& a, const QSqrt5& b) { return a.p_ == b.p_ && a.q_ == b.q_; }
  friend bool operator!=(const QSqrt5& a, const QSqrt5& b) { return !(a == b); }
  friend bool operator<(const QSqrt5& a, const QSqrt5& b) { return (a - b).sign() < 0; }
  friend bool operator>(const QSqrt5& a, const QSqrt5& b) { return b < a; }
  friend bool operator<=(const QSqrt5& a, const QSqrt5& b) { return !(b < a); }
  friend bool operator>=(const QSqrt5& a, const QSqrt5& b) { return !(a < b); }

  QSqrt5 pow(unsigned long e) const {
    QSqrt5 r(Rational(1)), b = *this;
    while (e) {
      if (e & 1U) r *= b;
      b *= b;
      e >>= 1;
    }
    return r;
  }

  // Accurate long double value. When p and q sqrt5 nearly cancel, evaluate
  // (p^2 - 5q^2) / (p - q sqrt5) instead.
  long double approx() const {
    int sp = sgn(p_), sq = sgn(q_);
    if (sp == 0 || sq == 0 || sp == sq) return detail::ld_of(p_) + detail::ld_of(q_) * detail::kSqrt5;
    long double den = detail::ld_of(p_) - detail::ld_of(q_) * detail::kSqrt5;
    return detail::ld_of(norm()) / den;
  }

  Integer floor() const {
    long double a = approx();
    Integer k = floor_of(from_long_double(std::floor(a)));
    QSqrt5 x = *this;
    while (x < QSqrt5(Rational(k))) k -= 1;
    while (x >= QSqrt5(Rational(k + 1))) k += 1;
    return k;
  }

  // x mod 1 in [0, 1)
  QSqrt5 frac() const { return *this - QSqrt5(Rational(floor())); }

  // Rational enclosure using sqrt5 in [s, s + 2^-bits].
  RationalInterval enclose(unsigned long bits = 128) const {
    Integer scaled = 5 * pow2(2 * bits);
    Integer root;
    mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
    Rational lo5 = make_rational(root, pow2(bits));
    Rational hi5 = make_rational(root + 1, pow2(bits));
    Rational a = p_ + q_ * lo5, b = p_ + q_ * hi5;
    return a <= b ? RationalInterval(a, b) : RationalInterval(b, a);
  }

  std::string to_string() const { return p_.get_str() + (q_ >= 0 ? "+" : "-") + Rational(abs(q_)).get_str() + "*sqrt5"; }

  friend std::ostream& operator<<(std::ostream& os, const QSqrt5& x) { return os << x.to_string(); }

 private:
  Rational p_{0};
  Rational q_{0};
};

}  // namespace bfree
