#pragma once

// Thin RAII wrapper over an MPFR value. Only what the library needs:
// logs of huge integers, powers with directed rounding, conversions.

#include <mpfr.h>

#include <string>
#include <utility>

#include "bfree/rational.hpp"

namespace bfree {

class BigFloat {
 public:
  explicit BigFloat(mpfr_prec_t bits = 128) { mpfr_init2(v_, bits); mpfr_set_zero(v_, 1); }
  BigFloat(const BigFloat& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
  BigFloat(BigFloat&& o) noexcept {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
  }
  BigFloat& operator=(BigFloat o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~BigFloat() { mpfr_clear(v_); }

  static BigFloat from_integer(const Integer& z, mpfr_prec_t bits, mpfr_rnd_t rnd = MPFR_RNDN) {
    BigFloat f(bits);
    mpfr_set_z(f.v_, z.get_mpz_t(), rnd);
    return f;
  }
  static BigFloat from_rational(const Rational& q, mpfr_prec_t bits, mpfr_rnd_t rnd = MPFR_RNDN) {
    BigFloat f(bits);
    mpfr_set_q(f.v_, q.get_mpq_t(), rnd);
    return f;
  }

  // Natural log of a positive integer.
  static BigFloat log_of(const Integer& z, mpfr_prec_t bits = 128) {
    if (z <= 0) throw ValidationError("log of non-positive integer");
    BigFloat f = from_integer(z, bits + 16);
    BigFloat r(bits);
    mpfr_log(r.v_, f.v_, MPFR_RNDN);
    return r;
  }

  // base^expo with base, expo given exactly; result rounded in direction rnd.
  // Base must be positive.
  static BigFloat pow(const BigFloat& base, const Rational& expo, mpfr_prec_t bits, mpfr_rnd_t rnd) {
    BigFloat e = from_rational(expo, bits + 32);
    BigFloat r(bits);
    mpfr_pow(r.v_, base.v_, e.v_, rnd);
    return r;
  }

  mpfr_prec_t precision() const { return mpfr_get_prec(v_); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  long double to_long_double() const { return mpfr_get_ld(v_, MPFR_RNDN); }

  // Exact rational value of the stored binary float.
  Rational to_rational() const {
    if (mpfr_zero_p(v_)) return Rational(0);
    if (!mpfr_number_p(v_)) throw ValidationError("non-finite MPFR value");
    Integer m;
    mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), v_);
    Rational q(m);
    if (e >= 0) {
      q *= Rational(pow2(static_cast<unsigned long>(e)));
    } else {
      q /= Rational(pow2(static_cast<unsigned long>(-e)));
    }
    q.canonicalize();
    return q;
  }

  std::string to_string(int digits = 20) const {
    char* s = nullptr;
    std::string fmt = "%." + std::to_string(digits) + "Rg";
    mpfr_asprintf(&s, fmt.c_str(), v_);
    std::string out(s);
    mpfr_free_str(s);
    return out;
  }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

 private:
  mpfr_t v_;
};

}  // namespace bfree
