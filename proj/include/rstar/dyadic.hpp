#pragma once

#include <cstdint>
#include <string>

#include <gmpxx.h>

namespace rstar {

using Index = std::int64_t;
using BigInt = mpz_class;
using Rational = mpq_class;

// mantissa * 2^exponent, canonical: mantissa odd, or zero with exponent 0.
class Dyadic {
public:
  Dyadic() = default;
  Dyadic(long v);  // NOLINT: implicit from small integers
  Dyadic(BigInt mantissa, std::int64_t exponent);

  static Dyadic pow2(std::int64_t e) { return Dyadic(1, e); }

  const BigInt& mantissa() const { return m_; }
  std::int64_t exponent() const { return e_; }
  bool is_zero() const { return sgn(m_) == 0; }
  int sign() const { return sgn(m_); }

  Rational to_rational() const;
  double to_double() const;
  std::string str() const;

  friend Dyadic operator+(const Dyadic& a, const Dyadic& b);
  friend Dyadic operator-(const Dyadic& a, const Dyadic& b);
  friend Dyadic operator*(const Dyadic& a, const Dyadic& b);
  Dyadic& operator+=(const Dyadic& b) { return *this = *this + b; }

  friend bool operator==(const Dyadic& a, const Dyadic& b) { return a.e_ == b.e_ && a.m_ == b.m_; }
  friend bool operator<(const Dyadic& a, const Dyadic& b);
  friend bool operator>(const Dyadic& a, const Dyadic& b) { return b < a; }
  friend bool operator<=(const Dyadic& a, const Dyadic& b) { return !(b < a); }

private:
  void canonicalize();
  BigInt m_ = 0;
  std::int64_t e_ = 0;
};

inline const Dyadic& max(const Dyadic& a, const Dyadic& b) { return a < b ? b : a; }

// Exact conversion of a rational with power-of-two denominator; throws otherwise.
Dyadic to_dyadic(const Rational& q);

// Canonical num/den (mpq_class(num, den) is not canonicalized on construction).
inline Rational ratio(const BigInt& num, const BigInt& den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}
inline Rational ratio(long num, long den) { return ratio(BigInt(num), BigInt(den)); }

inline Rational pow2q(int e) {
  Rational q = 1;
  if (e >= 0)
    mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
  else
    mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
  return q;
}

Rational parse_rational(const std::string& s);
std::string to_string(const Rational& q);

}  // namespace rstar
