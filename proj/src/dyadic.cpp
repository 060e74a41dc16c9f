#include "rstar/dyadic.hpp"

#include <cmath>

#include "rstar/error.hpp"

namespace rstar {

Dyadic::Dyadic(long v) : m_(v), e_(0) { canonicalize(); }

Dyadic::Dyadic(BigInt mantissa, std::int64_t exponent) : m_(std::move(mantissa)), e_(exponent) {
  canonicalize();
}

void Dyadic::canonicalize() {
  if (sgn(m_) == 0) {
    e_ = 0;
    return;
  }
  mp_bitcnt_t tz = mpz_scan1(m_.get_mpz_t(), 0);
  if (tz > 0) {
    mpz_fdiv_q_2exp(m_.get_mpz_t(), m_.get_mpz_t(), tz);
    e_ += static_cast<std::int64_t>(tz);
  }
}

static BigInt shifted(const BigInt& m, std::int64_t by) {
  BigInt r;
  mpz_mul_2exp(r.get_mpz_t(), m.get_mpz_t(), static_cast<mp_bitcnt_t>(by));
  return r;
}

Dyadic operator+(const Dyadic& a, const Dyadic& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.e_ <= b.e_) return Dyadic(a.m_ + shifted(b.m_, b.e_ - a.e_), a.e_);
  return Dyadic(shifted(a.m_, a.e_ - b.e_) + b.m_, b.e_);
}

Dyadic operator-(const Dyadic& a, const Dyadic& b) {
  return a + Dyadic(-b.m_, b.e_);
}

Dyadic operator*(const Dyadic& a, const Dyadic& b) { return Dyadic(a.m_ * b.m_, a.e_ + b.e_); }

bool operator<(const Dyadic& a, const Dyadic& b) { return (b - a).sign() > 0; }

Rational Dyadic::to_rational() const {
  Rational q(m_);
  if (e_ >= 0)
    mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(e_));
  else
    mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-e_));
  return q;
}

double Dyadic::to_double() const { return std::ldexp(m_.get_d(), static_cast<int>(e_)); }

std::string Dyadic::str() const { return m_.get_str() + " " + std::to_string(e_); }

Dyadic to_dyadic(const Rational& q) {
  const BigInt& den = q.get_den();
  if (mpz_popcount(den.get_mpz_t()) != 1) fail("value " + q.get_str() + " is not dyadic");
  auto e = static_cast<std::int64_t>(mpz_scan1(den.get_mpz_t(), 0));
  return Dyadic(q.get_num(), -e);
}

Rational parse_rational(const std::string& s) {
  Rational q;
  auto slash = s.find('/');
  auto dot = s.find('.');
  try {
    if (dot != std::string::npos && slash == std::string::npos) {
      // decimal literal, exact
      std::string digits = s.substr(0, dot) + s.substr(dot + 1);
      BigInt num(digits);
      BigInt den;
      mpz_ui_pow_ui(den.get_mpz_t(), 10, s.size() - dot - 1);
      q = Rational(num, den);
    } else {
      q = Rational(s);
    }
  } catch (const std::invalid_argument&) {
    fail("cannot parse rational '" + s + "'");
  }
  if (sgn(q.get_den()) == 0) fail("zero denominator in '" + s + "'");
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

}  // namespace rstar
