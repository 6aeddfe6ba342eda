#pragma once

#include <gmpxx.h>

#include <cstdlib>
#include <string>
#include <utility>

#include "l0cert/errors.hpp"

namespace l0cert {

// Exact rational number. Canonical form is maintained as a class invariant:
// den > 0 and gcd(|num|, den) == 1. Every operation is exact; nothing in this
// type ever rounds, so certificate math built on it cannot drift.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(long v) : num_(v), den_(1) {}  // NOLINT: integers convert freely
  explicit Rational(mpz_class v) : num_(std::move(v)), den_(1) {}
  Rational(mpz_class num, mpz_class den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_ == 0) throw validation_error("Rational: zero denominator");
    normalize();
  }

  // Parses "num/den" or a bare integer.
  static Rational from_fraction_string(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(parse_mpz(s));
    return Rational(parse_mpz(s.substr(0, slash)), parse_mpz(s.substr(slash + 1)));
  }

  // Parses a plain decimal like "0.875" or "-12.03" exactly.
  static Rational from_decimal_string(const std::string& s) {
    if (s.empty()) throw validation_error("Rational: empty decimal");
    std::string digits = s;
    bool neg = false;
    if (digits[0] == '+' || digits[0] == '-') {
      neg = digits[0] == '-';
      digits.erase(0, 1);
    }
    auto dot = digits.find('.');
    std::size_t frac_len = 0;
    if (dot != std::string::npos) {
      frac_len = digits.size() - dot - 1;
      digits.erase(dot, 1);
    }
    if (digits.empty()) throw validation_error("Rational: malformed decimal '" + s + "'");
    for (char ch : digits)
      if (ch < '0' || ch > '9') throw validation_error("Rational: malformed decimal '" + s + "'");
    mpz_class num = parse_mpz(digits);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_len);
    if (neg) num = -num;
    return Rational(std::move(num), std::move(den));
  }

  // Exact value of a double (every finite double is a binary rational).
  static Rational from_double(double v) {
    mpq_class q(v);
    q.canonicalize();
    return Rational(q.get_num(), q.get_den());
  }

  const mpz_class& num() const { return num_; }
  const mpz_class& den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }
  int sign() const { return sgn(num_); }

  Rational operator-() const {
    Rational r = *this;
    r.num_ = -r.num_;
    return r;
  }

  Rational& operator+=(const Rational& o) {
    num_ = num_ * o.den_ + o.num_ * den_;
    den_ *= o.den_;
    normalize();
    return *this;
  }
  Rational& operator-=(const Rational& o) { return *this += -o; }
  Rational& operator*=(const Rational& o) {
    num_ *= o.num_;
    den_ *= o.den_;
    normalize();
    return *this;
  }
  Rational& operator/=(const Rational& o) {
    if (o.num_ == 0) throw validation_error("Rational: division by zero");
    num_ *= o.den_;
    den_ *= o.num_;
    normalize();
    return *this;
  }

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  // Three-way comparison by cross multiplication; denominators are positive.
  int cmp(const Rational& o) const {
    mpz_class lhs = num_ * o.den_;
    mpz_class rhs = o.num_ * den_;
    return ::cmp(lhs, rhs);
  }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) { return a.cmp(b) < 0; }
  friend bool operator<=(const Rational& a, const Rational& b) { return a.cmp(b) <= 0; }
  friend bool operator>(const Rational& a, const Rational& b) { return a.cmp(b) > 0; }
  friend bool operator>=(const Rational& a, const Rational& b) { return a.cmp(b) >= 0; }

  // Integer exponent; negative exponents invert. gcd-free base stays gcd-free,
  // so no renormalization is needed.
  Rational pow(long e) const {
    if (e == 0) return Rational(1);
    bool invert = e < 0;
    unsigned long ue = invert ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
    Rational r;
    mpz_pow_ui(r.num_.get_mpz_t(), num_.get_mpz_t(), ue);
    mpz_pow_ui(r.den_.get_mpz_t(), den_.get_mpz_t(), ue);
    if (invert) {
      if (r.num_ == 0) throw validation_error("Rational: zero to negative power");
      std::swap(r.num_, r.den_);
      if (r.den_ < 0) {
        r.num_ = -r.num_;
        r.den_ = -r.den_;
      }
    }
    return r;
  }

  std::string to_string() const {
    if (den_ == 1) return num_.get_str();
    return num_.get_str() + "/" + den_.get_str();
  }

  // Nearest double, for display and reporting only.
  double to_double() const {
    mpq_class q(num_, den_);
    return q.get_d();
  }

 private:
  static mpz_class parse_mpz(const std::string& s) {
    mpz_class v;
    if (s.empty() || mpz_set_str(v.get_mpz_t(), s.c_str(), 10) != 0)
      throw validation_error("Rational: malformed integer '" + s + "'");
    return v;
  }

  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    if (num_ == 0) {
      den_ = 1;
      return;
    }
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), num_.get_mpz_t(), den_.get_mpz_t());
    if (g != 1) {
      mpz_divexact(num_.get_mpz_t(), num_.get_mpz_t(), g.get_mpz_t());
      mpz_divexact(den_.get_mpz_t(), den_.get_mpz_t(), g.get_mpz_t());
    }
  }

  mpz_class num_;
  mpz_class den_;
};

}  // namespace l0cert
