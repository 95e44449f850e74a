#include "omnirl/rational.h"

#include <numeric>

namespace omnirl {
namespace {

int64_t narrow(__int128 x) {
  if (x > INT64_MAX || x < -static_cast<__int128>(INT64_MAX)) throw RationalOverflow("rational overflow");
  return static_cast<int64_t>(x);
}

Rational make(__int128 n, __int128 d) {
  if (d == 0) throw DivisionByZero("division by zero");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  __int128 a = n < 0 ? -n : n;
  __int128 b = d;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    n /= a;
    d /= a;
  }
  return Rational(narrow(n), narrow(d));
}

}  // namespace

Rational::Rational(int64_t n, int64_t d) {
  if (d == 0) throw DivisionByZero("division by zero");
  if (n == INT64_MIN || d == INT64_MIN) throw RationalOverflow("rational overflow");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const int64_t g = std::gcd(n, d);
  num_ = n / g;
  den_ = d / g;
}

Rational operator+(const Rational& a, const Rational& b) {
  return make(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
              static_cast<__int128>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
  return make(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw DivisionByZero("division by zero");
  return make(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
}

Rational Rational::operator-() const {
  Rational r;
  r.num_ = -num_;
  r.den_ = den_;
  return r;
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

}  // namespace omnirl
