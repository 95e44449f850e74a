#ifndef OMNIRL_RATIONAL_H_
#define OMNIRL_RATIONAL_H_

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace omnirl {

// Thrown when an exact result does not fit in 64-bit numerator/denominator.
class RationalOverflow : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

class DivisionByZero : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Exact rational with 64-bit parts, always in lowest terms with den > 0.
class Rational {
 public:
  Rational() = default;
  Rational(int64_t n) : num_(n) {}  // NOLINT: implicit integer promotion is intended
  Rational(int64_t n, int64_t d);

  int64_t num() const { return num_; }
  int64_t den() const { return den_; }
  bool is_integer() const { return den_ == 1; }

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational operator-() const;

  friend bool operator==(const Rational&, const Rational&) = default;

  // "p" for integers, "p/q" otherwise.
  std::string to_string() const;

 private:
  int64_t num_ = 0;
  int64_t den_ = 1;
};

}  // namespace omnirl

#endif  // OMNIRL_RATIONAL_H_
