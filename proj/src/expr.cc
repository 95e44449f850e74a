#include "omnirl/expr.h"

#include <cctype>
#include <stdexcept>

namespace omnirl {
namespace {

constexpr int kMaxDepth = 64;
constexpr size_t kMaxLength = 4096;

struct SyntaxError {};

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  Rational parse() {
    Rational v = expr(0);
    skip_ws();
    if (pos_ != s_.size()) throw SyntaxError{};
    return v;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Rational expr(int depth) {
    Rational v = term(depth);
    for (;;) {
      if (accept('+')) {
        v = v + term(depth);
      } else if (accept('-')) {
        v = v - term(depth);
      } else {
        return v;
      }
    }
  }

  Rational term(int depth) {
    Rational v = unary(depth);
    for (;;) {
      if (accept('*')) {
        v = v * unary(depth);
      } else if (accept('/')) {
        v = v / unary(depth);
      } else {
        return v;
      }
    }
  }

  Rational unary(int depth) {
    if (depth > kMaxDepth) throw SyntaxError{};
    if (accept('-')) return -unary(depth + 1);
    if (accept('+')) return unary(depth + 1);
    return primary(depth);
  }

  Rational primary(int depth) {
    if (accept('(')) {
      if (depth + 1 > kMaxDepth) throw SyntaxError{};
      Rational v = expr(depth + 1);
      if (!accept(')')) throw SyntaxError{};
      return v;
    }
    return number();
  }

  Rational number() {
    skip_ws();
    const size_t start = pos_;
    Rational whole(0);
    bool any_digit = false;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      whole = whole * Rational(10) + Rational(s_[pos_] - '0');
      ++pos_;
      any_digit = true;
    }
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      Rational scale(1);
      bool frac_digit = false;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        scale = scale / Rational(10);
        whole = whole + scale * Rational(s_[pos_] - '0');
        ++pos_;
        frac_digit = true;
      }
      if (!frac_digit) throw SyntaxError{};
      any_digit = true;
    }
    if (!any_digit || pos_ == start) throw SyntaxError{};
    return whole;
  }

  std::string_view s_;
  size_t pos_ = 0;
};

}  // namespace

std::optional<Rational> evaluate_expression(std::string_view text) {
  if (text.size() > kMaxLength) return std::nullopt;
  try {
    return Parser(text).parse();
  } catch (const SyntaxError&) {
    return std::nullopt;
  } catch (const std::overflow_error&) {
    return std::nullopt;
  } catch (const std::domain_error&) {
    return std::nullopt;
  }
}

}  // namespace omnirl
