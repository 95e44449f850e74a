#ifndef OMNIRL_EXPR_H_
#define OMNIRL_EXPR_H_

#include <optional>
#include <string_view>

#include "omnirl/rational.h"

namespace omnirl {

// Evaluates an arithmetic expression over exact rationals.
//
// Grammar (whitespace ignored):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | primary
//   primary := number | '(' expr ')'
//   number  := digits ['.' digits] | '.' digits
//
// Returns nullopt on syntax errors, division by zero, overflow, or nesting
// deeper than 64 levels. "1/2", "0.5" and "2/4" all evaluate to 1/2.
std::optional<Rational> evaluate_expression(std::string_view text);

}  // namespace omnirl

#endif  // OMNIRL_EXPR_H_
