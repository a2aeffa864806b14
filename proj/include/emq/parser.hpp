#pragma once

#include "emq/symexpr.hpp"

namespace emq {

struct ParseError : EmqError {
    using EmqError::EmqError;
};

// Grammar (precedence climbing, tightest last):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' ['-'] integer)?
//   primary := number | rational | identifier | sqrt2 | exp '(' sum ')' | '(' sum ')'
// Numbers may be integers or finite decimals, both read exactly.  '/' requires an
// invertible constant divisor.  '^' on a dynamical symbol must be nonnegative.
// exp() takes a linear form in symbols with numeric coefficients, no constant part.
SymExpr parse_expr(std::shared_ptr<const PhaseSpace> sp, const std::string& text);

} // namespace emq
