#pragma once

#include <string_view>

#include "multexode/expr.hpp"

namespace multexode::expr {

/// Parse coefficient-expression text. Grammar (see README):
///
///   expr    := term { ('+' | '-') term }
///   term    := unary { ('*' | '/') unary }
///   unary   := ('-' | '+') unary | power
///   power   := primary [ '^' unary ]          exponent must fold to an integer
///   primary := number | 'x' | 'i' | 'pi' | coeff | call | '(' expr ')'
///   call    := func '(' expr ')' | 'trig' '(' integer ';' expr { ',' expr } ')'
///
/// Throws SyntaxError with the byte offset of the offending token.
[[nodiscard]] Expr parse(std::string_view text);

}  // namespace multexode::expr
