#pragma once

// Text surface syntax for scalars and exterior forms over a chart.
//
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := unary ('^' unary)*
//   unary   := ('-'|'+')* primary
//   primary := number | '(' expr ')' | func '(' expr ')'
//            | 'D' '(' ident (',' ident)* ')' | ident
//
// '^' is exponentiation when both operands are 0-forms (the exponent must be
// a rational constant) and the wedge product otherwise.  An identifier 'd'
// followed by a coordinate name denotes that coordinate's differential and is
// rejected in scalar-only context.  Decimal literals are exact rationals.

#include "varigeo/excalc.hpp"

#include <cstddef>
#include <string>

namespace varigeo::parser {

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"),
          position(pos) {}
    std::size_t position;
};

// Scalar expression; differentials are a parse error here.
symexpr::Expr parse_expr(const std::string& text, const excalc::Chart& chart);

// Homogeneous exterior form (degree 0 allowed).
excalc::DiffForm parse_form(const std::string& text, const excalc::Chart& chart);

}  // namespace varigeo::parser
