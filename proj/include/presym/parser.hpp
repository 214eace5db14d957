#pragma once

#include <string>

#include "presym/expr.hpp"
#include "presym/vartable.hpp"

namespace presym {

/// Parses an expression over the table's coordinates, parameters, and opaque
/// functions.  Grammar:
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := base ('^' integer)?
///   base   := rational | ident | ident '(' expr ')' | '(' expr ')' | '-' factor
/// `exp` is the built-in exponential; opaque function names may carry primes
/// (U', U'') denoting formal derivatives, so printed expressions re-parse.
Expr parse_expression(const std::string& text, const VarTable& vars);

} // namespace presym
