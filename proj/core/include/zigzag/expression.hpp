#pragma once

#include <functional>
#include <string>

namespace zigzag {

/// Compiles a scalar math expression in one free variable `x` into a
/// callable. Supported: + - * / ^ (right-assoc), parentheses, numeric
/// literals, constants pi and e, and the functions
/// abs, exp, expm1, log, log1p, sqrt, sin, cos, tan, atan, sinh, cosh,
/// tanh, pow(a,b), min(a,b), max(a,b).
///
/// Throws std::invalid_argument on syntax errors (message includes the
/// offending position).
std::function<double(double)> compile_expression(const std::string& text);

}  // namespace zigzag
