#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace densideal {

using Integer = mpz_class;
using Rational = mpq_class;

Integer factorial(unsigned long n);
Integer pow_int(const Integer& base, unsigned long exp);
inline Integer pow2(unsigned long exp) { return pow_int(2, exp); }

// Floor and ceiling division for a positive divisor.
Integer floor_div(const Integer& a, const Integer& b);
Integer ceil_div(const Integer& a, const Integer& b);
Integer floor_of(const Rational& q);
Integer ceil_of(const Rational& q);
Integer lcm(const Integer& a, const Integer& b);

// Builds num/den in canonical form; den must be nonzero.
Rational make_rational(const Integer& num, const Integer& den);

Integer parse_integer(std::string_view text);
// Accepts "p/q", "p" or a decimal integer; q must be nonzero.
Rational parse_rational(std::string_view text);

std::string to_string(const Integer& n);
std::string to_string(const Rational& q);
// Fixed-point rendering truncated toward zero with `digits` fractional digits.
std::string to_decimal(const Rational& q, int digits = 20);

// Narrowing with a range check; throws validation_error on overflow.
std::uint64_t to_u64(const Integer& n);
long to_long(const Integer& n);

// Evaluates a small integer expression language: + - * ^ ! and parentheses,
// e.g. "3*8!+1" or "2^20".
Integer eval_integer_expr(std::string_view text);

}  // namespace densideal
