#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace gibbs {

using Rational = mpq_class;
using BigInt = mpz_class;

/// Canonical "p/q" text with q >= 1 and gcd(p, q) = 1. Integers keep the "/1".
std::string to_string(const Rational& q);

/// Accepts "p", "p/q" and "-p/q"; the result is canonicalized.
Rational parse_rational(std::string_view text);

/// log2|x| for x != 0, accurate to long double precision even when x is far
/// outside the range of double.
long double log2_abs(const BigInt& x);
long double log2_abs(const Rational& x);

/// x converted through its binary logarithm; exact zero maps to 0.
long double to_long_double(const Rational& x);

/// a / b in canonical form (mpq_class(a, b) leaves common factors in place).
Rational ratio(const BigInt& a, const BigInt& b);

/// c^k for rational c and k >= 0.
Rational pow(const Rational& c, unsigned long k);

}  // namespace gibbs
