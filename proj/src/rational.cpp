#include "gibbs/rational.hpp"

#include <cmath>

#include "gibbs/error.hpp"

namespace gibbs {

std::string to_string(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      return Rational(BigInt(s));
    }
    BigInt num(s.substr(0, slash));
    BigInt den(s.substr(slash + 1));
    if (den == 0) throw SpecError("zero denominator in rational '" + s + "'");
    Rational q(num, den);
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw SpecError("not a rational number: '" + s + "'");
  }
}

long double log2_abs(const BigInt& x) {
  // Keep the leading 64 bits so the logarithm carries full long double
  // precision for values far outside the double range.
  std::size_t bits = mpz_sizeinbase(x.get_mpz_t(), 2);
  BigInt top = abs(x);
  long shift = 0;
  if (bits > 64) {
    shift = static_cast<long>(bits - 64);
    top >>= static_cast<unsigned long>(shift);
  }
  auto lead = static_cast<long double>(mpz_get_ui(top.get_mpz_t()));
  return std::log2(lead) + static_cast<long double>(shift);
}

long double log2_abs(const Rational& x) {
  return log2_abs(x.get_num()) - log2_abs(x.get_den());
}

long double to_long_double(const Rational& x) {
  if (x == 0) return 0.0L;
  long double v = std::exp2(log2_abs(x));
  return sgn(x) < 0 ? -v : v;
}

Rational ratio(const BigInt& a, const BigInt& b) {
  Rational q(a, b);
  q.canonicalize();
  return q;
}

Rational pow(const Rational& c, unsigned long k) {
  BigInt num, den;
  mpz_pow_ui(num.get_mpz_t(), c.get_num().get_mpz_t(), k);
  mpz_pow_ui(den.get_mpz_t(), c.get_den().get_mpz_t(), k);
  return Rational(num, den);
}

}  // namespace gibbs
