#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "errors.hpp"

namespace rtreelab {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline std::string rational_str(const Rational& q) {
  // Canonical reduced form: bare integer, or "num/den" with den > 1.
  if (denominator(q) == 1) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

inline Rational parse_rational(const std::string& s) {
  auto bad = [&] { throw InputError("bad rational: '" + s + "'"); };
  if (s.empty()) bad();
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(Int(s));
    Int num(s.substr(0, slash));
    Int den(s.substr(slash + 1));
    if (den == 0) bad();
    return Rational(num, den);
  } catch (const std::exception&) {
    bad();
  }
  return Rational();  // unreachable
}

// floor(sqrt(n)) for n >= 0 by Newton iteration on big integers.
inline Int isqrt(const Int& n) {
  if (n < 0) throw InputError("isqrt of negative");
  if (n < 2) return n;
  Int x = Int(1) << (msb(n) / 2 + 1);
  for (;;) {
    Int y = (x + n / x) / 2;
    if (y >= x) return x;
    x = y;
  }
}

}  // namespace rtreelab
