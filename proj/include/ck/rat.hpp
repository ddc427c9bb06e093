#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <optional>
#include <string>

#include "ck/error.hpp"

namespace ck {

/// Exact rational scalar. Backed by an arbitrary-precision rational that is
/// kept reduced (gcd of numerator and denominator is 1) with positive
/// denominator.
using Rat = boost::multiprecision::cpp_rational;
using Int = boost::multiprecision::cpp_int;

inline Rat rat(long long n, long long d = 1) { return Rat(n, d); }

/// Parse "p", "-p" or "p/q" (q > 0 after normalization).
inline Rat rat_parse(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rat(Int(s));
    Int num(s.substr(0, slash));
    Int den(s.substr(slash + 1));
    require(den != 0, "rational with zero denominator: " + s);
    if (den < 0) {
      num = -num;
      den = -den;
    }
    return Rat(num, den);
  } catch (const std::runtime_error&) {
    throw error("malformed rational literal: " + s);
  }
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
inline std::optional<Rat> rat_sqrt(const Rat& r) {
  if (r < 0) return std::nullopt;
  Int num = numerator(r), den = denominator(r);
  Int sn = boost::multiprecision::sqrt(num);
  Int sd = boost::multiprecision::sqrt(den);
  if (sn * sn != num || sd * sd != den) return std::nullopt;
  return Rat(sn, sd);
}

/// Render as "p" or "p/q" with q > 0.
inline std::string rat_str(const Rat& r) {
  std::string s = numerator(r).str();
  if (denominator(r) != 1) s += "/" + denominator(r).str();
  return s;
}

}  // namespace ck
