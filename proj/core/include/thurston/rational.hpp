#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>

namespace thurston {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Int num(const Rational& r) { return numerator(r); }
inline Int den(const Rational& r) { return denominator(r); }

// "p/q" with the slash omitted for integers ("3" not "3/1").
std::string rational_to_string(const Rational& r);

// Accepts "p", "p/q", and decimal literals like "-0.25".
std::optional<Rational> rational_from_string(const std::string& s);

double to_double(const Rational& r);

// The rational with smallest denominator (then smallest |numerator|) in
// [lo, hi], via the Stern-Brocot walk. Requires lo <= hi.
Rational simplest_rational_in(const Rational& lo, const Rational& hi);

}  // namespace thurston
