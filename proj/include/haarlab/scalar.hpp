#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <string>

namespace haarlab {

using Rational = boost::multiprecision::mpq_rational;

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static double from_ratio(std::int64_t num, std::int64_t den) {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  static double to_double(double x) { return x; }
  static double abs(double x) { return std::fabs(x); }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static Rational from_ratio(std::int64_t num, std::int64_t den) { return Rational(num, den); }
  static double to_double(const Rational& x) { return x.convert_to<double>(); }
  static Rational abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }
};

template <class S>
double to_double(const S& x) {
  return ScalarTraits<S>::to_double(x);
}

template <class S>
S sabs(const S& x) {
  return ScalarTraits<S>::abs(x);
}

// "num/den" or a plain integer/decimal literal.
Rational parse_rational(const std::string& text);

}  // namespace haarlab
