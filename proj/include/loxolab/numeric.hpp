#pragma once

#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace loxolab {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

double to_double(const BigInt& value);
double to_double(const Rational& value);

/// Renders a rational as "p/q" (or "p" when the denominator is 1).
std::string to_string(const Rational& value);

/// Shortest round-trippable rendering of a double (17 significant digits).
std::string format_double(double value);

/// Half-integer value stored as twice its value, so Gromov products stay exact.
struct HalfInt {
  std::int64_t twice = 0;

  static constexpr HalfInt from_int(std::int64_t v) { return HalfInt{2 * v}; }
  double value() const { return static_cast<double>(twice) / 2.0; }
  bool is_integer() const { return twice % 2 == 0; }

  friend constexpr auto operator<=>(const HalfInt&, const HalfInt&) = default;
  friend constexpr HalfInt operator+(HalfInt a, HalfInt b) { return {a.twice + b.twice}; }
  friend constexpr HalfInt operator-(HalfInt a, HalfInt b) { return {a.twice - b.twice}; }
};

std::string to_string(HalfInt value);

}  // namespace loxolab
