#ifndef QHARM_SCALAR_HPP
#define QHARM_SCALAR_HPP

#include <cmath>
#include <optional>
#include <string>

#include <gmpxx.h>

namespace qharm {

using Rational = mpq_class;

enum class Field { Rational, Float };

const char* to_string(Field f);

// Parses "p/q", "p" or "-p/q". Decimal notation is refused on purpose.
Rational parse_rational(const std::string& text);
std::string rational_str(const Rational& q);

// num/den in lowest terms (the two-argument mpq_class constructor does not reduce)
inline Rational ratio(long num, long den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

std::optional<Rational> rational_sqrt(const Rational& q);

// Best rational approximation with bounded denominator (continued fractions).
Rational rationalize(double v, long max_den);

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr Field field = Field::Rational;
  static constexpr bool exact = true;
  static Rational zero() { return Rational(0); }
  static Rational one() { return Rational(1); }
  static Rational from(const Rational& q) { return q; }
  static double to_double(const Rational& q) { return q.get_d(); }
  static bool is_zero(const Rational& q) { return sgn(q) == 0; }
  static Rational abs(const Rational& q) { return qharm_abs(q); }
  static std::optional<Rational> sqrt(const Rational& q) { return rational_sqrt(q); }

 private:
  static Rational qharm_abs(const Rational& q) {
    Rational r = q;
    if (sgn(r) < 0) r = -r;
    return r;
  }
};

template <>
struct ScalarTraits<double> {
  static constexpr Field field = Field::Float;
  static constexpr bool exact = false;
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static double from(const Rational& q) { return q.get_d(); }
  static double to_double(double v) { return v; }
  static bool is_zero(double v) { return v == 0.0; }
  static double abs(double v) { return std::fabs(v); }
  static std::optional<double> sqrt(double v) {
    if (!(v > 0.0)) return std::nullopt;
    return std::sqrt(v);
  }
};

}  // namespace qharm

#endif
