#pragma once

#include <gmpxx.h>

#include <concepts>
#include <stdexcept>
#include <string>

namespace laplace {

// Exact arithmetic for the combinatorial paths.
using Rational = mpq_class;

template <class S>
concept Scalar = std::same_as<S, double> || std::same_as<S, Rational>;

template <Scalar S>
inline constexpr bool is_exact_v = std::same_as<S, Rational>;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& q) { return q.get_d(); }

template <Scalar S>
S from_ratio(long num, long den = 1) {
  if constexpr (is_exact_v<S>) {
    Rational q(num, den);
    q.canonicalize();
    return q;
  } else {
    return static_cast<double>(num) / static_cast<double>(den);
  }
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline Rational parse_rational(const std::string& s) {
  Rational q;
  if (q.set_str(s, 10) != 0) throw std::invalid_argument("not a rational literal: " + s);
  q.canonicalize();
  return q;
}

class EnumerationTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace laplace
