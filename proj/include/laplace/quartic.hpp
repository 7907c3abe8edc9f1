#pragma once

#include "laplace/remainder.hpp"
#include "laplace/scalar.hpp"

#include <string>
#include <utility>
#include <vector>

namespace laplace {

// A_{2k} for u = ||x||^2/2 + ||x||^4/24: (-1/6)^k prod_{j<2k} (d/2 + j) / k!.
template <Scalar S>
S quartic_coeff(int k, int d);

struct QuadratureValue {
  double value = 0.0;
  double error = 0.0;
  std::string precision = "double";
};

// Normalized integral 2^{1-d/2}/Gamma(d/2) int_0^inf s^{d-1} exp(-s^2/2 - s^4/(24n)) ds.
QuadratureValue quartic_integral(int d, double n, bool high_precision = false);
double quartic_integral_exact(int d, double n);

struct QuarticRemainder {
  int L = 1;
  int d = 1;
  double n = 1.0;
  double rem = 0.0;
  double error = 0.0;
  std::string precision = "double";
};

// integral - 1 - sum_{k<L} A_{2k} n^{-k}; escalates to 50-digit arithmetic when the error
// exceeds 1% of the remainder and throws if that is still not enough.
QuarticRemainder quartic_remainder(int L, int d, double n, bool require_hypothesis = true);

// Same remainder as a single integral of the Taylor tail of exp(-s^4/(24n)); independent of the subtraction.
double quartic_remainder_direct(int L, int d, double n);

// c_3(r) = r sqrt(d/n), c_4 = 1, higher orders 0, g = 1.
DerivNormProfile quartic_profile(int d, double n, double r, int L);

struct TightnessRow {
  int L = 1;
  int d = 1;
  double n = 1.0;
  double eps2 = 0.0;  // d^2 / n
  double rem = 0.0;
  double error = 0.0;
  double ratio = 0.0;  // rem / eps2^L
  std::string precision;
};

struct TightnessSummary {
  int L = 1;
  double band = 0.0;   // max |ratio| / min |ratio|
  double slope = 0.0;  // least-squares slope of log|rem| on log eps2
  bool band_ok = false;
  bool slope_ok = false;
};

struct TightnessTable {
  std::vector<TightnessRow> rows;
  std::vector<TightnessSummary> summary;
};

TightnessTable tightness_experiment(const std::vector<int>& Ls, const std::vector<std::pair<int, double>>& grid);
std::string tightness_csv(const TightnessTable& t);

// Least-squares slope of y on x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace laplace
