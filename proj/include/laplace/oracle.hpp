#pragma once

#include "laplace/problem.hpp"
#include "laplace/sym_tensor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace laplace {

enum class OracleMode { automatic, deterministic, mc };

OracleMode parse_oracle_mode(const std::string& s);
std::string oracle_mode_name(OracleMode m);

struct OracleOptions {
  OracleMode mode = OracleMode::automatic;
  double tol = 1e-9;             // deterministic absolute tolerance
  std::size_t budget = 1000000;  // MC samples
  std::size_t max_eval = 20000000;
  std::uint64_t seed = 1;
  int threads = 0;
  double envelope_radius = 40.0;  // envelope asserted for ||y|| >= this * sqrt(d)
  bool antithetic = true;
};

struct OracleResult {
  double value = 0.0;
  double error = 0.0;  // deterministic bound, or MC standard error
  std::string method;
  std::size_t budget_spent = 0;
  double box = 0.0;         // half-width in standardized coordinates
  double tail_bound = 0.0;  // certified exterior mass, NaN when heuristic
  bool heuristic_tail = false;
  bool converged = false;
  std::vector<std::string> warnings;

  bool is_mc() const { return method == "mc"; }
  // 95% half-width for MC, the error bound for deterministic runs.
  double half_width() const { return is_mc() ? 1.96 * error : error; }
};

// Upper bound on the upper incomplete gamma integral from lambda to infinity of t^{c-1} e^{-t}.
// Uses e^{-lambda s}(c/(1-s))^c at the optimal s = 1 - c/lambda; infinity when lambda <= c.
double gamma_tail_bound(double c, double lambda);

// Bound on the normalized integral outside the box [-B, B]^d in standardized coordinates,
// given |g| e^{-n(u-u0)} <= e^{-sqrt(d) ||y|| / 4} there.
double envelope_tail_bound(int d, double B);

// Normalized integral of g e^{-n(u - u0)} (value 1 for the Gaussian with g = 1).
OracleResult integrate_reference(const ProblemSpec& p, const OracleOptions& opt = {});

struct TrueRemainder {
  int L = 1;
  double integral = 0.0;
  double partial_sum = 0.0;
  double rem = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool inconclusive = false;
};

// terms[k-1] = A_{2k} n^{-k}; the first L-1 enter the partial sum.
TrueRemainder true_remainder(double g0, int L, const OracleResult& oracle, const std::vector<double>& terms);
TrueRemainder true_remainder(const ProblemSpec& p, int L, const OracleResult& oracle, const std::vector<double>& terms);

struct RestrictedExpReport {
  int d = 1;
  double n = 1.0;
  double R = 1.0;
  double tensor_norm = 0.0;
  double empirical = 0.0;
  double empirical_stderr = 0.0;
  double gradient_bound = 1.0;
  double naive_bound = 1.0;
  bool gradient_smaller = false;
  bool bound_holds = false;
};

// MC estimate of ||e^{-r} 1_U||_2 for r(x) = <T, x^3>/(6 sqrt n), U = {||x|| < R sqrt d},
// against exp(sup_U ||grad r||^2) and exp(sup_U |r|). known_norm < 0 estimates ||T|| by ascent.
RestrictedExpReport restricted_exp_check(const SymTensor& T3, int d, double n, double R, std::size_t samples,
                                         std::uint64_t seed, int threads = 0, double known_norm = -1.0);

}  // namespace laplace
