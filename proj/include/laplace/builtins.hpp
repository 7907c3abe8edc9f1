#pragma once

#include "laplace/json_io.hpp"
#include "laplace/problem.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace laplace {

// Builtin amplitudes around x0: 1, 1 + <a, x - x0> with a = d^{-1/2} (1..1), 1 + ||x - x0||^2.
enum class GBuiltin { constant, linear, quadratic };
GBuiltin parse_g_builtin(const std::string& name);
std::string g_builtin_name(GBuiltin g);

// Installs g and its analytic derivatives (centered at p.x0) on p.
void attach_g(ProblemSpec& p, GBuiltin g);

// u = ||x||^2/2 + ||x||^4/24, x0 = 0, H = I.
ProblemSpec quartic_problem(int d, double n, int L, GBuiltin g = GBuiltin::constant);
// u = ||x||^2/2, x0 = 0, H = I.
ProblemSpec gaussian_problem(int d, double n, int L, GBuiltin g = GBuiltin::constant);
// u = x - log(1 + x) on (-1, inf), x0 = 0, H = 1; the normalized integral is Gamma(n+1) / (sqrt(2 pi n) (n/e)^n).
ProblemSpec stirling_problem(double n, int L);

// Fourth-order tensor with <T, x^4> = ||x||^4: entries 1 at 4e_i and 1/3 at 2e_i + 2e_j.
template <Scalar S>
BasicSymTensor<S> quartic_fourth_tensor(int d);

// Exact jets at the origin: f to order 2L, v to order 2L+2.
template <Scalar S>
BasicLocalJet<S> quartic_jet(int d, int L, GBuiltin g = GBuiltin::constant);
template <Scalar S>
BasicLocalJet<S> gaussian_jet(int d, int L, GBuiltin g = GBuiltin::constant);
// v^{(k)}(0) = (-1)^k (k-1)!, f = 1.
template <Scalar S>
BasicLocalJet<S> stirling_jet(int L);

struct ProblemInput {
  std::string builtin;  // empty when only jets were supplied
  std::string g = "constant";
  int d = 1;
  double n = 1.0;
  int L = 1;
  std::uint64_t seed = 1;
  std::optional<ProblemSpec> spec;
  std::optional<ExactLocalJet> exact_jet;
  LocalJet jet;
  Json echo;  // fully resolved parameters
};

struct BuiltinRequest {
  std::string name;
  int d = 2;
  double n = 64.0;
  int L = 1;
  std::string g = "constant";
  std::uint64_t seed = 1;
};

// Names: quartic, gaussian, stirling (alias stirling1d), glm-logistic, glm-quadratic.
ProblemInput make_builtin(const BuiltinRequest& req);

// Either {"builtin": name, ...parameters} or {"jets": {"f": [...], "v": [...]}, "n": .., "L": ..}.
ProblemInput load_problem(const Json& doc);

}  // namespace laplace
