#pragma once

#include "laplace/bell.hpp"
#include "laplace/problem.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace laplace {

struct CoefficientResult {
  int k = 0;
  double value = 0.0;
  std::string method = "explicit";  // explicit | mc | special
  double mc_stderr = 0.0;
  std::optional<Rational> exact;
  std::uint64_t work = 0;  // multiply-adds spent by the explicit path
};

struct ExplicitOptions {
  std::uint64_t budget = 100'000'000;
};

// A_k = sum_l sum over compositions (m_1..m_r) of l of (-1)^r / r! * E[F_{k-l} P_{m_1} ... P_{m_r}](Z)
// with F_j = <grad^j f, x^j>/j! and P_m = <grad^{m+2} v, x^{m+2}>/(m+2)!.
template <Scalar S>
S coeff_explicit_value(const BasicLocalJet<S>& jet, int k, const ExplicitOptions& opt = {},
                       std::uint64_t* work = nullptr);

CoefficientResult coeff_explicit(const LocalJet& jet, int k, const ExplicitOptions& opt = {});
CoefficientResult coeff_explicit(const ExactLocalJet& jet, int k, const ExplicitOptions& opt = {});

// f = 1 branch: only the v tensors are read.
template <Scalar S>
S coeff_f1_value(const BasicLocalJet<S>& vjet_only, int k, const ExplicitOptions& opt = {});
CoefficientResult coeff_f1(const LocalJet& jet, int k, const ExplicitOptions& opt = {});
CoefficientResult coeff_f1(const ExactLocalJet& jet, int k, const ExplicitOptions& opt = {});

// chi_k(0, x) = sum_l C(k,l) <grad^{k-l} f, x^{k-l}> B_l(s_1..s_l), s_j = -<grad^{j+2} v, x^{j+2}>/((j+1)(j+2)).
double chi_eval(const LocalJet& jet, int k, std::span<const double> x);

// Compiled chi_k for repeated evaluation at x and -x.
class ChiEvaluator {
 public:
  ChiEvaluator(const LocalJet& jet, int k);
  int order() const { return k_; }
  double operator()(std::span<const double> x) const;
  // chi_k(x) and chi_k(-x) from one set of contractions.
  std::pair<double, double> pair(std::span<const double> x) const;

 private:
  void contractions(std::span<const double> x, std::vector<double>& fc, std::vector<double>& vc) const;
  double assemble(const std::vector<double>& fc, const std::vector<double>& vc, double sign) const;
  int k_;
  int d_;
  std::vector<MonomialForm> f_;  // orders 0..k
  std::vector<MonomialForm> v_;  // orders 3..k+2
  std::vector<bool> fzero_, vzero_;
};

struct McOptions {
  std::size_t samples = 1'000'000;  // Gaussian draws; antithetic mode uses samples/2 pairs
  std::uint64_t seed = 1;
  bool antithetic = true;
  int threads = 0;
  std::size_t chunk = 8192;  // draws per RNG stream
};

// (1/k!) mean of chi_k(0, Z) over standard Gaussian Z.
CoefficientResult coeff_mc(const LocalJet& jet, int k, const McOptions& opt = {});

// Five-term A_2 from f to order 2 and v to order 4.
template <Scalar S>
S a2_closed_form(const BasicLocalJet<S>& jet);

// Random jets with entries uniform in [-scale, scale] (exact: multiples of 1/den).
LocalJet random_jet(int d, int f_order, int v_order, std::uint64_t seed, double scale = 1.0);
ExactLocalJet random_exact_jet(int d, int f_order, int v_order, std::uint64_t seed, int num = 4, int den = 3);

// k,value,method,stderr
std::string coefficients_csv(const std::vector<CoefficientResult>& rows);

}  // namespace laplace
