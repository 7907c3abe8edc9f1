#include "laplace/builtins.hpp"
#include "laplace/coefficients.hpp"
#include "laplace/cubature.hpp"
#include "laplace/glm.hpp"
#include "laplace/oracle.hpp"
#include "laplace/quartic.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace laplace;

namespace {

OracleOptions det_opts(double tol = 1e-9) {
  OracleOptions o;
  o.mode = OracleMode::deterministic;
  o.tol = tol;
  return o;
}

OracleOptions mc_opts(std::size_t budget, std::uint64_t seed = 7) {
  OracleOptions o;
  o.mode = OracleMode::mc;
  o.budget = budget;
  o.seed = seed;
  return o;
}

// sym(e1 (x) I): <T, x^3> = x1 ||x||^2, operator norm 1.
SymTensor e1_identity(int d) {
  return symmetrize(3, d, [](std::span<const int> t) { return (t[0] == 0 && t[1] == t[2]) ? 1.0 : 0.0; });
}

}  // namespace

TEST(Cubature, GenzMalikPolynomialExact) {
  // degree-7 rule: x^2 y^4 + x y on [0,1]^2 is integrated exactly by the root box
  auto f = [](std::span<const double> x) { return x[0] * x[0] * std::pow(x[1], 4) + x[0] * x[1]; };
  const auto r = genz_malik(f, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), 1e-14, 0.0, 100000);
  EXPECT_NEAR(r.value, 1.0 / 15.0 + 0.25, 1e-14);
  EXPECT_TRUE(r.converged);
}

TEST(Cubature, GenzMalikGaussian3d) {
  auto f = [](std::span<const double> x) { return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])); };
  const Eigen::Vector3d hi(6, 6, 6);
  const auto r = genz_malik(f, -hi, hi, 1e-10, 0.0, 5000000);
  EXPECT_NEAR(r.value, std::pow(std::numbers::pi, 1.5), 1e-9);
  EXPECT_LE(std::abs(r.value - std::pow(std::numbers::pi, 1.5)), r.error + 1e-12);
}

TEST(Cubature, GaussKronrodInfinite) {
  const auto r = gauss_kronrod_1d([](double x) { return std::exp(-x * x / 2); }, -INFINITY, INFINITY, 1e-12);
  EXPECT_NEAR(r.value, std::sqrt(2 * std::numbers::pi), 1e-12);
}

TEST(TailBound, GammaBoundDominatesIncompleteGamma) {
  for (double c : {1.0, 2.0, 3.0, 4.0, 8.0})
    for (double lam : {1.5 * c + 1, 10.0, 20.0, 45.0}) {
      if (lam <= c) continue;
      const double exact = boost::math::tgamma(c, lam);
      const double b = gamma_tail_bound(c, lam);
      EXPECT_GE(b, exact) << c << " " << lam;
      EXPECT_LE(b, exact * 50.0 * std::pow(lam, 0.5 * c)) << c << " " << lam;
    }
  EXPECT_TRUE(std::isinf(gamma_tail_bound(4.0, 3.0)));
}

TEST(TailBound, EnvelopeClosedFormInOneDimension) {
  // 2 * (2 pi)^{-1/2} * integral_B^inf e^{-y/4} dy, bounded via Gamma(1, B/4) = e^{-B/4}
  for (double B : {20.0, 60.0, 100.0}) {
    const double exact = 8.0 / std::sqrt(2 * std::numbers::pi) * std::exp(-B / 4);
    const double b = envelope_tail_bound(1, B);
    EXPECT_GE(b, exact);
    EXPECT_LE(b, exact * B);
  }
}

TEST(Oracle, GaussianIsOneDeterministic) {
  for (int d : {1, 2, 3}) {
    const auto r = integrate_reference(gaussian_problem(d, 100.0, 2), det_opts());
    EXPECT_NEAR(r.value, 1.0, 1e-9) << d;
    EXPECT_LE(r.error, 1e-9) << d;
    EXPECT_TRUE(r.converged);
    EXPECT_FALSE(r.heuristic_tail);
  }
}

TEST(Oracle, GaussianIsOneMonteCarlo) {
  const auto r = integrate_reference(gaussian_problem(12, 100.0, 2), mc_opts(20000));
  EXPECT_NEAR(r.value, 1.0, 1e-12);
  EXPECT_EQ(r.method, "mc");
}

TEST(Oracle, QuarticMatchesClosedForm) {
  const auto r = integrate_reference(quartic_problem(2, 64.0, 2), det_opts());
  EXPECT_NEAR(r.value, quartic_integral_exact(2, 64.0), 1e-8);
  EXPECT_LE(r.error, 1e-9);
  EXPECT_GT(r.tail_bound, 0.0);
  EXPECT_LE(r.tail_bound, 0.5e-9);
}

TEST(Oracle, QuarticThreeDimensions) {
  const auto r = integrate_reference(quartic_problem(3, 200.0, 1), det_opts(1e-8));
  EXPECT_NEAR(r.value, quartic_integral_exact(3, 200.0), 1e-8);
}

TEST(Oracle, DeterministicAndMonteCarloAgree) {
  for (int d : {2, 3}) {
    const auto p = quartic_problem(d, 100.0, 1, GBuiltin::quadratic);
    const auto det = integrate_reference(p, det_opts(1e-8));
    const auto mc = integrate_reference(p, mc_opts(400000, 3));
    EXPECT_GT(mc.error, 0.0);
    EXPECT_LE(std::abs(det.value - mc.value), 4.0 * mc.error + det.error) << d;
  }
}

TEST(Oracle, SeededDeterminismAcrossThreads) {
  const auto p = quartic_problem(4, 300.0, 1);
  auto o = mc_opts(100000, 11);
  o.threads = 1;
  const auto a = integrate_reference(p, o);
  o.threads = 4;
  const auto b = integrate_reference(p, o);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.error, b.error);
  o.seed = 12;
  EXPECT_NE(integrate_reference(p, o).value, a.value);
}

TEST(Oracle, DoublingSamplesHalvesVariance) {
  const auto p = quartic_problem(4, 40.0, 1, GBuiltin::quadratic);
  const auto a = integrate_reference(p, mc_opts(400000, 5));
  const auto b = integrate_reference(p, mc_opts(800000, 5));
  const double ratio = (b.error * b.error) / (a.error * a.error);
  EXPECT_NEAR(ratio, 0.5, 0.05);
}

TEST(Oracle, HeuristicTailWithoutEnvelope) {
  auto inst = std::make_shared<const GlmInstance>(make_glm_instance(64, 2, 3));
  const auto p = glm_potential(inst, 1);
  const auto r = integrate_reference(p, det_opts(1e-8));
  EXPECT_TRUE(r.heuristic_tail);
  EXPECT_TRUE(std::isnan(r.tail_bound));
  EXPECT_FALSE(r.warnings.empty());
  const auto mc = integrate_reference(p, mc_opts(400000, 2));
  EXPECT_LE(std::abs(r.value - mc.value), 4.0 * mc.error + 1e-8);
}

TEST(Oracle, DeterministicDimensionLimit) {
  EXPECT_THROW(integrate_reference(gaussian_problem(5, 10.0, 1), det_opts()), std::invalid_argument);
}

TEST(TrueRemainder, GaussianVanishes) {
  const auto p = gaussian_problem(2, 50.0, 3);
  const auto r = integrate_reference(p, det_opts());
  for (int L = 1; L <= 3; ++L) {
    const auto t = true_remainder(p, L, r, {0.0, 0.0});
    EXPECT_LE(std::abs(t.rem), 1e-9);
    EXPECT_TRUE(t.inconclusive);
  }
}

TEST(TrueRemainder, QuarticMatchesQuadrature) {
  const int d = 2;
  const double n = 64.0;
  const auto p = quartic_problem(d, n, 2);
  const auto r = integrate_reference(p, det_opts());
  const auto t = true_remainder(p, 2, r, {quartic_coeff<double>(1, d) / n});
  const auto q = quartic_remainder(2, d, n);
  EXPECT_NEAR(t.rem, q.rem, r.error + q.error);
  EXPECT_FALSE(t.inconclusive);
  EXPECT_LE(t.lo, q.rem);
  EXPECT_GE(t.hi, q.rem);
}

TEST(TrueRemainder, StirlingNextTerm) {
  const double n = 50.0;
  const auto p = stirling_problem(n, 2);
  const auto r = integrate_reference(p, det_opts(1e-12));
  const auto t = true_remainder(p, 2, r, {1.0 / (12.0 * n)});
  const double target = 1.0 / (288.0 * n * n);
  EXPECT_NEAR(t.rem / target, 1.0, 0.2);
  EXPECT_FALSE(t.inconclusive);
  // the oracle reproduces Gamma(n+1) e^n / (n^n sqrt(2 pi n))
  const double gamma_ratio =
      std::exp(std::lgamma(n + 1.0) + n - n * std::log(n) - 0.5 * std::log(2 * std::numbers::pi * n));
  EXPECT_NEAR(r.value, gamma_ratio, 1e-12);
}

TEST(TrueRemainder, InconclusiveWhenErrorDominates) {
  OracleResult o;
  o.value = 1.001;
  o.error = 0.001;
  o.method = "mc";
  o.converged = true;
  EXPECT_TRUE(true_remainder(1.0, 1, o, {}).inconclusive);
  o.error = 1e-5;
  EXPECT_FALSE(true_remainder(1.0, 1, o, {}).inconclusive);
  EXPECT_THROW(true_remainder(1.0, 3, o, {0.1}), std::invalid_argument);
}

TEST(RestrictedExp, ZeroTensorGivesOne) {
  const auto rep = restricted_exp_check(SymTensor(3, 4), 4, 100.0, 40.0, 2000, 1);
  EXPECT_DOUBLE_EQ(rep.empirical, 1.0);
  EXPECT_DOUBLE_EQ(rep.gradient_bound, 1.0);
  EXPECT_DOUBLE_EQ(rep.naive_bound, 1.0);
  EXPECT_TRUE(rep.bound_holds);
}

TEST(RestrictedExp, GradientBoundBeatsNaiveAndHolds) {
  const int d = 16;
  const SymTensor t = e1_identity(d);
  EXPECT_NEAR(operator_norm(t), 1.0, 1e-6);
  for (double R : {1.0, 2.0, 4.0, 8.0}) {
    const auto rep = restricted_exp_check(t, d, 4096.0, R, 200000, 9, 0, 1.0);
    EXPECT_TRUE(rep.gradient_smaller) << R;
    EXPECT_TRUE(rep.bound_holds) << R;
    EXPECT_LE(rep.empirical + 4 * rep.empirical_stderr, rep.gradient_bound) << R;
  }
}

TEST(RestrictedExp, NaiveWinsAtLargeRadius) {
  // the comparison flips once R exceeds sqrt(n/d) / 1.5
  const auto rep = restricted_exp_check(e1_identity(16), 16, 4096.0, 12.0, 1000, 1, 0, 1.0);
  EXPECT_FALSE(rep.gradient_smaller);
}

TEST(Oracle, GlmMonteCarloBracketsPartialSum) {
  const int d = 8, n = 512, L = 3;
  auto inst = std::make_shared<const GlmInstance>(make_glm_instance(n, d, 21));
  const auto p = glm_potential(inst, L);
  const LocalJet jet = standardize(p);
  const double a2 = coeff_explicit(jet, 2).value, a4 = coeff_explicit(jet, 4).value;
  EXPECT_NEAR(a2, glm_a2(*inst, g_jet(GBuiltin::constant, d)), 1e-8 * std::max(1.0, std::abs(a2)));
  const auto r = integrate_reference(p, mc_opts(10000000, 4));
  const auto t = true_remainder(p, L, r, {a2 / n, a4 / (double(n) * n)});
  EXPECT_LT(2.0 * r.half_width(), 5e-4);
  EXPECT_LE(std::abs(t.rem), r.half_width());
}
