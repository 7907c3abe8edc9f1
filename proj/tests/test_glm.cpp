#include "laplace/coefficients.hpp"
#include "laplace/glm.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include <cmath>

using namespace laplace;

namespace {

using F50 = boost::multiprecision::cpp_bin_float_50;

// k-th central difference of log(1 + e^t) at 50 digits.
double fd_logistic(double t, int k) {
  const F50 h("1e-6");
  F50 acc = 0;
  for (int j = 0; j <= k; ++j) {
    const F50 x = F50(t) + (F50(k) / 2 - j) * h;
    const F50 v = boost::multiprecision::log1p(boost::multiprecision::exp(x));
    acc += ((j % 2) ? -1 : 1) * F50(static_cast<double>(binomial(k, j))) * v;
  }
  return static_cast<double>(acc / boost::multiprecision::pow(h, k));
}

}  // namespace

TEST(Link, LogisticValues) {
  const auto p = logistic_derivs(0.0, 4);
  EXPECT_DOUBLE_EQ(p[0], std::log(2.0));
  EXPECT_DOUBLE_EQ(p[1], 0.5);
  EXPECT_DOUBLE_EQ(p[2], 0.25);
  EXPECT_NEAR(p[3], 0.0, 1e-17);
  EXPECT_DOUBLE_EQ(p[4], -0.125);
  EXPECT_THROW(logistic_derivs(0.0, 15), std::invalid_argument);
}

TEST(Link, LogisticMatchesFiniteDifferences) {
  const auto p = logistic_derivs(0.7, 6);
  for (int k = 1; k <= 6; ++k) EXPECT_NEAR(p[static_cast<std::size_t>(k)], fd_logistic(0.7, k), 1e-6) << k;
}

TEST(Link, LogisticStableInTails) {
  const auto hi = logistic_derivs(40.0, 3);
  const auto lo = logistic_derivs(-40.0, 3);
  EXPECT_NEAR(hi[0], 40.0, 1e-12);
  EXPECT_NEAR(lo[0], std::exp(-40.0), 1e-30);
  EXPECT_GT(lo[2], 0.0);
  for (double v : hi) EXPECT_TRUE(std::isfinite(v));
  const auto big = logistic_derivs(-3.0, 14);
  for (double v : big) EXPECT_TRUE(std::isfinite(v));
}

TEST(Link, Quadratic) {
  const auto p = quadratic_link_derivs(3.0, 4);
  EXPECT_EQ(p, (std::vector<double>{4.5, 3.0, 1.0, 0.0, 0.0}));
}

TEST(Design, Deterministic) {
  EXPECT_EQ(sample_design(50, 3, 9), sample_design(50, 3, 9));
  EXPECT_NE(sample_design(50, 3, 9), sample_design(50, 3, 10));
  EXPECT_NEAR(sample_unit_vector(5, 3).norm(), 1.0, 1e-15);
}

TEST(Design, ColumnMeansAndRowNorms) {
  const Eigen::MatrixXd x = sample_design(4096, 4, 1);
  for (int j = 0; j < 4; ++j) EXPECT_LT(std::abs(x.col(j).mean()), 4.0 / 64.0);
  const Eigen::MatrixXd y = sample_design(1024, 16, 2);
  const double m = y.rowwise().squaredNorm().mean() / 16.0;
  EXPECT_GT(m, 0.8);
  EXPECT_LT(m, 1.2);
}

TEST(Potential, CriticalPointAndHessian) {
  Eigen::MatrixXd X(8, 2);
  X << 1, 0, 0, 1, 1, 1, -1, 2, 0.5, -1, 2, 0.3, -1.5, -0.5, 0.2, 0.9;
  auto inst = std::make_shared<const GlmInstance>(make_glm_instance(X, Eigen::Vector2d(0.6, 0.8)));
  const ProblemSpec p = glm_potential(inst, 1);
  EXPECT_LT(gradient_at(p, p.x0).norm(), 1e-15);
  ProblemSpec fd = p;
  fd.u_deriv = nullptr;
  const Eigen::MatrixXd h = hessian_at(fd, p.x0);
  EXPECT_LT((h - inst->H.matrix()).cwiseAbs().maxCoeff(), 1e-6);
  const Eigen::VectorXd back = refine_minimizer(p, p.x0 + Eigen::Vector2d(0.3, -0.2));
  EXPECT_LT((back - p.x0).norm(), 1e-8);
}

TEST(Potential, SingularDesignReported) {
  Eigen::MatrixXd X(3, 2);
  X << 1, 0, 2, 0, -1, 0;
  try {
    make_glm_instance(X, Eigen::Vector2d(1, 0));
    FAIL();
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("smallest eigenvalue"), std::string::npos);
  }
}

TEST(Potential, StreamingFormMatchesMaterialized) {
  auto inst = std::make_shared<const GlmInstance>(make_glm_instance(40, 3, 4));
  const Eigen::Vector3d x = inst->x0 + Eigen::Vector3d(0.1, -0.2, 0.05);
  for (int k = 1; k <= 5; ++k) {
    const GlmDerivativeForm f(inst, x, k);
    const SymTensor t = f.materialize();
    const std::vector<double> u{0.3, -0.5, 0.8};
    std::vector<double> g(3);
    const double v = f.value_and_gradient(u, g);
    EXPECT_NEAR(v, contract(t, u), 1e-12);
    std::vector<double> tg(3);
    MonomialForm(t).value_and_gradient(u, tg);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(g[i], tg[i], 1e-12);
  }
  const ProblemSpec p = glm_potential(inst, 1);
  ProblemSpec fd = p;
  fd.u_deriv = nullptr;
  const SymTensor a = derivative_tensor(p, false, x, 3);
  const SymTensor b = derivative_tensor(fd, false, x, 3);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.values()[i], b.values()[i], 1e-4);
}

TEST(GlmA2, MatchesClosedFormOnStandardizedJet) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const int d = 1 + static_cast<int>(seed % 6);
    const int n = 16 + 4 * static_cast<int>(seed);
    const GBuiltin g = seed % 3 == 0 ? GBuiltin::constant : (seed % 3 == 1 ? GBuiltin::linear : GBuiltin::quadratic);
    auto inst = std::make_shared<const GlmInstance>(make_glm_instance(n, d, seed));
    const double a = glm_a2(*inst, g_jet(g, d));
    const double b = a2_closed_form(standardize(glm_potential(inst, 1, g)));
    EXPECT_NEAR(a, b, 1e-10 * std::max(1.0, std::abs(b))) << seed;
  }
}

TEST(GlmA2, QuadraticLinkVanishes) {
  auto inst = std::make_shared<const GlmInstance>(make_glm_instance(30, 3, 5, LinkKind::quadratic));
  EXPECT_EQ(glm_a2(*inst, g_jet(GBuiltin::constant, 3)), 0.0);
}

TEST(GlmA2, SinglePointByHand) {
  Eigen::MatrixXd X(1, 1);
  X << 1.0;
  const GlmInstance inst = make_glm_instance(X, Eigen::VectorXd::Ones(1));
  const auto p = logistic_derivs(1.0, 4);
  const double t = 1.0 / p[2];
  const double hand = -p[4] * t * t / 8.0 + p[3] * p[3] * (t * t * t / 12.0 + t * t * t / 8.0);
  EXPECT_NEAR(glm_a2(inst, g_jet(GBuiltin::constant, 1)), hand, 1e-14);
}

TEST(NormProfile, QuadraticLinkHessianConsistency) {
  auto inst = std::make_shared<const GlmInstance>(make_glm_instance(64, 4, 6, LinkKind::quadratic));
  auto form = std::make_shared<GlmDerivativeForm>(inst, inst->x0, 2);
  EXPECT_NEAR(operator_norm_form(form, inst->H).value, 1.0, 1e-8);
  EXPECT_NEAR(operator_norm_form(form, WeightMatrix::identity(4)).value, inst->H.eigenvalues().maxCoeff(), 1e-8);
}

TEST(NormProfile, ScaledProfileBoundsWeightedNorm) {
  auto inst = std::make_shared<const GlmInstance>(make_glm_instance(256, 4, 7));
  const GlmNormProfile prof = empirical_norm_profile(inst, 4, 2.0, 1);
  for (int k = 3; k <= 4; ++k) {
    auto form = std::make_shared<GlmDerivativeForm>(inst, inst->x0, k);
    const double weighted = operator_norm_form(form, inst->H).value;
    EXPECT_LE(weighted, prof.profile0.c[static_cast<std::size_t>(k)] * (1 + 1e-9));
    EXPECT_LE(prof.profile0.c[static_cast<std::size_t>(k)], prof.profileR.c[static_cast<std::size_t>(k)]);
  }
  EXPECT_DOUBLE_EQ(prof.profile0.cg[0], 1.0);
}

TEST(NormProfile, TailConditionFollowsThirdOrderCriterion) {
  int tested = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto inst = std::make_shared<const GlmInstance>(make_glm_instance(1024, 4, seed));
    const ProblemSpec p = glm_potential(inst, 1);
    const TailCheck t = check_tail_condition(p, 1.0);
    if (t.c3 * std::sqrt(4.0 / 1024.0) <= 1.0) {
      ++tested;
      EXPECT_TRUE(t.satisfied);
    }
  }
  EXPECT_GT(tested, 0);
}

TEST(Events, HessianLowerBoundFrequency) {
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) hits += glm_hessian_min_eigenvalue(256, 4, seed) > 0.05;
  EXPECT_GE(hits, 190);
}
