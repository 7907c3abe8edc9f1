#include "laplace/builtins.hpp"
#include "laplace/coefficients.hpp"
#include "laplace/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

using namespace laplace;

namespace {

// Literal evaluation of the multi-index sum: every composition (m_1..m_r) of l <= k, every
// beta with |beta| = k - l and alpha_j with |alpha_j| = m_j + 2, weighted by
// (-1)^r / r! * f_beta / beta! * prod v_{alpha_j} / alpha_j! * even(gamma) (gamma - 1)!!.
Rational literal_coefficient(const ExactLocalJet& jet, int k) {
  const int d = jet.dim();
  Rational total = 0;
  std::vector<int> parts;
  std::function<void(int)> compositions = [&](int remaining) {
    const int l = k - remaining;
    const int r = static_cast<int>(parts.size());
    // Sum over multi-indices for this composition.
    std::vector<MultiIndex> chosen;
    std::function<void(std::size_t, const MultiIndex&, Rational)> pick = [&](std::size_t slot, const MultiIndex& acc,
                                                                            Rational w) {
      if (slot == parts.size()) {
        for (const MultiIndex& b : enumerate_multi_indices(d, k - l)) {
          const Rational fb = jet.f(k - l).at(b);
          if (fb == 0) continue;
          const MultiIndex g = acc + b;
          total += w * fb / factorial<Rational>(b) * gaussian_moment<Rational>(g);
        }
        return;
      }
      const int order = parts[slot] + 2;
      for (const MultiIndex& a : enumerate_multi_indices(d, order)) {
        const Rational va = jet.v(order).at(a);
        if (va == 0) continue;
        pick(slot + 1, acc + a, w * va / factorial<Rational>(a));
      }
    };
    Rational sign = (r % 2) ? Rational(-1) : Rational(1);
    pick(0, MultiIndex::zero(d), sign / factorial_of<Rational>(r));
    for (int m = 1; m <= remaining; ++m) {
      parts.push_back(m);
      compositions(remaining - m);
      parts.pop_back();
    }
  };
  compositions(k);
  return total;
}

Rational quartic_formula(int k, int d) {
  Rational prod = 1;
  for (int j = 0; j < 2 * k; ++j) prod *= from_ratio<Rational>(d, 2) + j;
  Rational sixth = Rational(-1, 6);
  Rational p = 1;
  for (int i = 0; i < k; ++i) p *= sixth;
  return p * prod / factorial_of<Rational>(k);
}

}  // namespace

TEST(CoeffExplicit, QuarticMatchesClosedProduct) {
  for (int d = 1; d <= 6; ++d)
    for (int k = 1; k <= 3; ++k) {
      const ExactLocalJet j = quartic_jet<Rational>(d, k);
      EXPECT_EQ(*coeff_explicit(j, 2 * k).exact, quartic_formula(k, d)) << "d=" << d << " k=" << k;
    }
  EXPECT_EQ(*coeff_explicit(quartic_jet<Rational>(2, 1), 2).exact, Rational(-1, 3));
}

TEST(CoeffExplicit, MatchesLiteralTupleSum) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const int d = 1 + static_cast<int>(seed % 3);
    const int k = 1 + static_cast<int>(seed % 4);
    const ExactLocalJet j = random_exact_jet(d, k, k + 2, seed);
    EXPECT_EQ(*coeff_explicit(j, k).exact, literal_coefficient(j, k)) << "d=" << d << " k=" << k;
  }
}

TEST(CoeffExplicit, OddOrdersVanishExactly) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int d = 1 + static_cast<int>(seed % 4);
    const ExactLocalJet j = random_exact_jet(d, 7, 9, 100 + seed);
    for (int k = 1; k <= 5; k += 2) EXPECT_EQ(*coeff_explicit(j, k).exact, Rational(0)) << d << ' ' << k;
    const LocalJet jd = to_double(j);
    EXPECT_EQ(coeff_explicit(jd, 3).value, 0.0);
  }
}

TEST(CoeffExplicit, StirlingSeries) {
  const ExactLocalJet j = stirling_jet<Rational>(3);
  EXPECT_EQ(*coeff_explicit(j, 2).exact, Rational(1, 12));
  EXPECT_EQ(*coeff_explicit(j, 4).exact, Rational(1, 288));
  EXPECT_EQ(*coeff_explicit(j, 6).exact, Rational(-139, 51840));
}

TEST(CoeffExplicit, ParityFlipLeavesEvenTermsUnchanged) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const int d = 1 + static_cast<int>(seed % 3);
    ExactLocalJet j = random_exact_jet(d, 4, 6, 300 + seed);
    ExactLocalJet flipped = j;
    for (int k = 1; k <= 4; k += 2)
      for (Rational& v : flipped.fjet[static_cast<std::size_t>(k)].values()) v = -v;
    for (int k = 3; k <= 6; k += 2)
      for (Rational& v : flipped.vjet[static_cast<std::size_t>(k - 3)].values()) v = -v;
    for (int k = 2; k <= 4; k += 2) EXPECT_EQ(*coeff_explicit(j, k).exact, *coeff_explicit(flipped, k).exact);
  }
}

TEST(CoeffExplicit, GuardsReportMonteCarloAlternative) {
  const LocalJet big = random_jet(20, 4, 6, 1);
  try {
    coeff_explicit(big, 4);
    FAIL() << "expected EnumerationTooLarge";
  } catch (const EnumerationTooLarge& e) {
    EXPECT_NE(std::string(e.what()).find("coeff_mc"), std::string::npos);
  }
  EXPECT_THROW(coeff_explicit(random_jet(4, 4, 6, 2), 4, ExplicitOptions{1000}), EnumerationTooLarge);
  EXPECT_THROW(coeff_explicit(random_jet(2, 2, 4, 3), 4), std::invalid_argument);
}

TEST(CoeffF1, Examples) {
  EXPECT_EQ(*coeff_f1(quartic_jet<Rational>(4, 1), 2).exact, Rational(-1));
  const ExactLocalJet zero = gaussian_jet<Rational>(3, 2);
  for (int k = 1; k <= 4; ++k) EXPECT_EQ(*coeff_f1(zero, k).exact, Rational(0));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ExactLocalJet j = random_exact_jet(2, 4, 6, 500 + seed);
    ExactLocalJet unit = j;
    for (auto& t : unit.fjet) t = ExactSymTensor(t.order(), t.dim());
    unit.fjet[0].values()[0] = 1;
    ExactLocalJet vonly = j;
    vonly.fjet.clear();
    EXPECT_EQ(*coeff_f1(vonly, 4).exact, *coeff_explicit(unit, 4).exact);
  }
}

TEST(A2ClosedForm, MatchesExplicitOnRandomJets) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const int d = 1 + static_cast<int>(seed % 5);
    const LocalJet j = random_jet(d, 2, 4, 1000 + seed);
    const double a = a2_closed_form(j);
    const double b = coeff_explicit(j, 2).value;
    EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(b))) << "seed " << seed;
  }
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ExactLocalJet j = random_exact_jet(1 + static_cast<int>(seed % 4), 2, 4, 2000 + seed);
    EXPECT_EQ(a2_closed_form(j), *coeff_explicit(j, 2).exact);
  }
}

TEST(A2ClosedForm, OneDimensionalFormula) {
  EXPECT_EQ(a2_closed_form(stirling_jet<Rational>(1)), Rational(1, 12));
  for (int a = -3; a <= 3; ++a)
    for (int b = -2; b <= 4; ++b) {
      ExactLocalJet j = gaussian_jet<Rational>(1, 1);
      j.vjet[0].values()[0] = a;
      j.vjet[1].values()[0] = b;
      EXPECT_EQ(a2_closed_form(j), Rational(a * a) * (Rational(1, 12) + Rational(1, 8)) - from_ratio<Rational>(b, 8));
    }
}

TEST(Chi, LowOrders) {
  const LocalJet j = random_jet(3, 4, 6, 77);
  const std::vector<double> x{0.3, -1.2, 0.7};
  EXPECT_DOUBLE_EQ(chi_eval(j, 0, x), j.f(0).values()[0]);
  LocalJet unit = j;
  for (auto& t : unit.fjet) t = SymTensor(t.order(), t.dim());
  unit.fjet[0].values()[0] = 1.0;
  EXPECT_NEAR(chi_eval(unit, 1, x), -contract(j.v(3), x) / 6.0, 1e-13);
}

TEST(Chi, MatchesDirectAssembly) {
  const LocalJet j = random_jet(2, 4, 6, 78);
  PhiloxStream rng(9, 9);
  for (int t = 0; t < 20; ++t) {
    const std::vector<double> x{rng.normal(), rng.normal()};
    std::vector<double> s;
    for (int m = 1; m <= 4; ++m) s.push_back(-contract(j.v(m + 2), x) / ((m + 1.0) * (m + 2.0)));
    double direct = 0.0;
    for (int l = 0; l <= 4; ++l)
      direct += static_cast<double>(binomial(4, l)) * contract(j.f(4 - l), x) * bell_partition_sum<double>(l, s);
    EXPECT_NEAR(chi_eval(j, 4, x), direct, 1e-12 * std::max(1.0, std::abs(direct)));
    const ChiEvaluator chi(j, 4);
    const std::vector<double> mx{-x[0], -x[1]};
    const auto [a, b] = chi.pair(x);
    EXPECT_NEAR(b, chi(mx), 1e-12 * std::max(1.0, std::abs(b)));
    EXPECT_NEAR(a, direct, 1e-12 * std::max(1.0, std::abs(direct)));
  }
}

TEST(CoeffMc, QuarticA2) {
  const CoefficientResult r = coeff_mc(quartic_jet<double>(2, 1), 2, McOptions{1'000'000, 7});
  EXPECT_GT(r.mc_stderr, 0.0);
  EXPECT_LT(std::abs(r.value + 1.0 / 3.0), 4.0 * r.mc_stderr);
  EXPECT_EQ(r.method, "mc");
}

TEST(CoeffMc, TrivialJetHasNoVariance) {
  const LocalJet j = gaussian_jet<double>(3, 2);
  for (int k = 1; k <= 4; ++k) {
    const CoefficientResult r = coeff_mc(j, k, McOptions{20'000, 3});
    EXPECT_EQ(r.value, 0.0);
    EXPECT_EQ(r.mc_stderr, 0.0);
  }
}

TEST(CoeffMc, OddOrdersWithPlainSampling) {
  const LocalJet j = random_jet(3, 3, 5, 21);
  McOptions o{200'000, 5};
  o.antithetic = false;
  const CoefficientResult r = coeff_mc(j, 3, o);
  EXPECT_GT(r.mc_stderr, 0.0);
  EXPECT_LT(std::abs(r.value), 4.0 * r.mc_stderr);
  o.antithetic = true;
  EXPECT_EQ(coeff_mc(j, 3, o).value, 0.0);
}

TEST(CoeffMc, ReproducibleAcrossThreadCounts) {
  const LocalJet j = random_jet(2, 4, 6, 22);
  McOptions a{100'000, 11};
  a.threads = 1;
  McOptions b = a;
  b.threads = 4;
  const CoefficientResult ra = coeff_mc(j, 4, a);
  const CoefficientResult rb = coeff_mc(j, 4, b);
  EXPECT_EQ(ra.value, rb.value);
  EXPECT_EQ(ra.mc_stderr, rb.mc_stderr);
}

TEST(CoeffMc, AgreesWithExplicitOnRandomJets) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const int d = 1 + static_cast<int>(seed);
    const LocalJet j = random_jet(d, 4, 6, 40 + seed, 0.5);
    for (int k : {2, 4}) {
      const double ex = coeff_explicit(j, k).value;
      const CoefficientResult mc = coeff_mc(j, k, McOptions{200'000, seed});
      EXPECT_LT(std::abs(mc.value - ex), 4.0 * mc.mc_stderr) << "d=" << d << " k=" << k;
    }
  }
}

TEST(Csv, Layout) {
  CoefficientResult r;
  r.k = 2;
  r.value = -0.25;
  const std::string csv = coefficients_csv({r});
  EXPECT_EQ(csv, "k,value,method,stderr\n2,-0.25,explicit,0\n");
}
