#include "laplace/remainder.hpp"
#include "laplace/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace laplace {

double radius_default(int d, double n, int L) {
  if (d < 1 || !(n > 0.0) || L < 1) throw std::invalid_argument("radius_default needs d >= 1, n > 0, L >= 1");
  const double t = (static_cast<double>(L) / d) * std::log(n / (static_cast<double>(d) * d));
  return 20.0 * std::max(t, 2.0);
}

double tau_uc_bound(int d, double R) { return d * std::exp(-R * d / 16.0); }

DerivNormProfile deriv_norms(const ProblemSpec& p, double r, int L, const DerivNormOptions& opt,
                             const DerivNormProfile* inner) {
  if (r < 0.0) throw std::invalid_argument("radius multiplier must be non-negative");
  const bool fold = inner && inner->r <= r;
  DerivNormProfile out;
  out.r = r;
  out.method = "sampled";
  out.c.assign(static_cast<std::size_t>(2 * L + 3), 0.0);
  out.cg.assign(static_cast<std::size_t>(2 * L + 1), 0.0);
  const double radius = r * std::sqrt(p.d / p.n);
  BallSupOptions bo = opt.ball;
  if (fold) bo.extra_points.insert(bo.extra_points.end(), inner->witnesses.begin(), inner->witnesses.end());
  auto run = [&](bool of_g, int k) {
    const BallSup b = ball_sup_norm(p, of_g, k, radius, bo);
    if (!std::isfinite(b.value)) throw std::runtime_error("derivative norm is not finite inside the ball");
    if (radius > 0.0) out.witnesses.push_back(b.where);
    return b.value;
  };
  for (int k = 3; k <= 2 * L + 2; ++k) out.c[static_cast<std::size_t>(k)] = run(false, k);
  for (int k = 0; k <= 2 * L; ++k) out.cg[static_cast<std::size_t>(k)] = run(true, k);
  if (fold) {
    // The inner ball is contained in this one, so its sup is a valid lower bound here too.
    for (std::size_t k = 0; k < std::min(out.c.size(), inner->c.size()); ++k) out.c[k] = std::max(out.c[k], inner->c[k]);
    for (std::size_t k = 0; k < std::min(out.cg.size(), inner->cg.size()); ++k)
      out.cg[k] = std::max(out.cg[k], inner->cg[k]);
    out.witnesses.insert(out.witnesses.end(), inner->witnesses.begin(), inner->witnesses.end());
  }
  return out;
}

DerivNormProfile jet_profile(const LocalJet& jet, int L, const AscentOptions& opt) {
  if (jet.max_f_order() < 2 * L || jet.max_v_order() < 2 * L + 2)
    throw std::invalid_argument("jet order insufficient for a profile at L = " + std::to_string(L));
  DerivNormProfile out;
  out.r = 0.0;
  out.method = "jet";
  out.c.assign(static_cast<std::size_t>(2 * L + 3), 0.0);
  out.cg.assign(static_cast<std::size_t>(2 * L + 1), 0.0);
  const WeightMatrix id = WeightMatrix::identity(jet.dim());
  for (int k = 3; k <= 2 * L + 2; ++k) out.c[static_cast<std::size_t>(k)] = operator_norm(jet.v(k), id, opt);
  for (int k = 0; k <= 2 * L; ++k) out.cg[static_cast<std::size_t>(k)] = operator_norm(jet.f(k), id, opt);
  return out;
}

namespace {

void require_orders(const DerivNormProfile& p, int L) {
  if (static_cast<int>(p.c.size()) < 2 * L + 3 || static_cast<int>(p.cg.size()) < 2 * L + 1)
    throw std::invalid_argument("profile is missing orders for L = " + std::to_string(L));
}

AlphaLadder ladder(const DerivNormProfile& p0, const DerivNormProfile& pr, bool at_zero, int d, double n, int L,
                   bool refined) {
  const double eps = d / std::sqrt(n);
  const double sd = std::sqrt(static_cast<double>(d));
  const DerivNormProfile& p = at_zero ? p0 : pr;
  AlphaLadder a;
  const int kc = 2 * L + 2;
  a.cbar.assign(static_cast<std::size_t>(kc) + 1, 0.0);
  a.cbar_g.assign(static_cast<std::size_t>(2 * L) + 1, 0.0);
  // cbar_k(r) = c_k(0) + eps c_{k+1}(r) for r > 0; cbar_k(0) = c_k(0).
  for (int k = 3; k <= kc; ++k) {
    const double next = k + 1 <= kc ? p.c[static_cast<std::size_t>(k + 1)] : 0.0;
    a.cbar[static_cast<std::size_t>(k)] = p0.c[static_cast<std::size_t>(k)] + (at_zero ? 0.0 : eps * next);
  }
  for (int k = 0; k <= 2 * L; ++k) {
    const double next = k + 1 <= 2 * L ? p.cg[static_cast<std::size_t>(k + 1)] : 0.0;
    a.cbar_g[static_cast<std::size_t>(k)] = p0.cg[static_cast<std::size_t>(k)] + (at_zero ? 0.0 : eps * next);
  }
  a.alpha.assign(static_cast<std::size_t>(2 * L) + 1, 0.0);
  a.alpha_g.assign(static_cast<std::size_t>(2 * L) + 1, 0.0);
  for (int k = 1; k <= 2 * L; ++k) {
    const int half = (k + 1) / 2;
    double c;
    if (k % 2) {
      c = a.cbar[static_cast<std::size_t>(k + 2)];
      if (refined) c = std::min(c, sd * p.c[static_cast<std::size_t>(k + 2)]);
    } else {
      c = p.c[static_cast<std::size_t>(k + 2)];
    }
    a.alpha[static_cast<std::size_t>(k)] = std::pow(static_cast<double>(d), 1 - half) * c;
  }
  for (int k = 0; k <= 2 * L; ++k) {
    const int half = (k + 1) / 2;
    double c;
    if (k % 2) {
      c = a.cbar_g[static_cast<std::size_t>(k)];
      if (refined) c = std::min(c, sd * p.cg[static_cast<std::size_t>(k)]);
    } else {
      c = p.cg[static_cast<std::size_t>(k)];
    }
    a.alpha_g[static_cast<std::size_t>(k)] = std::pow(static_cast<double>(d), -half) * c;
  }
  return a;
}

}  // namespace

AlphaProfile alphas(const DerivNormProfile& p0, const DerivNormProfile& pR, int d, double n, int L, bool refined) {
  require_orders(p0, L);
  require_orders(pR, L);
  AlphaProfile out;
  out.L = L;
  out.refined = refined;
  out.at0 = ladder(p0, p0, true, d, n, L, refined);
  out.atR = ladder(p0, pR, false, d, n, L, refined);
  return out;
}

double calA(const AlphaLadder& a, int k) {
  const std::vector<double> al(a.alpha.begin() + 1, a.alpha.end());
  return calA<double>(std::span<const double>(a.alpha_g), std::span<const double>(al), k);
}

RemainderCertificate certificate(const DerivNormProfile& p0, const DerivNormProfile& pR, int d, double n, int L,
                                 double R, bool strict, bool refined) {
  const ExpansionSetup setup(d, n, R, strict);
  RemainderCertificate c;
  c.L = L;
  c.d = d;
  c.n = n;
  c.R = R;
  c.epsilon = setup.epsilon;
  c.profile0 = p0;
  c.profileR = pR;
  c.alpha = alphas(p0, pR, d, n, L, refined);
  for (int k = 0; k <= 2 * L; ++k) {
    c.calA0.push_back(calA(c.alpha.at0, k));
    c.calAR.push_back(calA(c.alpha.atR, k));
  }
  const double eps = c.epsilon;
  const double c3 = pR.c[3], c4 = pR.c[4];
  c.exponent_factor = std::exp((std::pow(R, 4) * c3 * c3 + c4) * eps * eps);
  c.kappa_kernel = c.exponent_factor * c.calAR[static_cast<std::size_t>(2 * L)] * std::pow(eps, 2 * L);
  double head = 0.0;
  for (int k = 0; k < 2 * L; ++k) head = std::max(head, c.calA0[static_cast<std::size_t>(k)] * std::pow(eps, k));
  c.tauL_kernel = head * std::exp(-(R - 1.0) * (R - 1.0) * d / 4.0);
  c.tauUc_bound = tau_uc_bound(d, R);
  double comb = 1.0;
  for (int k = 0; k <= 2 * L; ++k) comb = std::max(comb, c.calA0[static_cast<std::size_t>(k)] * std::pow(eps, k));
  c.combined_kernel = comb * std::pow(eps, 4 * L);
  c.constants_tracked = false;
  return c;
}

GrowthReport check_growth_conditions(const DerivNormProfile& p0, const DerivNormProfile& pR, int d, double n, int L,
                                     double tau, double R) {
  require_orders(p0, L);
  require_orders(pR, L);
  GrowthReport g;
  const double eps = d / std::sqrt(n);
  const double dd = d;
  g.tau_eps = tau * eps;
  const double lg = std::log(n / (dd * dd));
  g.tau_eps_threshold = lg > 0.0 ? std::min(dd * dd / (lg * lg), 1.0) : 1.0;
  g.tau_eps_ok = g.tau_eps <= g.tau_eps_threshold;
  auto add = [&](const std::string& name, int k, double value, double threshold) {
    GrowthCheck c{name, k, value, threshold, threshold - value, value <= threshold};
    g.checks.push_back(c);
    if (!c.pass) g.violations.push_back(c);
  };
  for (int k = 1; k <= 2 * L - 1; k += 2)
    add("ckg-0", k, p0.cg[static_cast<std::size_t>(k)], std::pow(dd, (k + 1) / 2.0) * std::pow(tau, k));
  for (int k = 3; k <= 2 * L + 1; k += 2)
    add("ck-0", k, p0.c[static_cast<std::size_t>(k)], std::pow(dd, (k + 1) / 2.0 - 2.0) * std::pow(tau, k - 2));
  for (int k = 0; k <= 2 * L; k += 2)
    add("ckg-ev-R", k, pR.cg[static_cast<std::size_t>(k)], std::pow(dd, k / 2.0) * std::pow(tau, k));
  for (int k = 4; k <= 2 * L + 2; k += 2)
    add("ck-ev-R", k, pR.c[static_cast<std::size_t>(k)], std::pow(dd, k / 2.0 - 2.0) * std::pow(tau, k - 2));
  g.ok = g.tau_eps_ok && g.violations.empty();
  const AlphaProfile a = alphas(p0, pR, d, n, L, false);
  for (int j = 0; j <= 2 * L; ++j) g.calA_scaled.push_back(calA(a.atR, j) * std::pow(tau, -j));
  g.exponent_quantity = (std::pow(R, 4) * pR.c[3] * pR.c[3] + pR.c[4]) * eps * eps;
  return g;
}

ChaosReport chaos_moment_check(const SymTensor& t, int q, std::size_t samples, std::uint64_t seed, int threads,
                               double known_norm) {
  if (q < 2 || q % 2) throw std::invalid_argument("chaos moment order q must be even and positive");
  if (samples < 2) throw std::invalid_argument("chaos moment check needs samples");
  const MonomialForm poly(t);
  const int d = t.dim();
  const int k = t.order();
  constexpr std::size_t kChunk = 16384;
  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  auto parts = run_chunks<MeanAccumulator>(chunks, threads, [&](std::size_t c) {
    PhiloxStream rng(seed, c);
    MeanAccumulator acc;
    std::vector<double> z(static_cast<std::size_t>(d));
    const std::size_t m = std::min(kChunk, samples - c * kChunk);
    for (std::size_t i = 0; i < m; ++i) {
      for (double& v : z) v = rng.normal();
      acc.add(std::pow(poly.evaluate(z), q));
    }
    return acc;
  });
  MeanAccumulator total;
  for (const auto& p : parts) total.merge(p);
  ChaosReport r;
  r.empirical = std::pow(total.mean, 1.0 / q);
  // Delta method for the q-th root.
  r.stderr_ = total.mean > 0.0 ? r.empirical * total.stderr_of_mean() / (q * total.mean) : 0.0;
  r.norm = known_norm >= 0.0 ? known_norm : operator_norm(t);
  r.bound_shape = r.norm * std::pow(static_cast<double>(d), k % 2 ? (k - 1) / 2.0 : k / 2.0);
  r.ratio = r.bound_shape > 0.0 ? r.empirical / r.bound_shape : 0.0;
  return r;
}

Json profile_to_json(const DerivNormProfile& p) {
  return Json{{"r", p.r}, {"c", p.c}, {"cg", p.cg}, {"method", p.method}};
}

Json certificate_to_json(const RemainderCertificate& c) {
  auto ladder_json = [](const AlphaLadder& a) {
    return Json{{"cbar", a.cbar}, {"cbar_g", a.cbar_g}, {"alpha", a.alpha}, {"alpha_g", a.alpha_g}};
  };
  return Json{{"L", c.L},
              {"d", c.d},
              {"n", c.n},
              {"epsilon", c.epsilon},
              {"R", c.R},
              {"kappa_kernel", c.kappa_kernel},
              {"tauL_kernel", c.tauL_kernel},
              {"tauUc_bound", c.tauUc_bound},
              {"combined_kernel", c.combined_kernel},
              {"exponent_factor", c.exponent_factor},
              {"calA0", c.calA0},
              {"calAR", c.calAR},
              {"alpha", Json{{"refined", c.alpha.refined}, {"at0", ladder_json(c.alpha.at0)}, {"atR", ladder_json(c.alpha.atR)}}},
              {"profile0", profile_to_json(c.profile0)},
              {"profileR", profile_to_json(c.profileR)},
              {"constants_tracked", c.constants_tracked}};
}

Json growth_to_json(const GrowthReport& g) {
  auto list = [](const std::vector<GrowthCheck>& v) {
    Json out = Json::array();
    for (const auto& c : v)
      out.push_back(Json{{"ladder", c.ladder}, {"k", c.k}, {"value", c.value}, {"threshold", c.threshold},
                         {"margin", c.margin}, {"pass", c.pass}});
    return out;
  };
  return Json{{"ok", g.ok},
              {"tau_eps", g.tau_eps},
              {"tau_eps_threshold", g.tau_eps_threshold},
              {"tau_eps_ok", g.tau_eps_ok},
              {"checks", list(g.checks)},
              {"violations", list(g.violations)},
              {"calA_scaled", g.calA_scaled},
              {"exponent_quantity", g.exponent_quantity}};
}

}  // namespace laplace
