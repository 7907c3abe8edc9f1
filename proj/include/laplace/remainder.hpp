#pragma once

#include "laplace/bell.hpp"
#include "laplace/json_io.hpp"
#include "laplace/problem.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace laplace {

// R = 20 max((L/d) ln(n/d^2), 2)
double radius_default(int d, double n, int L);

// Sup derivative norms over ||y||_H <= r sqrt(d/n).
struct DerivNormProfile {
  double r = 0.0;
  std::vector<double> c;   // c[k], k = 0..2L+2; entries below 3 are unused
  std::vector<double> cg;  // cg[k], k = 0..2L
  std::string method = "sampled";
  std::vector<Eigen::VectorXd> witnesses;
};

struct DerivNormOptions {
  BallSupOptions ball{};
};

// r = 0 evaluates at x0; r > 0 samples the ball. With `inner` (a smaller radius), its points
// and values are folded in so the profile is monotone in r.
DerivNormProfile deriv_norms(const ProblemSpec& p, double r, int L, const DerivNormOptions& opt = {},
                             const DerivNormProfile* inner = nullptr);

// r = 0 profile read off standardized jets (H = I).
DerivNormProfile jet_profile(const LocalJet& jet, int L, const AscentOptions& opt = {});

struct AlphaLadder {
  std::vector<double> cbar;     // index k
  std::vector<double> cbar_g;   // index k
  std::vector<double> alpha;    // alpha[k], k = 1..2L (alpha[0] unused)
  std::vector<double> alpha_g;  // alpha_g[k], k = 0..2L
};

struct AlphaProfile {
  int L = 1;
  bool refined = false;
  AlphaLadder at0;
  AlphaLadder atR;
};

AlphaProfile alphas(const DerivNormProfile& p0, const DerivNormProfile& pR, int d, double n, int L, bool refined = false);

// sum_{l=0..k} alpha_g[k-l] B_l(alpha_1..alpha_l); alpha[0] holds alpha_1.
template <Scalar S>
S calA(std::span<const S> alpha_g, std::span<const S> alpha, int k) {
  if (static_cast<int>(alpha_g.size()) <= k || static_cast<int>(alpha.size()) < k)
    throw std::invalid_argument("calA: missing alpha orders");
  const std::vector<S> b = bell_table<S>(k, alpha);
  S sum = S(0);
  for (int l = 0; l <= k; ++l) sum += alpha_g[static_cast<std::size_t>(k - l)] * b[static_cast<std::size_t>(l)];
  return sum;
}

double calA(const AlphaLadder& a, int k);

struct RemainderCertificate {
  int L = 1;
  int d = 1;
  double n = 1.0;
  double epsilon = 0.0;
  double R = 40.0;
  double kappa_kernel = 0.0;
  double tauL_kernel = 0.0;
  double tauUc_bound = 0.0;
  double combined_kernel = 0.0;  // (1 v max_k calA_k(0) eps^k) eps^{4L}
  double exponent_factor = 1.0;
  std::vector<double> calA0;
  std::vector<double> calAR;
  AlphaProfile alpha;
  DerivNormProfile profile0;
  DerivNormProfile profileR;
  bool constants_tracked = false;
};

RemainderCertificate certificate(const DerivNormProfile& p0, const DerivNormProfile& pR, int d, double n, int L,
                                 double R, bool strict = false, bool refined = false);

double tau_uc_bound(int d, double R);

struct GrowthCheck {
  std::string ladder;
  int k = 0;
  double value = 0.0;
  double threshold = 0.0;
  double margin = 0.0;
  bool pass = true;
};

struct GrowthReport {
  bool ok = true;
  bool tau_eps_ok = true;
  double tau_eps = 0.0;
  double tau_eps_threshold = 0.0;
  std::vector<GrowthCheck> checks;
  std::vector<GrowthCheck> violations;
  std::vector<double> calA_scaled;  // calA_j(R) tau^{-j}
  double exponent_quantity = 0.0;   // (R^4 c3(R)^2 + c4(R)) eps^2
};

// Growth ladders with unit implied constants.
GrowthReport check_growth_conditions(const DerivNormProfile& p0, const DerivNormProfile& pR, int d, double n, int L,
                                     double tau, double R);

struct ChaosReport {
  double empirical = 0.0;
  double stderr_ = 0.0;
  double norm = 0.0;
  double bound_shape = 0.0;
  double ratio = 0.0;
};

// E[<T, Z^k>^q]^{1/q} against ||T|| d^{(k-1)/2} (odd k) or ||T|| d^{k/2} (even k).
ChaosReport chaos_moment_check(const SymTensor& t, int q, std::size_t samples, std::uint64_t seed, int threads = 0,
                               double known_norm = -1.0);

Json profile_to_json(const DerivNormProfile& p);
Json certificate_to_json(const RemainderCertificate& c);
Json growth_to_json(const GrowthReport& g);

}  // namespace laplace
