#include "laplace/oracle.hpp"

#include "laplace/cubature.hpp"
#include "laplace/forms.hpp"
#include "laplace/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace laplace {

OracleMode parse_oracle_mode(const std::string& s) {
  if (s == "auto") return OracleMode::automatic;
  if (s == "deterministic") return OracleMode::deterministic;
  if (s == "mc") return OracleMode::mc;
  throw std::invalid_argument("unknown oracle mode '" + s + "' (expected auto, deterministic or mc)");
}

std::string oracle_mode_name(OracleMode m) {
  switch (m) {
    case OracleMode::automatic:
      return "auto";
    case OracleMode::deterministic:
      return "deterministic";
    case OracleMode::mc:
      return "mc";
  }
  return "auto";
}

double gamma_tail_bound(double c, double lambda) {
  if (!(lambda > c)) return std::numeric_limits<double>::infinity();
  // log of e^{-lambda s} (c/(1-s))^c with 1 - s = c/lambda
  return std::exp(-(lambda - c) + c * std::log(lambda));
}

double envelope_tail_bound(int d, double B) {
  const double dd = d;
  const double log_sphere = std::log(2.0) + 0.5 * dd * std::log(std::numbers::pi) - std::lgamma(dd / 2.0);
  const double log_pref = -0.5 * dd * std::log(2.0 * std::numbers::pi) + log_sphere + dd * std::log(4.0 / std::sqrt(dd));
  const double g = gamma_tail_bound(dd, std::sqrt(dd) * B / 4.0);
  return std::isfinite(g) ? std::exp(log_pref) * g : g;
}

namespace {

// y -> (2 pi)^{-d/2} g(x) e^{-n(u(x) - u0)} with x = x0 + H^{-1/2} y / sqrt n.
class StandardizedIntegrand {
 public:
  explicit StandardizedIntegrand(const ProblemSpec& p) : p_(p), m_(p.H.inv_sqrt() / std::sqrt(p.n)) {
    if (!p.u || !p.g) throw std::invalid_argument("oracle needs evaluators for u and g");
    u0_ = p.u(std::span<const double>(p.x0.data(), static_cast<std::size_t>(p.d)));
    if (!std::isfinite(u0_)) throw std::domain_error("u(x0) is not finite");
  }

  // g e^{-n(u-u0)}; out-of-domain points contribute 0.
  double weight(std::span<const double> y, Eigen::VectorXd& x) const {
    const Eigen::Map<const Eigen::VectorXd> yy(y.data(), static_cast<Eigen::Index>(y.size()));
    x.noalias() = p_.x0 + m_ * yy;
    const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
    const double du = p_.u(xs) - u0_;
    if (!std::isfinite(du)) return 0.0;
    const double e = std::exp(-p_.n * du);
    if (e == 0.0) return 0.0;
    const double v = p_.g(xs) * e;
    return std::isfinite(v) ? v : 0.0;
  }

 private:
  const ProblemSpec& p_;
  Eigen::MatrixXd m_;
  double u0_ = 0.0;
};

OracleResult deterministic(const ProblemSpec& p, const OracleOptions& opt) {
  if (p.d > 4) throw std::invalid_argument("deterministic oracle is limited to d <= 4; use mode mc");
  const StandardizedIntegrand f(p);
  const double norm = std::pow(2.0 * std::numbers::pi, -0.5 * p.d);
  OracleResult out;
  if (p.d == 1) {
    Eigen::VectorXd x(1);
    auto h = [&](double y) { return norm * f.weight(std::span<const double>(&y, 1), x); };
    const CubatureResult r = gauss_kronrod_1d(h, -std::numeric_limits<double>::infinity(),
                                              std::numeric_limits<double>::infinity(), std::min(opt.tol, 1e-10));
    out.value = r.value;
    out.error = r.error;
    out.method = "gauss-kronrod";
    out.budget_spent = r.evaluations;
    out.box = std::numeric_limits<double>::infinity();
    out.converged = r.converged;
    if (!r.converged) out.warnings.push_back("Gauss-Kronrod error estimate above tolerance");
    return out;
  }
  const double sd = std::sqrt(static_cast<double>(p.d));
  double B;
  if (p.envelope) {
    B = opt.envelope_radius * sd;
    while (!(envelope_tail_bound(p.d, B) <= opt.tol / 2.0)) B *= 1.05;
    out.tail_bound = envelope_tail_bound(p.d, B);
  } else {
    B = sd + std::sqrt(2.0 * std::log(2.0 / opt.tol)) + 2.0;
    out.heuristic_tail = true;
    out.tail_bound = std::numeric_limits<double>::quiet_NaN();
    out.warnings.push_back("envelope not asserted: exterior of the box is neglected without a certificate");
  }
  Eigen::VectorXd x(p.d);
  auto h = [&](std::span<const double> y) { return norm * f.weight(y, x); };
  const Eigen::VectorXd hi = Eigen::VectorXd::Constant(p.d, B);
  const CubatureResult r = genz_malik(h, -hi, hi, opt.tol / 2.0, 0.0, opt.max_eval);
  out.value = r.value;
  out.error = r.error + (out.heuristic_tail ? 0.0 : out.tail_bound);
  out.method = "genz-malik";
  out.budget_spent = r.evaluations;
  out.box = B;
  out.converged = r.converged && out.error <= opt.tol;
  if (!r.converged) out.warnings.push_back("evaluation budget exhausted before tolerance");
  return out;
}

OracleResult monte_carlo(const ProblemSpec& p, const OracleOptions& opt) {
  if (p.d > 40) throw std::invalid_argument("MC oracle is limited to d <= 40");
  if (opt.budget < 4) throw std::invalid_argument("MC budget must be at least 4 samples");
  const StandardizedIntegrand f(p);
  constexpr std::size_t kChunk = 8192;
  const std::size_t draws = opt.antithetic ? opt.budget / 2 : opt.budget;
  const std::size_t chunks = (draws + kChunk - 1) / kChunk;
  const int d = p.d;
  auto work = [&](std::size_t c) {
    PhiloxStream rng(opt.seed, c);
    MeanAccumulator acc;
    Eigen::VectorXd z(d), x(d);
    const std::size_t end = std::min(draws, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      for (int j = 0; j < d; ++j) z[j] = rng.normal();
      const double half_sq = 0.5 * z.squaredNorm();
      // importance ratio against the standard Gaussian proposal
      auto ratio = [&]() {
        const double w = f.weight(std::span<const double>(z.data(), static_cast<std::size_t>(d)), x);
        return w == 0.0 ? 0.0 : w * std::exp(half_sq);
      };
      double v = ratio();
      if (opt.antithetic) {
        z = -z;
        v = 0.5 * (v + ratio());
      }
      acc.add(v);
    }
    return acc;
  };
  const auto parts = run_chunks<MeanAccumulator>(chunks, opt.threads, work);
  MeanAccumulator total;
  for (const auto& a : parts) total.merge(a);
  OracleResult out;
  out.value = total.mean;
  out.error = total.stderr_of_mean();
  out.method = "mc";
  out.budget_spent = opt.antithetic ? 2 * total.count : total.count;
  out.box = std::numeric_limits<double>::infinity();
  out.tail_bound = 0.0;
  out.converged = std::isfinite(out.value) && std::isfinite(out.error);
  return out;
}

}  // namespace

OracleResult integrate_reference(const ProblemSpec& p, const OracleOptions& opt) {
  if (!(opt.tol > 0.0)) throw std::invalid_argument("oracle tolerance must be positive");
  OracleMode mode = opt.mode;
  if (mode == OracleMode::automatic) mode = p.d <= 3 ? OracleMode::deterministic : OracleMode::mc;
  return mode == OracleMode::deterministic ? deterministic(p, opt) : monte_carlo(p, opt);
}

TrueRemainder true_remainder(double g0, int L, const OracleResult& oracle, const std::vector<double>& terms) {
  if (L < 1) throw std::invalid_argument("L must be at least 1");
  if (static_cast<int>(terms.size()) < L - 1)
    throw std::invalid_argument("true_remainder needs the terms A_2k n^-k for k < L");
  TrueRemainder t;
  t.L = L;
  t.integral = oracle.value;
  t.partial_sum = g0;
  for (int k = 1; k < L; ++k) t.partial_sum += terms[static_cast<std::size_t>(k - 1)];
  t.rem = oracle.value - t.partial_sum;
  const double half = oracle.half_width();
  t.lo = t.rem - half;
  t.hi = t.rem + half;
  t.inconclusive = !(half <= 0.25 * std::abs(t.rem)) || !oracle.converged;
  return t;
}

TrueRemainder true_remainder(const ProblemSpec& p, int L, const OracleResult& oracle, const std::vector<double>& terms) {
  const double g0 = p.g(std::span<const double>(p.x0.data(), static_cast<std::size_t>(p.d)));
  return true_remainder(g0, L, oracle, terms);
}

RestrictedExpReport restricted_exp_check(const SymTensor& T3, int d, double n, double R, std::size_t samples,
                                         std::uint64_t seed, int threads, double known_norm) {
  if (T3.order() != 3 || T3.dim() != d) throw std::invalid_argument("restricted_exp_check needs an order-3 tensor on R^d");
  if (!(n > 0.0) || !(R > 0.0) || samples < 2) throw std::invalid_argument("restricted_exp_check: bad n, R or samples");
  RestrictedExpReport rep;
  rep.d = d;
  rep.n = n;
  rep.R = R;
  rep.tensor_norm = known_norm >= 0.0 ? known_norm : operator_norm(T3);
  const double rad = R * std::sqrt(static_cast<double>(d));
  const double sq_n = std::sqrt(n);
  const double grad_sup = rad * rad * rep.tensor_norm / (2.0 * sq_n);
  rep.gradient_bound = std::exp(grad_sup * grad_sup);
  rep.naive_bound = std::exp(rad * rad * rad * rep.tensor_norm / (6.0 * sq_n));

  const MonomialForm form(T3);
  constexpr std::size_t kChunk = 16384;
  const std::size_t pairs = samples / 2;
  const std::size_t chunks = (pairs + kChunk - 1) / kChunk;
  auto work = [&](std::size_t c) {
    PhiloxStream rng(seed, 0x3e000 + c);
    MeanAccumulator acc;
    std::vector<double> z(static_cast<std::size_t>(d));
    const std::size_t end = std::min(pairs, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      double s = 0.0;
      for (auto& v : z) {
        v = rng.normal();
        s += v * v;
      }
      if (s >= rad * rad) {
        acc.add(0.0);
        continue;
      }
      // r is odd, so the pair (z, -z) contributes cosh(2 r)
      const double r = form.evaluate(z) / (6.0 * sq_n);
      acc.add(std::cosh(2.0 * r));
    }
    return acc;
  };
  const auto parts = run_chunks<MeanAccumulator>(chunks, threads, work);
  MeanAccumulator total;
  for (const auto& a : parts) total.merge(a);
  rep.empirical = std::sqrt(total.mean);
  rep.empirical_stderr = rep.empirical > 0.0 ? total.stderr_of_mean() / (2.0 * rep.empirical) : 0.0;
  rep.gradient_smaller = rep.gradient_bound < rep.naive_bound;
  rep.bound_holds = rep.empirical <= rep.gradient_bound;
  return rep;
}

}  // namespace laplace
