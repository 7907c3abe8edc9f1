#include "laplace/problem.hpp"
#include "laplace/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace laplace {

LocalJet to_double(const ExactLocalJet& j) {
  LocalJet out;
  for (const auto& t : j.fjet) out.fjet.push_back(to_double(t));
  for (const auto& t : j.vjet) out.vjet.push_back(to_double(t));
  return out;
}

ExpansionSetup::ExpansionSetup(int d_, double n_, double R_, bool strict) : d(d_), n(n_), R(R_) {
  if (d < 1 || !(n > 0.0)) throw std::invalid_argument("expansion setup needs d >= 1 and n > 0");
  if (strict && R < 40.0) throw std::invalid_argument("radius R must be at least 40 when the hypotheses are asserted");
  epsilon = d / std::sqrt(n);
}

bool ExpansionSetup::in_region(std::span<const double> y) const {
  double s = 0.0;
  for (double v : y) s += v * v;
  return s < R * R * d;
}

namespace {

double default_step(int k) { return std::pow(1e-16, 1.0 / (k + 2)); }

double checked(double v) {
  if (!std::isfinite(v)) throw std::domain_error("non-finite evaluation in finite differences");
  return v;
}

}  // namespace

SymTensor finite_difference_tensor(const Evaluator& f, const Eigen::VectorXd& x, int k, double step) {
  const int d = static_cast<int>(x.size());
  const double h = step > 0.0 ? step : default_step(k);
  SymTensor out(k, d);
  std::size_t idx = 0;
  std::vector<double> pt(static_cast<std::size_t>(d));
  out.for_each([&](std::span<const int> a, double) {
    // Tensor product of 1-d central stencils sum_j (-1)^j C(a,j) f(x + (a/2 - j) h).
    std::vector<int> j(static_cast<std::size_t>(d), 0);
    double acc = 0.0;
    while (true) {
      double w = 1.0;
      for (int i = 0; i < d; ++i) {
        const int ai = a[static_cast<std::size_t>(i)];
        const int ji = j[static_cast<std::size_t>(i)];
        w *= ((ji % 2) ? -1.0 : 1.0) * static_cast<double>(binomial(ai, ji));
        pt[static_cast<std::size_t>(i)] = x[i] + (ai / 2.0 - ji) * h;
      }
      acc += w * checked(f(pt));
      int i = d - 1;
      while (i >= 0 && ++j[static_cast<std::size_t>(i)] > a[static_cast<std::size_t>(i)]) j[static_cast<std::size_t>(i--)] = 0;
      if (i < 0) break;
    }
    out.values()[idx++] = acc / std::pow(h, k);
  });
  return out;
}

std::vector<SymTensor> jet_from_finite_differences(const Evaluator& f, const Eigen::VectorXd& x0, int k_max,
                                                   double step) {
  if (k_max > 6) throw std::invalid_argument("finite-difference jets are limited to order 6");
  std::vector<SymTensor> out;
  for (int k = 0; k <= k_max; ++k) out.push_back(finite_difference_tensor(f, x0, k, step));
  return out;
}

std::shared_ptr<const SymmetricForm> derivative_form(const ProblemSpec& p, bool of_g, const Eigen::VectorXd& x, int k) {
  const DerivativeProvider& prov = of_g ? p.g_deriv : p.u_deriv;
  const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
  if (prov) return prov(xs, k);
  if (k > 6) throw std::invalid_argument("no analytic derivatives supplied and order " + std::to_string(k) +
                                         " exceeds the finite-difference limit of 6");
  const Evaluator& f = of_g ? p.g : p.u;
  if (!f) throw std::invalid_argument("problem has no evaluator for " + std::string(of_g ? "g" : "u"));
  return std::make_shared<TensorForm>(finite_difference_tensor(f, x, k));
}

SymTensor derivative_tensor(const ProblemSpec& p, bool of_g, const Eigen::VectorXd& x, int k) {
  return derivative_form(p, of_g, x, k)->materialize();
}

Eigen::VectorXd gradient_at(const ProblemSpec& p, const Eigen::VectorXd& x) {
  const SymTensor t = derivative_tensor(p, false, x, 1);
  Eigen::VectorXd g(p.d);
  for (int i = 0; i < p.d; ++i) g[i] = t.values()[static_cast<std::size_t>(i)];
  return g;
}

Eigen::MatrixXd hessian_at(const ProblemSpec& p, const Eigen::VectorXd& x) {
  const SymTensor t = derivative_tensor(p, false, x, 2);
  Eigen::MatrixXd h(p.d, p.d);
  for (int i = 0; i < p.d; ++i)
    for (int j = 0; j < p.d; ++j) h(i, j) = t({i, j});
  return h;
}

LocalJet standardize(const ProblemSpec& p) { return standardize(p, 2 * p.L, 2 * p.L + 2); }

LocalJet standardize(const ProblemSpec& p, int f_order, int v_order) {
  if (p.H.dim() != p.d || p.x0.size() != p.d) throw std::invalid_argument("problem dimension mismatch");
  const Eigen::VectorXd grad = gradient_at(p, p.x0);
  const Eigen::MatrixXd hess = hessian_at(p, p.x0);
  const double hnorm = hess.norm();
  if (grad.norm() > 1e-8 * std::max(1.0, hnorm))
    throw std::invalid_argument("x0 is not a critical point of u (gradient norm " + std::to_string(grad.norm()) + ")");
  const Eigen::MatrixXd std_hess = p.H.inv_sqrt() * hess * p.H.inv_sqrt();
  const double dev = (std_hess - Eigen::MatrixXd::Identity(p.d, p.d)).cwiseAbs().maxCoeff();
  if (p.u_deriv ? dev > 1e-8 : dev > 1e-4)
    throw std::invalid_argument("H does not match the Hessian of u at x0 (deviation " + std::to_string(dev) + ")");
  LocalJet jet;
  for (int k = 0; k <= f_order; ++k) jet.fjet.push_back(pushforward_jet(derivative_tensor(p, true, p.x0, k), p.H));
  for (int k = 3; k <= v_order; ++k) jet.vjet.push_back(pushforward_jet(derivative_tensor(p, false, p.x0, k), p.H));
  return jet;
}

Eigen::VectorXd refine_minimizer(const ProblemSpec& p, Eigen::VectorXd x, double tol, int max_iter) {
  auto eval_u = [&](const Eigen::VectorXd& y) {
    return p.u(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
  };
  double fx = eval_u(x);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd g = gradient_at(p, x);
    const Eigen::MatrixXd h = hessian_at(p, x);
    if (g.norm() <= tol * std::max(1.0, h.norm())) return x;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    Eigen::VectorXd step = ldlt.solve(g);
    if (ldlt.info() != Eigen::Success || !(step.dot(g) > 0.0)) step = g;
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd cand = x - t * step;
      const double fc = eval_u(cand);
      if (std::isfinite(fc) && fc <= fx - 1e-4 * t * step.dot(g)) {
        x = cand;
        fx = fc;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      // Pure Newton step once the objective is flat to rounding.
      const Eigen::VectorXd cand = x - step;
      if (gradient_at(p, cand).norm() < g.norm()) {
        x = cand;
        fx = eval_u(x);
      } else {
        return x;
      }
    }
  }
  return x;
}

BallSup ball_sup_norm(const ProblemSpec& p, bool of_g, int k, double radius, const BallSupOptions& opt) {
  const int d = p.d;
  BallSup out;
  auto norm_at = [&](const Eigen::VectorXd& x, AscentOptions a) {
    if (!opt.weighted) return operator_norm_form(derivative_form(p, of_g, x, k), WeightMatrix::identity(d), a);
    return operator_norm_form(derivative_form(p, of_g, x, k), p.H, a);
  };
  const AscentResult at0 = norm_at(p.x0, opt.ascent);
  out.value = at0.value;
  out.where = p.x0;
  out.visited.push_back(p.x0);
  if (radius <= 0.0) return out;

  AscentOptions quick = opt.ascent;
  quick.starts = opt.ball_starts;
  if (at0.argmax.size() == d) quick.warm = {at0.argmax};

  auto consider = [&](const Eigen::VectorXd& x) {
    const AscentResult r = norm_at(x, quick);
    out.visited.push_back(x);
    if (r.value > out.value) {
      out.value = r.value;
      out.where = x;
    }
    return r.value;
  };
  for (const auto& x : opt.extra_points) {
    if (x.size() == d && p.H.norm(x - p.x0) <= radius * (1.0 + 1e-12) && !x.isApprox(p.x0, 0.0)) consider(x);
  }
  PhiloxStream rng(opt.seed, static_cast<std::uint64_t>(k) + (of_g ? 1000u : 0u));
  auto random_offset = [&](bool boundary) {
    Eigen::VectorXd w(d);
    for (int i = 0; i < d; ++i) w[i] = rng.normal();
    w.normalize();
    const double rho = boundary ? radius : radius * std::pow(rng.uniform(), 1.0 / d);
    return Eigen::VectorXd(p.H.inv_sqrt() * (rho * w));
  };
  for (int i = 0; i < opt.points; ++i) consider(p.x0 + random_offset(i % 2 == 0));
  // Local polish around the incumbent, staying inside the ball.
  double scale = 0.25;
  for (int round = 0; round < opt.polish_rounds; ++round) {
    Eigen::VectorXd cand = out.where + scale * random_offset(true);
    const double nr = p.H.norm(cand - p.x0);
    if (nr > radius) cand = p.x0 + (cand - p.x0) * (radius / nr);
    const double before = out.value;
    consider(cand);
    if (out.value <= before) scale *= 0.7;
  }
  return out;
}

double tail_coefficient(double r, double c3, int d, double n) {
  return r / 2.0 - r * r * c3 * std::sqrt(d / n) / 6.0;
}

TailCheck check_tail_condition(const ProblemSpec& p, double r, const BallSupOptions& opt) {
  TailCheck t;
  t.c3 = ball_sup_norm(p, false, 3, r * std::sqrt(p.d / p.n), opt).value;
  if (!std::isfinite(t.c3)) throw std::runtime_error("third-derivative norm estimate failed");
  t.coefficient = tail_coefficient(r, t.c3, p.d, p.n);
  t.margin = t.coefficient - 1.0 / 3.0;
  t.satisfied = t.margin >= -1e-15;
  return t;
}

}  // namespace laplace
