#include "laplace/glm.hpp"
#include "laplace/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace laplace {

LinkKind parse_link(const std::string& name) {
  if (name == "logistic") return LinkKind::logistic;
  if (name == "quadratic") return LinkKind::quadratic;
  throw std::invalid_argument("unknown link '" + name + "' (expected logistic or quadratic)");
}

std::string link_name(LinkKind link) { return link == LinkKind::logistic ? "logistic" : "quadratic"; }

std::vector<double> logistic_derivs(double t, int k_max) {
  constexpr int kMax = 14;
  if (k_max < 0 || k_max > kMax) throw std::invalid_argument("logistic_derivs supports 0 <= k_max <= 14");
  std::vector<double> out(static_cast<std::size_t>(k_max) + 1);
  out[0] = t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
  if (k_max == 0) return out;
  const double sig = 1.0 / (1.0 + std::exp(-t));
  const double bar = 1.0 / (1.0 + std::exp(t));
  // phi^{(k)} = sum c[a][b] sig^a bar^b, with d(sig^a bar^b) = a sig^a bar^{b+1} - b sig^{a+1} bar^b.
  std::array<std::array<double, kMax + 2>, kMax + 2> c{};
  std::array<double, kMax + 2> ps{}, pb{};
  ps[0] = pb[0] = 1.0;
  for (int i = 1; i < kMax + 2; ++i) {
    ps[i] = ps[i - 1] * sig;
    pb[i] = pb[i - 1] * bar;
  }
  c[1][0] = 1.0;
  for (int k = 1; k <= k_max; ++k) {
    double v = 0.0;
    for (int a = 0; a <= k; ++a)
      for (int b = 0; a + b <= k; ++b)
        if (c[a][b] != 0.0) v += c[a][b] * ps[a] * pb[b];
    out[static_cast<std::size_t>(k)] = v;
    if (k == k_max) break;
    std::array<std::array<double, kMax + 2>, kMax + 2> next{};
    for (int a = 0; a <= k; ++a)
      for (int b = 0; a + b <= k; ++b) {
        if (c[a][b] == 0.0) continue;
        next[a][b + 1] += a * c[a][b];
        next[a + 1][b] -= b * c[a][b];
      }
    c = next;
  }
  return out;
}

std::vector<double> quadratic_link_derivs(double t, int k_max) {
  std::vector<double> out(static_cast<std::size_t>(k_max) + 1, 0.0);
  out[0] = t * t / 2.0;
  if (k_max >= 1) out[1] = t;
  if (k_max >= 2) out[2] = 1.0;
  return out;
}

std::vector<double> link_derivs(LinkKind link, double t, int k_max) {
  return link == LinkKind::logistic ? logistic_derivs(t, k_max) : quadratic_link_derivs(t, k_max);
}

Eigen::MatrixXd sample_design(int n, int d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw std::invalid_argument("sample_design needs n, d >= 1");
  PhiloxStream rng(seed, 0xd5);
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
  return x;
}

Eigen::VectorXd sample_unit_vector(int d, std::uint64_t seed) {
  PhiloxStream rng(seed, 0x0c);
  Eigen::VectorXd v(d);
  do {
    for (int j = 0; j < d; ++j) v[j] = rng.normal();
  } while (v.norm() == 0.0);
  return v.normalized();
}

namespace {

struct Moments {
  Eigen::VectorXd b;
  Eigen::MatrixXd h;
};

Moments first_two(const Eigen::MatrixXd& X, const Eigen::VectorXd& x0, LinkKind link) {
  const int n = static_cast<int>(X.rows());
  Moments m{Eigen::VectorXd::Zero(X.cols()), Eigen::MatrixXd::Zero(X.cols(), X.cols())};
  const Eigen::VectorXd t = X * x0;
  Eigen::VectorXd w1(n), w2(n);
  for (int i = 0; i < n; ++i) {
    const auto phi = link_derivs(link, t[i], 2);
    w1[i] = phi[1] / n;
    w2[i] = phi[2] / n;
  }
  m.b = X.transpose() * w1;
  m.h = X.transpose() * w2.asDiagonal() * X;
  m.h = 0.5 * (m.h + m.h.transpose());
  return m;
}

}  // namespace

GlmInstance make_glm_instance(Eigen::MatrixXd X, Eigen::VectorXd x0, LinkKind link, std::uint64_t seed) {
  if (X.cols() != x0.size()) throw std::invalid_argument("design and x0 dimensions differ");
  GlmInstance inst;
  inst.link = link;
  inst.seed = seed;
  const Moments m = first_two(X, x0, link);
  const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m.h, Eigen::EigenvaluesOnly).eigenvalues()[0];
  if (!(lmin > 1e-12 * std::max(1.0, m.h.norm())))
    throw std::domain_error("GLM Hessian is not positive definite (smallest eigenvalue " + std::to_string(lmin) + ")");
  inst.X = std::move(X);
  inst.x0 = std::move(x0);
  inst.b = m.b;
  inst.H = WeightMatrix(m.h);
  return inst;
}

GlmInstance make_glm_instance(int n, int d, std::uint64_t seed, LinkKind link) {
  return make_glm_instance(sample_design(n, d, seed), sample_unit_vector(d, seed), link, seed);
}

double glm_hessian_min_eigenvalue(int n, int d, std::uint64_t seed, LinkKind link) {
  const Moments m = first_two(sample_design(n, d, seed), sample_unit_vector(d, seed), link);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m.h, Eigen::EigenvaluesOnly).eigenvalues()[0];
}

double glm_u(const GlmInstance& inst, std::span<const double> x) {
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  thread_local Eigen::VectorXd t;
  t.noalias() = inst.X * xv;
  double s = 0.0;
  if (inst.link == LinkKind::logistic) {
    for (Eigen::Index i = 0; i < t.size(); ++i) s += std::max(t[i], 0.0) + std::log1p(std::exp(-std::abs(t[i])));
  } else {
    s = 0.5 * t.squaredNorm();
  }
  return s / inst.n() - inst.b.dot(xv);
}

GlmDerivativeForm::GlmDerivativeForm(std::shared_ptr<const GlmInstance> inst, Eigen::VectorXd x, int k)
    : inst_(std::move(inst)), k_(k) {
  if (k < 0) throw std::invalid_argument("derivative order must be non-negative");
  if (k == 0) {
    u_value_ = glm_u(*inst_, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    return;
  }
  const Eigen::VectorXd t = inst_->X * x;
  w_.resize(static_cast<std::size_t>(inst_->n()));
  for (int i = 0; i < inst_->n(); ++i)
    w_[static_cast<std::size_t>(i)] = link_derivs(inst_->link, t[i], k)[static_cast<std::size_t>(k)] / inst_->n();
}

double GlmDerivativeForm::value_and_gradient(std::span<const double> u, std::span<double> grad) const {
  const int d = inst_->d();
  std::fill(grad.begin(), grad.end(), 0.0);
  if (k_ == 0) return u_value_;
  const Eigen::Map<const Eigen::VectorXd> uv(u.data(), d);
  Eigen::Map<Eigen::VectorXd> gv(grad.data(), d);
  const Eigen::VectorXd s = inst_->X * uv;
  Eigen::VectorXd coef(inst_->n());
  double value = 0.0;
  for (int i = 0; i < inst_->n(); ++i) {
    const double p = power_of(s[i], k_ - 1);
    value += w_[static_cast<std::size_t>(i)] * p * s[i];
    coef[i] = k_ * w_[static_cast<std::size_t>(i)] * p;
  }
  gv = inst_->X.transpose() * coef;
  if (k_ == 1) {
    value -= inst_->b.dot(uv);
    gv -= inst_->b;
  }
  return value;
}

SymTensor GlmDerivativeForm::materialize() const {
  const int d = inst_->d();
  if (k_ == 0) return SymTensor::constant(d, u_value_);
  SymTensor t(k_, d);
  std::size_t idx = 0;
  t.for_each([&](std::span<const int> e, double) {
    double s = 0.0;
    for (int i = 0; i < inst_->n(); ++i) {
      double m = w_[static_cast<std::size_t>(i)];
      for (int j = 0; j < d; ++j) m *= power_of(inst_->X(i, j), e[static_cast<std::size_t>(j)]);
      s += m;
    }
    if (k_ == 1) {
      for (int j = 0; j < d; ++j)
        if (e[static_cast<std::size_t>(j)]) s -= inst_->b[j];
    }
    t.values()[idx++] = s;
  });
  return t;
}

ProblemSpec glm_potential(std::shared_ptr<const GlmInstance> inst, int L, GBuiltin g) {
  ProblemSpec p;
  p.name = "glm-" + link_name(inst->link);
  p.d = inst->d();
  p.n = inst->n();
  p.L = L;
  p.x0 = inst->x0;
  p.H = inst->H;
  p.u = [inst](std::span<const double> x) { return glm_u(*inst, x); };
  p.u_deriv = [inst](std::span<const double> x, int k) -> std::shared_ptr<const SymmetricForm> {
    return std::make_shared<GlmDerivativeForm>(inst, Eigen::Map<const Eigen::VectorXd>(x.data(), inst->d()), k);
  };
  p.envelope = false;
  attach_g(p, g);
  return p;
}

GJet g_jet(GBuiltin g, int d) {
  GJet j{1.0, Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
  if (g == GBuiltin::linear) j.grad.setConstant(1.0 / std::sqrt(static_cast<double>(d)));
  if (g == GBuiltin::quadratic) j.hess = 2.0 * Eigen::MatrixXd::Identity(d, d);
  return j;
}

double glm_a2(const GlmInstance& inst, const GJet& g) {
  const int n = inst.n();
  const Eigen::MatrixXd& Hinv = inst.H.inverse();
  const Eigen::MatrixXd HX = Hinv * inst.X.transpose();  // d x n
  const Eigen::MatrixXd t = inst.X * HX;                 // t_lm
  const Eigen::VectorXd gx = HX.transpose() * g.grad;    // grad g^T H^{-1} X_l
  const Eigen::VectorXd z = inst.X * inst.x0;
  Eigen::VectorXd p3(n), p4(n);
  for (int l = 0; l < n; ++l) {
    const auto phi = link_derivs(inst.link, z[l], 4);
    p3[l] = phi[3];
    p4[l] = phi[4];
  }
  const double trace = 0.5 * (g.hess.cwiseProduct(Hinv)).sum();
  double single3 = 0.0, single4 = 0.0;
  for (int l = 0; l < n; ++l) {
    single3 += p3[l] * gx[l] * t(l, l);
    single4 += p4[l] * t(l, l) * t(l, l);
  }
  double pair = 0.0;
  for (int l = 0; l < n; ++l) {
    if (p3[l] == 0.0) continue;
    double row = 0.0;
    for (int m = 0; m < n; ++m) {
      const double tlm = t(l, m);
      row += p3[m] * (tlm * tlm * tlm / 12.0 + tlm * t(l, l) * t(m, m) / 8.0);
    }
    pair += p3[l] * row;
  }
  const double nn = static_cast<double>(n);
  return trace - single3 / (2.0 * nn) - g.g0 * single4 / (8.0 * nn) + g.g0 * pair / (nn * nn);
}

GlmNormProfile empirical_norm_profile(std::shared_ptr<const GlmInstance> inst, int k_max, double R, int L,
                                      GBuiltin g, const BallSupOptions& opt) {
  if (k_max > 2 * L + 2) throw std::invalid_argument("k_max must not exceed 2L+2");
  const ProblemSpec p = glm_potential(inst, L, g);
  const int d = p.d;
  GlmNormProfile out;
  out.lambda_min = inst->H.min_eigenvalue();
  out.unweighted0.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  out.unweightedR = out.unweighted0;
  out.profile0.r = 0.0;
  out.profileR.r = R;
  out.profile0.method = out.profileR.method = "sampled";
  out.profile0.c.assign(static_cast<std::size_t>(2 * L + 3), 0.0);
  out.profileR.c = out.profile0.c;
  out.profile0.cg.assign(static_cast<std::size_t>(2 * L + 1), 0.0);
  out.profileR.cg = out.profile0.cg;
  const double radius = R * std::sqrt(d / p.n);
  for (int k = 0; k <= 2 * L; ++k) {
    const BallSup b0 = ball_sup_norm(p, true, k, 0.0, opt);
    const BallSup bR = ball_sup_norm(p, true, k, radius, opt);
    out.profile0.cg[static_cast<std::size_t>(k)] = b0.value;
    out.profileR.cg[static_cast<std::size_t>(k)] = std::max(b0.value, bR.value);
  }
  BallSupOptions bo = opt;
  bo.weighted = false;
  for (int k = 3; k <= k_max; ++k) {
    const GlmDerivativeForm form(inst, p.x0, k);
    const AscentResult a0 = sphere_ascent(form, opt.ascent);
    if (!a0.converged) out.stagnated = true;
    BallSup br = ball_sup_norm(p, false, k, radius, bo);
    bo.extra_points.insert(bo.extra_points.end(), br.visited.begin(), br.visited.end());
    const double scale = std::pow(out.lambda_min, -k / 2.0);
    out.unweighted0[static_cast<std::size_t>(k)] = a0.value;
    out.unweightedR[static_cast<std::size_t>(k)] = std::max(a0.value, br.value);
    out.profile0.c[static_cast<std::size_t>(k)] = a0.value * scale;
    out.profileR.c[static_cast<std::size_t>(k)] = std::max(a0.value, br.value) * scale;
    out.profileR.witnesses.push_back(br.where);
  }
  return out;
}

NormBandFit norm_band_fit(int k, const std::vector<std::pair<int, int>>& grid, int seeds, std::uint64_t seed0,
                          LinkKind link) {
  NormBandFit fit;
  fit.k = k;
  double lo = INFINITY, hi = 0.0;
  for (const auto& [d, n] : grid) {
    NormBandPoint pt;
    pt.d = d;
    pt.n = n;
    for (int s = 0; s < seeds; ++s) {
      auto inst = std::make_shared<const GlmInstance>(make_glm_instance(n, d, seed0 + static_cast<std::uint64_t>(s), link));
      const GlmDerivativeForm form(inst, inst->x0, k);
      pt.mean_norm += sphere_ascent(form).value / seeds;
    }
    pt.shape = 1.0 + std::pow(static_cast<double>(d), k / 2.0) / n;
    pt.fitted_C = pt.mean_norm / pt.shape;
    lo = std::min(lo, pt.fitted_C);
    hi = std::max(hi, pt.fitted_C);
    fit.points.push_back(pt);
  }
  fit.band_ratio = lo > 0.0 ? hi / lo : INFINITY;
  return fit;
}

}  // namespace laplace
