#include "laplace/forms.hpp"
#include "laplace/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace laplace {

double TransformedForm::value_and_gradient(std::span<const double> u, std::span<double> grad) const {
  const Eigen::Map<const Eigen::VectorXd> uu(u.data(), static_cast<Eigen::Index>(u.size()));
  const Eigen::VectorXd au = a_ * uu;
  Eigen::VectorXd g(au.size());
  const double v = inner_->value_and_gradient(std::span<const double>(au.data(), static_cast<std::size_t>(au.size())),
                                              std::span<double>(g.data(), static_cast<std::size_t>(g.size())));
  const Eigen::VectorXd ag = a_.transpose() * g;
  for (Eigen::Index i = 0; i < ag.size(); ++i) grad[static_cast<std::size_t>(i)] = ag[i];
  return v;
}

namespace {

struct Probe {
  double signed_value;
  Eigen::VectorXd grad;
};

Probe probe(const SymmetricForm& form, const Eigen::VectorXd& u, double sign) {
  Eigen::VectorXd g(u.size());
  const double v = form.value_and_gradient(std::span<const double>(u.data(), static_cast<std::size_t>(u.size())),
                                           std::span<double>(g.data(), static_cast<std::size_t>(g.size())));
  return {sign * v, sign * g};
}

AscentResult climb(const SymmetricForm& form, Eigen::VectorXd u, const AscentOptions& opt) {
  u.normalize();
  Eigen::VectorXd g0(u.size());
  const double v0 = form.value_and_gradient(std::span<const double>(u.data(), static_cast<std::size_t>(u.size())),
                                            std::span<double>(g0.data(), static_cast<std::size_t>(g0.size())));
  const double sign = v0 < 0.0 ? -1.0 : 1.0;
  Probe cur{sign * v0, sign * g0};
  double step = 1.0 / std::max(cur.grad.norm(), 1e-300);
  AscentResult res;
  int stalls = 0;
  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it + 1;
    const Eigen::VectorXd tangent = cur.grad - cur.grad.dot(u) * u;
    if (tangent.norm() <= 1e-14 * (1.0 + std::abs(cur.signed_value) * form.order())) {
      res.converged = true;
      break;
    }
    bool accepted = false;
    for (int half = 0; half < 40; ++half) {
      Eigen::VectorXd cand = u + step * tangent;
      cand.normalize();
      Probe next = probe(form, cand, sign);
      if (next.signed_value > cur.signed_value) {
        const double gain = next.signed_value - cur.signed_value;
        u = std::move(cand);
        cur = std::move(next);
        step *= 2.0;
        accepted = true;
        stalls = gain <= opt.tol * std::max(std::abs(cur.signed_value), 1e-300) ? stalls + 1 : 0;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || stalls >= 2) {
      res.converged = true;
      break;
    }
  }
  res.value = std::abs(cur.signed_value);
  res.argmax = u;
  return res;
}

}  // namespace

AscentResult sphere_ascent(const SymmetricForm& form, const AscentOptions& opt) {
  const int d = form.dim();
  std::vector<Eigen::VectorXd> starts = opt.warm;
  for (int i = 0; i < d && static_cast<int>(starts.size()) < opt.starts; ++i)
    starts.push_back(Eigen::VectorXd::Unit(d, i));
  PhiloxStream rng(opt.seed, 0x0a5c);
  while (static_cast<int>(starts.size()) < std::max(opt.starts, static_cast<int>(opt.warm.size()))) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = rng.normal();
    starts.push_back(v);
  }
  AscentResult best;
  best.argmax = Eigen::VectorXd::Unit(d, 0);
  best.value = -1.0;
  for (const auto& s : starts) {
    if (s.norm() == 0.0) continue;
    AscentResult r = climb(form, s, opt);
    if (r.value > best.value) best = std::move(r);
  }
  best.value = std::max(best.value, 0.0);
  return best;
}

double operator_norm(const SymTensor& t, const WeightMatrix& h, const AscentOptions& opt) {
  if (t.dim() != h.dim()) throw std::invalid_argument("operator_norm: dimension mismatch");
  const int d = t.dim();
  switch (t.order()) {
    case 0:
      return std::abs(t.values()[0]);
    case 1: {
      Eigen::VectorXd g(d);
      for (int i = 0; i < d; ++i) g[i] = t.values()[static_cast<std::size_t>(i)];
      return h.gradient_norm(g);
    }
    case 2: {
      Eigen::MatrixXd m(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = t({i, j});
      const Eigen::MatrixXd s = h.inv_sqrt() * m * h.inv_sqrt();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
      return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    default:
      break;
  }
  if (t.is_zero()) return 0.0;
  try {
    return sphere_ascent(TensorForm(pushforward_jet(t, h)), opt).value;
  } catch (const EnumerationTooLarge&) {
    return sphere_ascent(TransformedForm(std::make_shared<TensorForm>(t), h.inv_sqrt()), opt).value;
  }
}

double operator_norm(const SymTensor& t) { return operator_norm(t, WeightMatrix::identity(t.dim())); }

AscentResult operator_norm_form(std::shared_ptr<const SymmetricForm> form, const WeightMatrix& h,
                                const AscentOptions& opt) {
  if (form->order() <= 2) {
    AscentResult r;
    r.value = operator_norm(form->materialize(), h, opt);
    r.converged = true;
    return r;
  }
  if (h.is_identity()) return sphere_ascent(*form, opt);
  AscentResult r = sphere_ascent(TransformedForm(std::move(form), h.inv_sqrt()), opt);
  return r;
}

NormBracket operator_norm_grid(const SymTensor& t, const WeightMatrix& h, int angles) {
  if (t.dim() > 2) throw std::invalid_argument("grid mode is limited to d <= 2");
  const SymTensor s = pushforward_jet(t, h);
  const MonomialForm p(s);
  if (t.dim() == 1) {
    const double v = std::abs(p.evaluate(std::vector<double>{1.0}));
    return {v, v};
  }
  double best = 0.0;
  for (int j = 0; j < angles; ++j) {
    const double th = std::numbers::pi * j / angles;
    best = std::max(best, std::abs(p.evaluate(std::vector<double>{std::cos(th), std::sin(th)})));
  }
  const double lip = s.order() * frobenius_norm(s);
  return {best, best + lip * std::numbers::pi / angles / 2.0};
}

}  // namespace laplace
