#include "laplace/sym_tensor.hpp"

#include <algorithm>

namespace laplace {

SymTensor to_double(const ExactSymTensor& t) {
  SymTensor out(t.order(), t.dim());
  for (std::size_t i = 0; i < t.size(); ++i) out.values()[i] = t.values()[i].get_d();
  return out;
}

ExactSymTensor to_exact(const SymTensor& t) {
  ExactSymTensor out(t.order(), t.dim());
  for (std::size_t i = 0; i < t.size(); ++i) out.values()[i] = Rational(t.values()[i]);
  return out;
}

double frobenius_norm(const SymTensor& t) {
  double s = 0.0;
  t.for_each([&](std::span<const int> e, double v) {
    s += multiplicity<double>(MultiIndex(std::vector<int>(e.begin(), e.end()))) * v * v;
  });
  return std::sqrt(s);
}

SymTensor symmetrize(int order, int dim, const std::function<double(std::span<const int>)>& dense) {
  SymTensor out(order, dim);
  std::size_t i = 0;
  out.for_each([&](std::span<const int> e, double) {
    std::vector<int> tuple = MultiIndex(std::vector<int>(e.begin(), e.end())).tuple();
    double sum = 0.0;
    int count = 0;
    do {
      sum += dense(tuple);
      ++count;
    } while (std::next_permutation(tuple.begin(), tuple.end()));
    out.values()[i++] = sum / count;
  });
  return out;
}

MonomialForm::MonomialForm(const SymTensor& t) : order_(t.order()), dim_(t.dim()) {
  const double kfact = factorial_of<double>(order_);
  t.for_each([&](std::span<const int> e, double v) {
    if (v == 0.0) return;
    double w = kfact * v;
    for (int x : e) w /= factorial_of<double>(x);
    exps_.insert(exps_.end(), e.begin(), e.end());
    coef_.push_back(w);
  });
}

double MonomialForm::evaluate_with_powers(std::span<const double> pw, int stride) const {
  double sum = 0.0;
  const int* e = exps_.data();
  for (double c : coef_) {
    double m = c;
    for (int i = 0; i < dim_; ++i) m *= pw[static_cast<std::size_t>(i * stride + e[i])];
    sum += m;
    e += dim_;
  }
  return sum;
}

double MonomialForm::evaluate(std::span<const double> x) const {
  const int stride = order_ + 1;
  std::vector<double> pw(static_cast<std::size_t>(dim_ * stride));
  for (int i = 0; i < dim_; ++i) {
    double p = 1.0;
    for (int e = 0; e <= order_; ++e) {
      pw[static_cast<std::size_t>(i * stride + e)] = p;
      p *= x[static_cast<std::size_t>(i)];
    }
  }
  return evaluate_with_powers(pw, stride);
}

double MonomialForm::value_and_gradient(std::span<const double> u, std::span<double> grad) const {
  const int stride = order_ + 1;
  std::vector<double> pw(static_cast<std::size_t>(dim_ * stride));
  for (int i = 0; i < dim_; ++i) {
    double p = 1.0;
    for (int e = 0; e <= order_; ++e) {
      pw[static_cast<std::size_t>(i * stride + e)] = p;
      p *= u[static_cast<std::size_t>(i)];
    }
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  double sum = 0.0;
  const int* e = exps_.data();
  for (double c : coef_) {
    double m = c;
    for (int i = 0; i < dim_; ++i) m *= pw[static_cast<std::size_t>(i * stride + e[i])];
    sum += m;
    for (int j = 0; j < dim_; ++j) {
      if (e[j] == 0) continue;
      double g = c * e[j];
      for (int i = 0; i < dim_; ++i)
        g *= pw[static_cast<std::size_t>(i * stride + (i == j ? e[i] - 1 : e[i]))];
      grad[static_cast<std::size_t>(j)] += g;
    }
    e += dim_;
  }
  return sum;
}

}  // namespace laplace
