#pragma once

#include "laplace/multi_index.hpp"
#include "laplace/scalar.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace laplace {

// Symmetric order-k tensor on R^d stored by canonical multi-index.
// Entry at alpha is the common value of every index tuple with that count pattern.
template <Scalar S>
class BasicSymTensor {
 public:
  BasicSymTensor() = default;
  BasicSymTensor(int order, int dim) : order_(order), dim_(dim) {
    if (order < 0 || dim < 1) throw std::invalid_argument("tensor needs order >= 0 and dim >= 1");
    if (order > 12) throw EnumerationTooLarge("tensor orders above 12 are not supported");
    values_.assign(multi_index_count(dim, order), S(0));
  }

  static BasicSymTensor constant(int dim, S value) {
    BasicSymTensor t(0, dim);
    t.values_[0] = std::move(value);
    return t;
  }

  int order() const { return order_; }
  int dim() const { return dim_; }
  std::size_t size() const { return values_.size(); }

  const S& at(const MultiIndex& a) const { return values_[checked_rank(a.exponents(), a.order())]; }
  S& at(const MultiIndex& a) { return values_[checked_rank(a.exponents(), a.order())]; }

  // Lookup by an index tuple (i1..ik) in any order.
  const S& operator()(std::initializer_list<int> tuple) const {
    return at(MultiIndex::from_tuple(dim_, std::span<const int>(tuple.begin(), tuple.size())));
  }
  const S& entry(std::span<const int> tuple) const { return at(MultiIndex::from_tuple(dim_, tuple)); }

  std::span<const S> values() const { return values_; }
  std::span<S> values() { return values_; }

  bool is_zero() const {
    for (const S& v : values_)
      if (v != 0) return false;
    return true;
  }

  // Calls f(exponents, value) in graded-lexicographic order.
  template <class F>
  void for_each(F&& f) const {
    std::vector<int> e(static_cast<std::size_t>(dim_), 0);
    e[0] = order_;
    std::size_t i = 0;
    do {
      f(std::span<const int>(e), values_[i++]);
    } while (next_multi_index(e));
  }

  bool operator==(const BasicSymTensor& o) const {
    return order_ == o.order_ && dim_ == o.dim_ && values_ == o.values_;
  }

 private:
  std::size_t checked_rank(std::span<const int> e, int order) const {
    if (static_cast<int>(e.size()) != dim_) throw std::invalid_argument("multi-index dimension mismatch");
    if (order != order_) throw std::invalid_argument("multi-index order mismatch");
    return multi_index_rank(e);
  }

  int order_ = 0;
  int dim_ = 1;
  std::vector<S> values_{S(0)};
};

using SymTensor = BasicSymTensor<double>;
using ExactSymTensor = BasicSymTensor<Rational>;

template <Scalar S>
S power_of(const S& x, int e) {
  S r = S(1);
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

// <T, x^{(x)k}> = sum over |alpha| = k of (k!/alpha!) T^alpha x^alpha.
template <Scalar S>
S contract(const BasicSymTensor<S>& t, std::span<const S> x) {
  if (static_cast<int>(x.size()) != t.dim()) throw std::invalid_argument("contract: dimension mismatch");
  const S kfact = factorial_of<S>(t.order());
  S sum = S(0);
  t.for_each([&](std::span<const int> e, const S& v) {
    if (v == 0) return;
    S term = v;
    for (std::size_t i = 0; i < e.size(); ++i) term *= power_of(x[i], e[i]) / factorial_of<S>(e[i]);
    sum += term;
  });
  return sum * kfact;
}

inline double contract(const SymTensor& t, const std::vector<double>& x) {
  return contract<double>(t, std::span<const double>(x));
}

SymTensor to_double(const ExactSymTensor& t);
ExactSymTensor to_exact(const SymTensor& t);

// Frobenius norm over all d^k index tuples.
double frobenius_norm(const SymTensor& t);

// Builds a symmetric tensor from a (possibly non-symmetric) dense entry function by
// averaging over the index permutations of each canonical entry.
SymTensor symmetrize(int order, int dim, const std::function<double(std::span<const int>)>& dense);

// Polynomial x -> <T, x^k> compiled to monomials with multiplicity-weighted coefficients.
class MonomialForm {
 public:
  MonomialForm() = default;
  explicit MonomialForm(const SymTensor& t);
  int order() const { return order_; }
  int dim() const { return dim_; }
  bool empty() const { return coef_.empty(); }
  // pw[i * stride + e] = x_i^e for e <= order, prepared by the caller.
  double evaluate_with_powers(std::span<const double> pw, int stride) const;
  double evaluate(std::span<const double> x) const;
  // Returns <T, u^k> and writes its gradient in u.
  double value_and_gradient(std::span<const double> u, std::span<double> grad) const;

 private:
  int order_ = 0;
  int dim_ = 1;
  std::vector<int> exps_;  // flattened, dim_ entries per monomial
  std::vector<double> coef_;
};

}  // namespace laplace
