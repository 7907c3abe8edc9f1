#pragma once

#include "laplace/scalar.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace laplace {

class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents);
  static MultiIndex zero(int d) { return MultiIndex(std::vector<int>(static_cast<std::size_t>(d), 0)); }
  static MultiIndex unit(int d, int i, int power = 1);
  // Counts occurrences of each coordinate in an index tuple (i1..ik).
  static MultiIndex from_tuple(int d, std::span<const int> tuple);

  int dim() const { return static_cast<int>(e_.size()); }
  int order() const { return order_; }
  int operator[](int i) const { return e_[static_cast<std::size_t>(i)]; }
  std::span<const int> exponents() const { return e_; }

  bool all_even() const;
  MultiIndex operator+(const MultiIndex& o) const;

  // Sorted index tuple (i1 <= ... <= ik).
  std::vector<int> tuple() const;

  auto operator<=>(const MultiIndex&) const = default;

 private:
  std::vector<int> e_;
  int order_ = 0;
};

// Binomial coefficient from a Pascal table (n <= 66).
std::uint64_t binomial(int n, int k);

// Number of multi-indices of total degree m in d variables; throws on overflow.
std::uint64_t multi_index_count(int d, int m);

// Graded-lexicographic enumeration, first coordinate descending.
std::vector<MultiIndex> enumerate_multi_indices(int d, int m);

// Steps exps to the next multi-index of the same degree. Returns false past the last one.
bool next_multi_index(std::span<int> exps);

// Position of alpha inside enumerate_multi_indices(dim, order).
std::size_t multi_index_rank(std::span<const int> exps);

template <Scalar S>
S factorial_of(int n) {
  S r = S(1);
  for (int i = 2; i <= n; ++i) r *= S(i);
  return r;
}

// (n-1)!! with (-1)!! = 0!! = 1.
template <Scalar S>
S double_factorial_shifted(int n) {
  S r = S(1);
  for (int i = n - 1; i > 1; i -= 2) r *= S(i);
  return r;
}

template <Scalar S>
S factorial(const MultiIndex& a) {
  S r = S(1);
  for (int e : a.exponents()) r *= factorial_of<S>(e);
  return r;
}

// k!/alpha!
template <Scalar S>
S multiplicity(const MultiIndex& a) {
  return factorial_of<S>(a.order()) / factorial<S>(a);
}

// E[Z^alpha] for a standard Gaussian vector.
template <Scalar S>
S gaussian_moment(const MultiIndex& a) {
  if (!a.all_even()) return S(0);
  S r = S(1);
  for (int e : a.exponents()) r *= double_factorial_shifted<S>(e);
  return r;
}

}  // namespace laplace
