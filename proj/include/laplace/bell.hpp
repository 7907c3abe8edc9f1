#pragma once

#include "laplace/multi_index.hpp"
#include "laplace/scalar.hpp"

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace laplace {

namespace detail {
inline void require_args(int k, std::size_t n) {
  if (k < 0) throw std::invalid_argument("Bell order must be non-negative");
  if (static_cast<std::size_t>(k) > n) throw std::invalid_argument("insufficient Bell arguments");
}
}  // namespace detail

// B_0..B_k by B_{m+1} = sum_i C(m,i) B_{m-i} s_{i+1}; s[0] holds s_1.
template <Scalar S>
std::vector<S> bell_table(int k, std::span<const S> s) {
  detail::require_args(k, s.size());
  std::vector<S> b(static_cast<std::size_t>(k) + 1, S(0));
  b[0] = S(1);
  for (int m = 0; m < k; ++m) {
    S acc = S(0);
    for (int i = 0; i <= m; ++i) acc += S(static_cast<long>(binomial(m, i))) * b[m - i] * s[i];
    b[m + 1] = acc;
  }
  return b;
}

template <Scalar S>
S bell_recurrence(int k, std::span<const S> s) {
  return bell_table<S>(k, s)[static_cast<std::size_t>(k)];
}

// k! sum over j_1 + 2 j_2 + ... + k j_k = k of prod s_i^{j_i} / ((i!)^{j_i} j_i!)
template <Scalar S>
S bell_partition_sum(int k, std::span<const S> s) {
  detail::require_args(k, s.size());
  S total = S(0);
  std::function<void(int, int, S)> rec = [&](int part, int remaining, S acc) {
    if (remaining == 0) {
      total += acc;
      return;
    }
    if (part > remaining) return;
    S term = acc;
    const S inv = S(1) / factorial_of<S>(part);
    for (int j = 0; j * part <= remaining; ++j) {
      if (j > 0) term = term * s[part - 1] * inv / S(j);
      rec(part + 1, remaining - j * part, term);
    }
  };
  rec(1, k, S(1));
  return factorial_of<S>(k) * total;
}

// k! sum_r (1/r!) sum over compositions m_1 + ... + m_r = k of prod s_{m_j} / m_j!
template <Scalar S>
S bell_ordered_compositions(int k, std::span<const S> s) {
  detail::require_args(k, s.size());
  if (k == 0) return S(1);
  S total = S(0);
  std::function<void(int, int, S)> rec = [&](int remaining, int parts, S acc) {
    if (remaining == 0) {
      total += acc / factorial_of<S>(parts);
      return;
    }
    for (int m = 1; m <= remaining; ++m) rec(remaining - m, parts + 1, acc * s[m - 1] / factorial_of<S>(m));
  };
  rec(k, 0, S(1));
  return factorial_of<S>(k) * total;
}

}  // namespace laplace
