#include "laplace/multi_index.hpp"

#include <array>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace laplace {

MultiIndex::MultiIndex(std::vector<int> exponents) : e_(std::move(exponents)) {
  for (int v : e_) {
    if (v < 0) throw std::invalid_argument("multi-index entries must be non-negative");
  }
  order_ = std::accumulate(e_.begin(), e_.end(), 0);
}

MultiIndex MultiIndex::unit(int d, int i, int power) {
  std::vector<int> e(static_cast<std::size_t>(d), 0);
  e.at(static_cast<std::size_t>(i)) = power;
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::from_tuple(int d, std::span<const int> tuple) {
  std::vector<int> e(static_cast<std::size_t>(d), 0);
  for (int i : tuple) {
    if (i < 0 || i >= d) throw std::out_of_range("tensor index out of range");
    ++e[static_cast<std::size_t>(i)];
  }
  return MultiIndex(std::move(e));
}

bool MultiIndex::all_even() const {
  for (int v : e_) {
    if (v % 2 != 0) return false;
  }
  return true;
}

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
  if (o.dim() != dim()) throw std::invalid_argument("multi-index dimension mismatch");
  std::vector<int> e(e_);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] += o.e_[i];
  return MultiIndex(std::move(e));
}

std::vector<int> MultiIndex::tuple() const {
  std::vector<int> t;
  t.reserve(static_cast<std::size_t>(order_));
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < e_[static_cast<std::size_t>(i)]; ++j) t.push_back(i);
  return t;
}

namespace {

constexpr int kPascal = 67;

const std::array<std::array<std::uint64_t, kPascal>, kPascal>& pascal() {
  static const auto table = [] {
    std::array<std::array<std::uint64_t, kPascal>, kPascal> t{};
    for (int n = 0; n < kPascal; ++n) {
      t[n][0] = 1;
      for (int k = 1; k <= n; ++k) t[n][k] = t[n - 1][k - 1] + (k < n ? t[n - 1][k] : 0);
    }
    return t;
  }();
  return table;
}

}  // namespace

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (n >= kPascal) throw EnumerationTooLarge("binomial(" + std::to_string(n) + ", k) exceeds the Pascal table");
  return pascal()[n][k];
}

std::uint64_t multi_index_count(int d, int m) {
  if (d < 1 || m < 0) throw std::invalid_argument("need d >= 1 and m >= 0");
  if (m + d - 1 >= kPascal)
    throw EnumerationTooLarge("multi-index count C(" + std::to_string(m + d - 1) + ", " + std::to_string(d - 1) +
                              ") is too large to enumerate");
  return binomial(m + d - 1, d - 1);
}

std::vector<MultiIndex> enumerate_multi_indices(int d, int m) {
  constexpr std::uint64_t kCap = 50'000'000;
  const std::uint64_t count = multi_index_count(d, m);
  if (count > kCap)
    throw EnumerationTooLarge("enumeration of " + std::to_string(count) + " multi-indices exceeds the cap");
  std::vector<MultiIndex> out;
  out.reserve(count);
  std::vector<int> e(static_cast<std::size_t>(d), 0);
  e[0] = m;
  do {
    out.emplace_back(e);
  } while (next_multi_index(e));
  return out;
}

bool next_multi_index(std::span<int> e) {
  const int d = static_cast<int>(e.size());
  int j = d - 2;
  while (j >= 0 && e[j] == 0) --j;
  if (j < 0) return false;
  int tail = 0;
  for (int i = j + 1; i < d; ++i) {
    tail += e[i];
    e[i] = 0;
  }
  --e[j];
  e[j + 1] = tail + 1;
  return true;
}

std::size_t multi_index_rank(std::span<const int> e) {
  const int d = static_cast<int>(e.size());
  int remaining = 0;
  for (int v : e) remaining += v;
  std::size_t rank = 0;
  for (int j = 0; j + 1 < d; ++j) {
    const int q = d - j - 1;
    if (remaining > e[j]) rank += binomial(remaining - e[j] - 1 + q, q);
    remaining -= e[j];
  }
  return rank;
}

}  // namespace laplace
