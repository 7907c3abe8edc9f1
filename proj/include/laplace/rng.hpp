#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

namespace laplace {

// Philox4x32-10 counter-based generator.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

// Independent stream keyed by (seed, stream id); draws are a pure function of the position.
class PhiloxStream {
 public:
  using result_type = std::uint64_t;
  PhiloxStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();

 private:
  void refill();
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buf_{};
  int avail_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Worker count: explicit value if positive, else LAPLACE_THREADS, else hardware concurrency.
int resolve_threads(int requested);

// Evaluates f(chunk) for every chunk on up to `threads` workers; results stay in chunk order.
template <class R, class F>
std::vector<R> run_chunks(std::size_t chunks, int threads, F&& f) {
  std::vector<R> out(chunks);
  const int workers = std::max(1, std::min<int>(resolve_threads(threads), static_cast<int>(chunks)));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) out[c] = f(c);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < chunks; c = next++) out[c] = f(c);
    });
  }
  return out;
}

// Running mean/variance with ordered merging.
struct MeanAccumulator {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }
  void merge(const MeanAccumulator& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double n = static_cast<double>(count + o.count);
    const double delta = o.mean - mean;
    mean += delta * static_cast<double>(o.count) / n;
    m2 += o.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(o.count) / n;
    count += o.count;
  }
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double stderr_of_mean() const {
    return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
  }
};

}  // namespace laplace
