#include "laplace/cubature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace laplace {

namespace {

struct Box {
  Eigen::VectorXd center;
  Eigen::VectorXd half;
  double value = 0.0;
  double error = 0.0;
  int split_axis = 0;
  bool operator<(const Box& o) const { return error < o.error; }
};

class GenzMalikRule {
 public:
  explicit GenzMalikRule(int d) : d_(d) {
    const double dd = d;
    w1_ = (12824.0 - 9120.0 * dd + 400.0 * dd * dd) / 19683.0;
    w2_ = 980.0 / 6561.0;
    w3_ = (1820.0 - 400.0 * dd) / 19683.0;
    w4_ = 200.0 / 19683.0;
    w5_ = 6859.0 / 19683.0 / std::ldexp(1.0, d);
    e1_ = (729.0 - 950.0 * dd + 50.0 * dd * dd) / 729.0;
    e2_ = 245.0 / 486.0;
    e3_ = (265.0 - 100.0 * dd) / 1458.0;
    e4_ = 25.0 / 729.0;
  }

  std::size_t points() const {
    return 1 + 4 * static_cast<std::size_t>(d_) + 2 * static_cast<std::size_t>(d_) * (d_ - 1) + (std::size_t{1} << d_);
  }

  void apply(const ScalarField& f, Box& b) const {
    static const double l2 = std::sqrt(9.0 / 70.0), l4 = std::sqrt(9.0 / 10.0), l5 = std::sqrt(9.0 / 19.0);
    const double ratio = (l2 / l4) * (l2 / l4);
    Eigen::VectorXd x = b.center;
    auto eval = [&]() { return f(std::span<const double>(x.data(), static_cast<std::size_t>(d_))); };
    const double f0 = eval();
    double s2 = 0, s3 = 0, s4 = 0, s5 = 0, best = -1.0;
    for (int i = 0; i < d_; ++i) {
      x[i] = b.center[i] + l2 * b.half[i];
      const double a1 = eval();
      x[i] = b.center[i] - l2 * b.half[i];
      const double a2 = eval();
      x[i] = b.center[i] + l4 * b.half[i];
      const double b1 = eval();
      x[i] = b.center[i] - l4 * b.half[i];
      const double b2 = eval();
      x[i] = b.center[i];
      s2 += a1 + a2;
      s3 += b1 + b2;
      const double diff = std::abs(a1 + a2 - 2.0 * f0 - ratio * (b1 + b2 - 2.0 * f0));
      if (diff > best) {
        best = diff;
        b.split_axis = i;
      }
    }
    for (int i = 0; i < d_; ++i)
      for (int j = i + 1; j < d_; ++j)
        for (int si : {-1, 1})
          for (int sj : {-1, 1}) {
            x[i] = b.center[i] + si * l4 * b.half[i];
            x[j] = b.center[j] + sj * l4 * b.half[j];
            s4 += eval();
            x[i] = b.center[i];
            x[j] = b.center[j];
          }
    for (std::size_t mask = 0; mask < (std::size_t{1} << d_); ++mask) {
      for (int i = 0; i < d_; ++i) x[i] = b.center[i] + ((mask >> i) & 1 ? l5 : -l5) * b.half[i];
      s5 += eval();
    }
    const double vol = std::ldexp(b.half.prod(), d_);
    const double r7 = w1_ * f0 + w2_ * s2 + w3_ * s3 + w4_ * s4 + w5_ * s5;
    const double r5 = e1_ * f0 + e2_ * s2 + e3_ * s3 + e4_ * s4;
    b.value = vol * r7;
    b.error = vol * std::abs(r7 - r5);
  }

 private:
  int d_;
  double w1_, w2_, w3_, w4_, w5_, e1_, e2_, e3_, e4_;
};

// Neumaier summation for reproducible totals.
struct Compensated {
  double sum = 0.0, c = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      c += (sum - t) + v;
    else
      c += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

}  // namespace

CubatureResult genz_malik(const ScalarField& f, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, double abs_tol,
                          double rel_tol, std::size_t max_eval) {
  const int d = static_cast<int>(lo.size());
  if (d < 2 || hi.size() != d) throw std::invalid_argument("genz_malik needs a box with d >= 2");
  if (d > 15) throw std::invalid_argument("genz_malik is limited to d <= 15");
  const GenzMalikRule rule(d);
  std::priority_queue<Box> heap;
  Box root{(lo + hi) / 2.0, (hi - lo) / 2.0};
  rule.apply(f, root);
  CubatureResult out;
  out.evaluations = rule.points();
  double total = root.value, err = root.error;
  heap.push(std::move(root));
  while (true) {
    if (err <= std::max(abs_tol, rel_tol * std::abs(total))) {
      out.converged = true;
      break;
    }
    if (out.evaluations + 2 * rule.points() > max_eval) break;
    Box b = heap.top();
    heap.pop();
    Box l = b, r = b;
    const int ax = b.split_axis;
    l.half[ax] = r.half[ax] = b.half[ax] / 2.0;
    l.center[ax] = b.center[ax] - b.half[ax] / 2.0;
    r.center[ax] = b.center[ax] + b.half[ax] / 2.0;
    rule.apply(f, l);
    rule.apply(f, r);
    out.evaluations += 2 * rule.points();
    total += l.value + r.value - b.value;
    err += l.error + r.error - b.error;
    heap.push(std::move(l));
    heap.push(std::move(r));
  }
  // Re-sum from the leaves to drop accumulated drift.
  Compensated v, e;
  while (!heap.empty()) {
    v.add(heap.top().value);
    e.add(heap.top().error);
    heap.pop();
  }
  out.value = v.value();
  out.error = e.value();
  out.converged = out.converged || out.error <= std::max(abs_tol, rel_tol * std::abs(out.value));
  return out;
}

CubatureResult gauss_kronrod_1d(const std::function<double(double)>& f, double a, double b, double tol) {
  CubatureResult out;
  double err = 0.0, l1 = 0.0;
  std::size_t count = 0;
  auto g = [&](double x) {
    ++count;
    return f(x);
  };
  out.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, a, b, 30, tol, &err, &l1);
  out.error = err;
  out.evaluations = count;
  out.converged = err <= std::max(tol, tol * std::abs(out.value)) * 10.0;
  return out;
}

}  // namespace laplace
