#include "laplace/quartic.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace laplace {

namespace mp = boost::multiprecision;
using Float50 = mp::cpp_bin_float_50;

template <Scalar S>
S quartic_coeff(int k, int d) {
  if (k < 1 || d < 1) throw std::invalid_argument("quartic_coeff needs k >= 1 and d >= 1");
  S prod = S(1);
  for (int j = 0; j < 2 * k; ++j) prod *= from_ratio<S>(d + 2 * j, 2);
  S sixth = S(1);
  for (int i = 0; i < k; ++i) sixth *= from_ratio<S>(-1, 6);
  return sixth * prod / factorial_of<S>(k);
}

template double quartic_coeff<double>(int, int);
template Rational quartic_coeff<Rational>(int, int);

namespace {

template <class Real>
Real radial_prefactor(int d) {
  using std::pow;
  using boost::math::tgamma;
  return pow(Real(2), Real(1) - Real(d) / 2) / tgamma(Real(d) / 2);
}

template <class Real>
std::pair<Real, Real> radial_integral(int d, Real n, Real tol) {
  boost::math::quadrature::exp_sinh<Real> integrator;
  auto f = [&](Real s) -> Real {
    using std::exp;
    using std::log;
    const Real s2 = s * s;
    if (s2 > 4000) return Real(0);
    if (s == 0) return Real(d == 1 ? 1 : 0);
    return exp((d - 1) * log(s) - s2 / 2 - s2 * s2 / (24 * n));
  };
  Real err = 0, l1 = 0;
  const Real v = integrator.integrate(f, tol, &err, &l1);
  const Real pre = radial_prefactor<Real>(d);
  return {v * pre, err * pre};
}

}  // namespace

QuadratureValue quartic_integral(int d, double n, bool high_precision) {
  if (d < 1 || !(n > 0.0)) throw std::invalid_argument("quartic integral needs d >= 1 and n > 0");
  QuadratureValue q;
  if (!high_precision) {
    const auto [v, e] = radial_integral<double>(d, n, 1e-13);
    q.value = v;
    q.error = e;
    q.precision = "double";
  } else {
    const auto [v, e] = radial_integral<Float50>(d, Float50(n), Float50("1e-40"));
    q.value = static_cast<double>(v);
    q.error = static_cast<double>(e);
    q.precision = "float50";
  }
  if (!std::isfinite(q.value) || !(q.error <= 1e-12 * std::abs(q.value) + 1e-300))
    throw std::runtime_error("quartic radial quadrature did not converge");
  return q;
}

double quartic_integral_exact(int d, double n) { return quartic_integral(d, n).value; }

QuarticRemainder quartic_remainder(int L, int d, double n, bool require_hypothesis) {
  if (L < 1) throw std::invalid_argument("L must be at least 1");
  if (require_hypothesis && static_cast<double>(d) * d / n > 0.25)
    throw std::invalid_argument("quartic remainder requires d^2/n <= 1/4");
  QuarticRemainder r;
  r.L = L;
  r.d = d;
  r.n = n;
  {
    const QuadratureValue q = quartic_integral(d, n);
    double partial = 1.0;
    for (int k = 1; k < L; ++k) partial += quartic_coeff<double>(k, d) * std::pow(n, -k);
    r.rem = q.value - partial;
    // Rounding of the subtraction plus the quadrature estimate.
    r.error = q.error + 4e-16 * (std::abs(q.value) + std::abs(partial));
    r.precision = "double";
  }
  if (r.error <= 0.01 * std::abs(r.rem)) return r;
  const auto [v, e] = radial_integral<Float50>(d, Float50(n), Float50("1e-45"));
  Float50 partial = 1;
  for (int k = 1; k < L; ++k) {
    const Rational a = quartic_coeff<Rational>(k, d);
    partial += Float50(a.get_num().get_str()) / Float50(a.get_den().get_str()) / mp::pow(Float50(n), k);
  }
  const Float50 rem = v - partial;
  r.rem = static_cast<double>(rem);
  r.error = static_cast<double>(e) + 1e-48 * (static_cast<double>(mp::abs(v)) + static_cast<double>(mp::abs(partial)));
  r.precision = "float50";
  if (!(r.error <= 0.01 * std::abs(r.rem)))
    throw std::runtime_error("quartic remainder error exceeds 1% of the remainder even at 50 digits");
  return r;
}

double quartic_remainder_direct(int L, int d, double n) {
  boost::math::quadrature::exp_sinh<double> integrator;
  auto tail = [L](double x) {
    // e^{-x} - sum_{j<L} (-x)^j / j!
    if (x > 1.0) {
      double s = std::exp(-x), t = 1.0;
      for (int j = 0; j < L; ++j) {
        s -= t;
        t *= -x / (j + 1);
      }
      return s;
    }
    double t = 1.0;
    for (int j = 0; j < L; ++j) t *= -x / (j + 1);
    double s = 0.0;
    for (int j = L; j < L + 60; ++j) {
      s += t;
      t *= -x / (j + 1);
      if (std::abs(t) < 1e-18 * std::abs(s)) break;
    }
    return s;
  };
  auto f = [&](double s) {
    const double s2 = s * s;
    if (s2 > 4000.0) return 0.0;
    return std::pow(s, d - 1) * std::exp(-s2 / 2) * tail(s2 * s2 / (24.0 * n));
  };
  return integrator.integrate(f, 1e-13) * radial_prefactor<double>(d);
}

DerivNormProfile quartic_profile(int d, double n, double r, int L) {
  DerivNormProfile p;
  p.r = r;
  p.method = "analytic";
  p.c.assign(static_cast<std::size_t>(2 * L + 3), 0.0);
  p.cg.assign(static_cast<std::size_t>(2 * L + 1), 0.0);
  p.c[3] = r * std::sqrt(d / n);
  p.c[4] = 1.0;
  p.cg[0] = 1.0;
  return p;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_slope needs two or more points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

TightnessTable tightness_experiment(const std::vector<int>& Ls, const std::vector<std::pair<int, double>>& grid) {
  TightnessTable t;
  for (const auto& [d, n] : grid)
    if (static_cast<double>(d) * d / n > 0.25)
      throw std::invalid_argument("grid point d = " + std::to_string(d) + ", n = " + std::to_string(n) +
                                  " violates d^2/n <= 1/4");
  for (int L : Ls) {
    std::vector<double> lx, ly;
    double lo = INFINITY, hi = 0.0;
    for (const auto& [d, n] : grid) {
      const QuarticRemainder q = quartic_remainder(L, d, n);
      TightnessRow row;
      row.L = L;
      row.d = d;
      row.n = n;
      row.eps2 = static_cast<double>(d) * d / n;
      row.rem = q.rem;
      row.error = q.error;
      row.ratio = q.rem / std::pow(row.eps2, L);
      row.precision = q.precision;
      t.rows.push_back(row);
      lx.push_back(std::log(row.eps2));
      ly.push_back(std::log(std::abs(q.rem)));
      lo = std::min(lo, std::abs(row.ratio));
      hi = std::max(hi, std::abs(row.ratio));
    }
    TightnessSummary s;
    s.L = L;
    s.band = lo > 0.0 ? hi / lo : INFINITY;
    s.slope = grid.size() >= 2 ? fit_slope(lx, ly) : 0.0;
    s.band_ok = s.band <= 10.0;
    s.slope_ok = std::abs(s.slope - L) <= 0.05;
    t.summary.push_back(s);
  }
  return t;
}

std::string tightness_csv(const TightnessTable& t) {
  std::ostringstream os;
  os << "L,d,n,eps2,rem,error,ratio,precision\n";
  char buf[256];
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.3g,%.17g,%s\n", r.L, r.d, r.n, r.eps2, r.rem, r.error,
                  r.ratio, r.precision.c_str());
    os << buf;
  }
  return os.str();
}

}  // namespace laplace
