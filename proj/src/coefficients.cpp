#include "laplace/coefficients.hpp"
#include "laplace/rng.hpp"

#include <bit>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace laplace {

namespace {

template <Scalar S>
using Poly = std::vector<std::pair<std::uint64_t, S>>;

// Monomials packed as fixed-width exponent fields.
struct Packing {
  int d = 1;
  int bits = 1;
  std::uint64_t odd_mask = 0;
  std::uint64_t field_mask = 1;

  Packing(int dim, int max_degree) : d(dim) {
    bits = std::max(1, static_cast<int>(std::bit_width(static_cast<unsigned>(max_degree))));
    if (static_cast<long>(d) * bits > 64)
      throw EnumerationTooLarge("explicit coefficient sum at d = " + std::to_string(d) +
                                " exceeds the packed monomial width; use the Monte Carlo path (coeff_mc)");
    field_mask = (std::uint64_t{1} << bits) - 1;
    for (int i = 0; i < d; ++i) odd_mask |= std::uint64_t{1} << (i * bits);
  }

  std::uint64_t pack(std::span<const int> e) const {
    std::uint64_t key = 0;
    for (int i = 0; i < d; ++i) key |= static_cast<std::uint64_t>(e[static_cast<std::size_t>(i)]) << (i * bits);
    return key;
  }
  int field(std::uint64_t key, int i) const { return static_cast<int>((key >> (i * bits)) & field_mask); }
};

template <Scalar S>
class ExplicitSum {
 public:
  ExplicitSum(const BasicLocalJet<S>& jet, int k, bool unit_f, const ExplicitOptions& opt)
      : k_(k), unit_f_(unit_f), budget_(opt.budget), pk_(jet_dim(jet), 3 * std::max(k, 1)) {
    if (k < 0) throw std::invalid_argument("coefficient order must be non-negative");
    if (!unit_f && jet.max_f_order() < k)
      throw std::invalid_argument("jet order insufficient: need f to order " + std::to_string(k));
    if (jet.max_v_order() < k + 2 && k > 0)
      throw std::invalid_argument("jet order insufficient: need v to order " + std::to_string(k + 2));
    F_.resize(static_cast<std::size_t>(k) + 1);
    if (unit_f) {
      F_[0] = {{0, S(1)}};
    } else {
      for (int j = 0; j <= k; ++j) F_[static_cast<std::size_t>(j)] = to_poly(jet.f(j));
    }
    P_.resize(static_cast<std::size_t>(k) + 1);
    for (int m = 1; m <= k; ++m) P_[static_cast<std::size_t>(m)] = to_poly(jet.v(m + 2));
    dfact_.resize(static_cast<std::size_t>(3 * std::max(k, 1)) + 1);
    for (std::size_t e = 0; e < dfact_.size(); ++e) dfact_[e] = double_factorial_shifted<S>(static_cast<int>(e));
  }

  S run() {
    total_ = S(0);
    dfs(Poly<S>{{0, S(1)}}, 0, 0);
    return total_;
  }
  std::uint64_t work() const { return work_; }

 private:
  static int jet_dim(const BasicLocalJet<S>& j) { return j.dim(); }

  Poly<S> to_poly(const BasicSymTensor<S>& t) const {
    Poly<S> p;
    t.for_each([&](std::span<const int> e, const S& v) {
      if (v == 0) return;
      S c = v;
      for (int x : e) c /= factorial_of<S>(x);
      p.emplace_back(pk_.pack(e), c);
    });
    return p;
  }

  void charge(std::uint64_t n) {
    work_ += n;
    if (work_ > budget_)
      throw EnumerationTooLarge("explicit coefficient sum exceeded its budget of " + std::to_string(budget_) +
                                " multiply-adds at k = " + std::to_string(k_) + "; use the Monte Carlo path (coeff_mc)");
  }

  Poly<S> multiply(const Poly<S>& a, const Poly<S>& b) {
    charge(static_cast<std::uint64_t>(a.size()) * b.size());
    std::unordered_map<std::uint64_t, S> acc;
    acc.reserve(a.size() * b.size() / 2 + 1);
    for (const auto& [ka, ca] : a)
      for (const auto& [kb, cb] : b) acc[ka + kb] += ca * cb;
    Poly<S> out;
    out.reserve(acc.size());
    for (auto& [key, c] : acc)
      if (c != 0) out.emplace_back(key, std::move(c));
    return out;
  }

  // Gaussian expectation of the product of two polynomials.
  S expectation(const Poly<S>& a, const Poly<S>& b) {
    charge(static_cast<std::uint64_t>(a.size()) * b.size());
    S sum = S(0);
    for (const auto& [ka, ca] : a)
      for (const auto& [kb, cb] : b) {
        const std::uint64_t key = ka + kb;
        if (key & pk_.odd_mask) continue;
        S m = ca * cb;
        for (int i = 0; i < pk_.d; ++i) {
          const int e = pk_.field(key, i);
          if (e > 1) m *= dfact_[static_cast<std::size_t>(e)];
        }
        sum += m;
      }
    return sum;
  }

  void dfs(const Poly<S>& q, int l, int r) {
    const Poly<S>& f = F_[static_cast<std::size_t>(k_ - l)];
    if (!f.empty()) {
      S term = expectation(f, q) / factorial_of<S>(r);
      if (r % 2) term = -term;
      total_ += term;
    }
    for (int m = 1; m <= k_ - l; ++m) {
      const Poly<S>& p = P_[static_cast<std::size_t>(m)];
      if (p.empty()) continue;
      dfs(multiply(q, p), l + m, r + 1);
    }
  }

  int k_;
  bool unit_f_;
  std::uint64_t budget_;
  Packing pk_;
  std::vector<Poly<S>> F_;
  std::vector<Poly<S>> P_;
  std::vector<S> dfact_;
  S total_ = S(0);
  std::uint64_t work_ = 0;
};

template <Scalar S>
CoefficientResult make_result(int k, const S& v, std::uint64_t work) {
  CoefficientResult r;
  r.k = k;
  r.value = to_double(v);
  r.method = "explicit";
  r.work = work;
  if constexpr (is_exact_v<S>) r.exact = v;
  return r;
}

}  // namespace

template <Scalar S>
S coeff_explicit_value(const BasicLocalJet<S>& jet, int k, const ExplicitOptions& opt, std::uint64_t* work) {
  ExplicitSum<S> sum(jet, k, false, opt);
  S v = sum.run();
  if (work) *work = sum.work();
  return v;
}

template <Scalar S>
S coeff_f1_value(const BasicLocalJet<S>& jet, int k, const ExplicitOptions& opt) {
  ExplicitSum<S> sum(jet, k, true, opt);
  return sum.run();
}

template double coeff_explicit_value<double>(const LocalJet&, int, const ExplicitOptions&, std::uint64_t*);
template Rational coeff_explicit_value<Rational>(const ExactLocalJet&, int, const ExplicitOptions&, std::uint64_t*);
template double coeff_f1_value<double>(const LocalJet&, int, const ExplicitOptions&);
template Rational coeff_f1_value<Rational>(const ExactLocalJet&, int, const ExplicitOptions&);

CoefficientResult coeff_explicit(const LocalJet& jet, int k, const ExplicitOptions& opt) {
  std::uint64_t work = 0;
  const double v = coeff_explicit_value(jet, k, opt, &work);
  return make_result(k, v, work);
}

CoefficientResult coeff_explicit(const ExactLocalJet& jet, int k, const ExplicitOptions& opt) {
  std::uint64_t work = 0;
  const Rational v = coeff_explicit_value(jet, k, opt, &work);
  return make_result(k, v, work);
}

CoefficientResult coeff_f1(const LocalJet& jet, int k, const ExplicitOptions& opt) {
  return make_result(k, coeff_f1_value(jet, k, opt), 0);
}

CoefficientResult coeff_f1(const ExactLocalJet& jet, int k, const ExplicitOptions& opt) {
  return make_result(k, coeff_f1_value(jet, k, opt), 0);
}

ChiEvaluator::ChiEvaluator(const LocalJet& jet, int k) : k_(k), d_(jet.dim()) {
  if (k < 0) throw std::invalid_argument("chi order must be non-negative");
  if (jet.max_f_order() < k || (k > 0 && jet.max_v_order() < k + 2))
    throw std::invalid_argument("jet order insufficient for chi_" + std::to_string(k));
  for (int j = 0; j <= k; ++j) {
    fzero_.push_back(jet.f(j).is_zero());
    f_.push_back(fzero_.back() ? MonomialForm() : MonomialForm(jet.f(j)));
  }
  for (int j = 1; j <= k; ++j) {
    vzero_.push_back(jet.v(j + 2).is_zero());
    v_.push_back(vzero_.back() ? MonomialForm() : MonomialForm(jet.v(j + 2)));
  }
}

void ChiEvaluator::contractions(std::span<const double> x, std::vector<double>& fc, std::vector<double>& vc) const {
  if (static_cast<int>(x.size()) != d_) throw std::invalid_argument("chi_eval: dimension mismatch");
  const int stride = k_ + 3;
  std::vector<double> pw(static_cast<std::size_t>(d_ * stride));
  for (int i = 0; i < d_; ++i) {
    double p = 1.0;
    for (int e = 0; e < stride; ++e) {
      pw[static_cast<std::size_t>(i * stride + e)] = p;
      p *= x[static_cast<std::size_t>(i)];
    }
  }
  fc.assign(static_cast<std::size_t>(k_) + 1, 0.0);
  vc.assign(static_cast<std::size_t>(k_), 0.0);
  for (int j = 0; j <= k_; ++j)
    if (!fzero_[static_cast<std::size_t>(j)]) fc[static_cast<std::size_t>(j)] = f_[static_cast<std::size_t>(j)].evaluate_with_powers(pw, stride);
  for (int j = 1; j <= k_; ++j)
    if (!vzero_[static_cast<std::size_t>(j - 1)])
      vc[static_cast<std::size_t>(j - 1)] =
          -v_[static_cast<std::size_t>(j - 1)].evaluate_with_powers(pw, stride) / ((j + 1.0) * (j + 2.0));
}

double ChiEvaluator::assemble(const std::vector<double>& fc, const std::vector<double>& vc, double sign) const {
  std::vector<double> s(vc);
  double sg = sign;
  for (int j = 1; j <= k_; ++j, sg *= sign) s[static_cast<std::size_t>(j - 1)] *= sg;
  const std::vector<double> b = bell_table<double>(k_, s);
  double sum = 0.0;
  for (int l = 0; l <= k_; ++l) {
    const int j = k_ - l;
    const double fj = (j % 2 && sign < 0) ? -fc[static_cast<std::size_t>(j)] : fc[static_cast<std::size_t>(j)];
    sum += static_cast<double>(binomial(k_, l)) * fj * b[static_cast<std::size_t>(l)];
  }
  return sum;
}

double ChiEvaluator::operator()(std::span<const double> x) const {
  std::vector<double> fc, vc;
  contractions(x, fc, vc);
  return assemble(fc, vc, 1.0);
}

std::pair<double, double> ChiEvaluator::pair(std::span<const double> x) const {
  std::vector<double> fc, vc;
  contractions(x, fc, vc);
  return {assemble(fc, vc, 1.0), assemble(fc, vc, -1.0)};
}

double chi_eval(const LocalJet& jet, int k, std::span<const double> x) { return ChiEvaluator(jet, k)(x); }

CoefficientResult coeff_mc(const LocalJet& jet, int k, const McOptions& opt) {
  if (opt.samples < 2) throw std::invalid_argument("coeff_mc needs at least 2 samples");
  const ChiEvaluator chi(jet, k);
  const int d = jet.dim();
  const std::size_t chunk = std::max<std::size_t>(opt.chunk, 2);
  const std::size_t chunks = (opt.samples + chunk - 1) / chunk;
  auto parts = run_chunks<MeanAccumulator>(chunks, opt.threads, [&](std::size_t c) {
    PhiloxStream rng(opt.seed, c);
    MeanAccumulator acc;
    const std::size_t draws = std::min(chunk, opt.samples - c * chunk);
    std::vector<double> z(static_cast<std::size_t>(d));
    if (opt.antithetic) {
      for (std::size_t i = 0; i < draws; i += 2) {
        for (double& v : z) v = rng.normal();
        const auto [a, b] = chi.pair(z);
        acc.add(0.5 * (a + b));
      }
    } else {
      for (std::size_t i = 0; i < draws; ++i) {
        for (double& v : z) v = rng.normal();
        acc.add(chi(z));
      }
    }
    return acc;
  });
  MeanAccumulator total;
  for (const auto& p : parts) total.merge(p);
  const double kf = factorial_of<double>(k);
  CoefficientResult r;
  r.k = k;
  r.method = "mc";
  r.value = total.mean / kf;
  r.mc_stderr = total.stderr_of_mean() / kf;
  return r;
}

template <Scalar S>
S a2_closed_form(const BasicLocalJet<S>& jet) {
  if (jet.max_f_order() < 2 || jet.max_v_order() < 4)
    throw std::invalid_argument("jet order insufficient: a2_closed_form needs f to order 2 and v to order 4");
  const int d = jet.dim();
  const auto& f1 = jet.f(1);
  const auto& f2 = jet.f(2);
  const auto& v3 = jet.v(3);
  const auto& v4 = jet.v(4);
  const S f0 = jet.f(0).values()[0];
  S lap = S(0), cross = S(0), frob = S(0), trace_sq = S(0), quart = S(0);
  for (int i = 0; i < d; ++i) {
    lap += f2({i, i});
    S t = S(0);
    for (int j = 0; j < d; ++j) {
      t += v3({i, j, j});
      quart += v4({i, i, j, j});
    }
    cross += f1({i}) * t;
    trace_sq += t * t;
  }
  v3.for_each([&](std::span<const int> e, const S& v) {
    if (v == 0) return;
    frob += multiplicity<S>(MultiIndex(std::vector<int>(e.begin(), e.end()))) * v * v;
  });
  return lap / S(2) - cross / S(2) + f0 * frob / S(12) + f0 * trace_sq / S(8) - f0 * quart / S(8);
}

template double a2_closed_form<double>(const LocalJet&);
template Rational a2_closed_form<Rational>(const ExactLocalJet&);

LocalJet random_jet(int d, int f_order, int v_order, std::uint64_t seed, double scale) {
  PhiloxStream rng(seed, 0x7e7);
  LocalJet j;
  auto fill = [&](int k) {
    SymTensor t(k, d);
    for (double& v : t.values()) v = scale * (2.0 * rng.uniform() - 1.0);
    return t;
  };
  for (int k = 0; k <= f_order; ++k) j.fjet.push_back(fill(k));
  for (int k = 3; k <= v_order; ++k) j.vjet.push_back(fill(k));
  return j;
}

ExactLocalJet random_exact_jet(int d, int f_order, int v_order, std::uint64_t seed, int num, int den) {
  PhiloxStream rng(seed, 0x7e8);
  ExactLocalJet j;
  const std::uint64_t span = 2 * static_cast<std::uint64_t>(num) + 1;
  auto fill = [&](int k) {
    ExactSymTensor t(k, d);
    for (Rational& v : t.values()) v = from_ratio<Rational>(static_cast<long>(rng() % span) - num, den);
    return t;
  };
  for (int k = 0; k <= f_order; ++k) j.fjet.push_back(fill(k));
  for (int k = 3; k <= v_order; ++k) j.vjet.push_back(fill(k));
  return j;
}

std::string coefficients_csv(const std::vector<CoefficientResult>& rows) {
  std::ostringstream os;
  os << "k,value,method,stderr\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.value);
    os << r.k << ',' << buf << ',' << r.method << ',';
    std::snprintf(buf, sizeof buf, "%.6g", r.mc_stderr);
    os << buf << '\n';
  }
  return os.str();
}

}  // namespace laplace
