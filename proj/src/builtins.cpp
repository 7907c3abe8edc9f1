#include "laplace/builtins.hpp"
#include "laplace/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace laplace {

namespace {

// Fills a symmetric tensor from a function of the sorted index tuple.
SymTensor from_tuple_fn(int k, int d, const std::function<double(std::span<const int>)>& fn) {
  SymTensor t(k, d);
  std::size_t i = 0;
  t.for_each([&](std::span<const int> e, double) {
    const std::vector<int> tup = MultiIndex(std::vector<int>(e.begin(), e.end())).tuple();
    t.values()[i++] = fn(tup);
  });
  return t;
}

std::shared_ptr<const SymmetricForm> form_of(SymTensor t) { return std::make_shared<TensorForm>(std::move(t)); }

double sq_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace

GBuiltin parse_g_builtin(const std::string& name) {
  if (name == "constant" || name == "one") return GBuiltin::constant;
  if (name == "linear") return GBuiltin::linear;
  if (name == "quadratic") return GBuiltin::quadratic;
  throw std::invalid_argument("unknown g builtin '" + name + "' (expected constant, linear or quadratic)");
}

std::string g_builtin_name(GBuiltin g) {
  switch (g) {
    case GBuiltin::constant: return "constant";
    case GBuiltin::linear: return "linear";
    case GBuiltin::quadratic: return "quadratic";
  }
  return "constant";
}

void attach_g(ProblemSpec& p, GBuiltin g) {
  const int d = p.d;
  const Eigen::VectorXd x0 = p.x0;
  const double a = 1.0 / std::sqrt(static_cast<double>(d));
  p.g = [=](std::span<const double> x) {
    double s = 0.0;
    switch (g) {
      case GBuiltin::constant: return 1.0;
      case GBuiltin::linear:
        for (int i = 0; i < d; ++i) s += a * (x[static_cast<std::size_t>(i)] - x0[i]);
        return 1.0 + s;
      case GBuiltin::quadratic:
        for (int i = 0; i < d; ++i) s += (x[static_cast<std::size_t>(i)] - x0[i]) * (x[static_cast<std::size_t>(i)] - x0[i]);
        return 1.0 + s;
    }
    return 1.0;
  };
  const Evaluator gv = p.g;
  p.g_deriv = [=](std::span<const double> x, int k) {
    if (k == 0) return form_of(SymTensor::constant(d, gv(x)));
    if (k == 1) {
      return form_of(from_tuple_fn(1, d, [&](std::span<const int> t) {
        const int i = t[0];
        if (g == GBuiltin::linear) return a;
        if (g == GBuiltin::quadratic) return 2.0 * (x[static_cast<std::size_t>(i)] - x0[i]);
        return 0.0;
      }));
    }
    if (k == 2 && g == GBuiltin::quadratic)
      return form_of(from_tuple_fn(2, d, [](std::span<const int> t) { return t[0] == t[1] ? 2.0 : 0.0; }));
    return form_of(SymTensor(k, d));
  };
  p.envelope = p.envelope && g == GBuiltin::constant;
}

ProblemSpec quartic_problem(int d, double n, int L, GBuiltin g) {
  if (d < 1 || !(n > 0.0) || L < 1) throw std::invalid_argument("quartic problem needs d >= 1, n > 0, L >= 1");
  ProblemSpec p;
  p.name = "quartic";
  p.d = d;
  p.n = n;
  p.L = L;
  p.x0 = Eigen::VectorXd::Zero(d);
  p.H = WeightMatrix::identity(d);
  p.u = [](std::span<const double> x) {
    const double s = sq_norm(x);
    return s / 2.0 + s * s / 24.0;
  };
  const Evaluator u = p.u;
  p.u_deriv = [d, u](std::span<const double> x, int k) {
    const double s = sq_norm(x);
    switch (k) {
      case 0: return form_of(SymTensor::constant(d, u(x)));
      case 1:
        return form_of(from_tuple_fn(1, d, [&](std::span<const int> t) { return x[t[0]] * (1.0 + s / 6.0); }));
      case 2:
        return form_of(from_tuple_fn(2, d, [&](std::span<const int> t) {
          return x[t[0]] * x[t[1]] / 3.0 + (t[0] == t[1] ? 1.0 + s / 6.0 : 0.0);
        }));
      case 3:
        return form_of(from_tuple_fn(3, d, [&](std::span<const int> t) {
          return ((t[1] == t[2] ? x[t[0]] : 0.0) + (t[0] == t[2] ? x[t[1]] : 0.0) + (t[0] == t[1] ? x[t[2]] : 0.0)) / 3.0;
        }));
      case 4: return form_of(quartic_fourth_tensor<double>(d));
      default: return form_of(SymTensor(k, d));
    }
  };
  p.envelope = true;
  attach_g(p, g);
  return p;
}

ProblemSpec gaussian_problem(int d, double n, int L, GBuiltin g) {
  if (d < 1 || !(n > 0.0) || L < 1) throw std::invalid_argument("gaussian problem needs d >= 1, n > 0, L >= 1");
  ProblemSpec p;
  p.name = "gaussian";
  p.d = d;
  p.n = n;
  p.L = L;
  p.x0 = Eigen::VectorXd::Zero(d);
  p.H = WeightMatrix::identity(d);
  p.u = [](std::span<const double> x) { return sq_norm(x) / 2.0; };
  p.u_deriv = [d](std::span<const double> x, int k) {
    switch (k) {
      case 0: return form_of(SymTensor::constant(d, sq_norm(x) / 2.0));
      case 1: return form_of(from_tuple_fn(1, d, [&](std::span<const int> t) { return x[t[0]]; }));
      case 2: return form_of(from_tuple_fn(2, d, [](std::span<const int> t) { return t[0] == t[1] ? 1.0 : 0.0; }));
      default: return form_of(SymTensor(k, d));
    }
  };
  p.envelope = true;
  attach_g(p, g);
  return p;
}

ProblemSpec stirling_problem(double n, int L) {
  if (!(n > 0.0) || L < 1) throw std::invalid_argument("stirling problem needs n > 0, L >= 1");
  ProblemSpec p;
  p.name = "stirling";
  p.d = 1;
  p.n = n;
  p.L = L;
  p.x0 = Eigen::VectorXd::Zero(1);
  p.H = WeightMatrix::identity(1);
  p.u = [](std::span<const double> x) {
    if (!(x[0] > -1.0)) return std::numeric_limits<double>::infinity();
    return x[0] - std::log1p(x[0]);
  };
  const Evaluator u = p.u;
  p.u_deriv = [u](std::span<const double> x, int k) {
    const double y = 1.0 + x[0];
    if (k == 0) return form_of(SymTensor::constant(1, u(x)));
    if (!(y > 0.0)) throw std::domain_error("stirling potential evaluated outside (-1, inf)");
    SymTensor t(k, 1);
    if (k == 1) {
      t.values()[0] = x[0] / y;
    } else {
      t.values()[0] = ((k % 2) ? -1.0 : 1.0) * std::tgamma(static_cast<double>(k)) / std::pow(y, k);
    }
    return form_of(std::move(t));
  };
  p.envelope = true;
  attach_g(p, GBuiltin::constant);
  return p;
}

template <Scalar S>
BasicSymTensor<S> quartic_fourth_tensor(int d) {
  BasicSymTensor<S> t(4, d);
  std::size_t i = 0;
  t.for_each([&](std::span<const int> e, const S&) {
    S v = S(0);
    bool all_even = true;
    int nonzero = 0;
    for (int x : e) {
      if (x % 2) all_even = false;
      if (x) ++nonzero;
    }
    if (all_even) v = nonzero == 1 ? S(1) : from_ratio<S>(1, 3);
    t.values()[i++] = v;
  });
  return t;
}

namespace {

template <Scalar S>
std::vector<BasicSymTensor<S>> exact_fjet(int d, int order, GBuiltin g) {
  std::vector<BasicSymTensor<S>> f;
  for (int k = 0; k <= order; ++k) f.emplace_back(k, d);
  f[0].values()[0] = S(1);
  if (g == GBuiltin::quadratic && order >= 2) {
    for (int i = 0; i < d; ++i) f[2].at(MultiIndex::unit(d, i, 2)) = S(2);
  } else if (g == GBuiltin::linear && order >= 1) {
    if constexpr (is_exact_v<S>) {
      const double r = std::sqrt(static_cast<double>(d));
      if (r != std::floor(r)) throw std::invalid_argument("linear g has an irrational gradient unless d is a square");
      for (int i = 0; i < d; ++i) f[1].values()[static_cast<std::size_t>(i)] = from_ratio<S>(1, static_cast<long>(r));
    } else {
      for (int i = 0; i < d; ++i) f[1].values()[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(static_cast<double>(d));
    }
  }
  return f;
}

}  // namespace

template <Scalar S>
BasicLocalJet<S> quartic_jet(int d, int L, GBuiltin g) {
  BasicLocalJet<S> j;
  j.fjet = exact_fjet<S>(d, 2 * L, g);
  for (int k = 3; k <= 2 * L + 2; ++k) j.vjet.push_back(k == 4 ? quartic_fourth_tensor<S>(d) : BasicSymTensor<S>(k, d));
  return j;
}

template <Scalar S>
BasicLocalJet<S> gaussian_jet(int d, int L, GBuiltin g) {
  BasicLocalJet<S> j;
  j.fjet = exact_fjet<S>(d, 2 * L, g);
  for (int k = 3; k <= 2 * L + 2; ++k) j.vjet.emplace_back(k, d);
  return j;
}

template <Scalar S>
BasicLocalJet<S> stirling_jet(int L) {
  BasicLocalJet<S> j;
  j.fjet = exact_fjet<S>(1, 2 * L, GBuiltin::constant);
  for (int k = 3; k <= 2 * L + 2; ++k) {
    BasicSymTensor<S> t(k, 1);
    t.values()[0] = (k % 2 ? S(-1) : S(1)) * factorial_of<S>(k - 1);
    j.vjet.push_back(std::move(t));
  }
  return j;
}

template SymTensor quartic_fourth_tensor<double>(int);
template ExactSymTensor quartic_fourth_tensor<Rational>(int);
template LocalJet quartic_jet<double>(int, int, GBuiltin);
template ExactLocalJet quartic_jet<Rational>(int, int, GBuiltin);
template LocalJet gaussian_jet<double>(int, int, GBuiltin);
template ExactLocalJet gaussian_jet<Rational>(int, int, GBuiltin);
template LocalJet stirling_jet<double>(int);
template ExactLocalJet stirling_jet<Rational>(int);

ProblemInput make_builtin(const BuiltinRequest& req) {
  ProblemInput in;
  std::string name = req.name;
  if (name == "stirling1d") name = "stirling";
  in.builtin = name;
  in.g = req.g;
  in.d = req.d;
  in.n = req.n;
  in.L = req.L;
  in.seed = req.seed;
  if (req.L < 1) throw std::invalid_argument("L must be at least 1");
  const GBuiltin g = parse_g_builtin(req.g);
  if (name == "quartic") {
    in.spec = quartic_problem(req.d, req.n, req.L, g);
    if (g != GBuiltin::linear) in.exact_jet = quartic_jet<Rational>(req.d, req.L, g);
  } else if (name == "gaussian") {
    in.spec = gaussian_problem(req.d, req.n, req.L, g);
    if (g != GBuiltin::linear) in.exact_jet = gaussian_jet<Rational>(req.d, req.L, g);
  } else if (name == "stirling") {
    if (g != GBuiltin::constant) throw std::invalid_argument("stirling builtin supports only g = constant");
    in.d = 1;
    in.spec = stirling_problem(req.n, req.L);
    in.exact_jet = stirling_jet<Rational>(req.L);
  } else if (name == "glm-logistic" || name == "glm-quadratic") {
    if (req.n != std::floor(req.n) || req.n < 1) throw std::invalid_argument("glm builtins need an integer n");
    const LinkKind link = name == "glm-logistic" ? LinkKind::logistic : LinkKind::quadratic;
    auto inst = std::make_shared<const GlmInstance>(make_glm_instance(static_cast<int>(req.n), req.d, req.seed, link));
    in.spec = glm_potential(inst, req.L, g);
  } else {
    throw std::invalid_argument("unknown builtin '" + req.name +
                                "' (expected quartic, gaussian, stirling, glm-logistic or glm-quadratic)");
  }
  if (in.exact_jet)
    in.jet = to_double(*in.exact_jet);
  else
    in.jet = standardize(*in.spec);
  in.echo = Json{{"builtin", name}, {"d", in.d}, {"n", in.n}, {"L", in.L}, {"g", in.g}, {"seed", in.seed}};
  return in;
}

ProblemInput load_problem(const Json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("problem document must be a JSON object");
  const bool has_builtin = doc.contains("builtin");
  const bool has_jets = doc.contains("jets");
  if (has_builtin == has_jets) throw std::invalid_argument("problem document needs exactly one of 'builtin' or 'jets'");
  if (has_builtin) {
    BuiltinRequest r;
    r.name = doc.at("builtin").get<std::string>();
    r.d = doc.value("d", r.d);
    r.n = doc.value("n", r.n);
    r.L = doc.value("L", r.L);
    r.g = doc.value("g", r.g);
    r.seed = doc.value("seed", r.seed);
    return make_builtin(r);
  }
  ProblemInput in;
  const Json& jets = doc.at("jets");
  if (!doc.contains("n")) throw std::invalid_argument("jet problem is missing field 'n'");
  in.n = doc.at("n").get<double>();
  in.L = doc.value("L", 1);
  if (!(in.n > 0.0)) throw std::invalid_argument("field 'n' must be positive");
  if (in.L < 1) throw std::invalid_argument("field 'L' must be at least 1");
  ExactLocalJet ex;
  for (const auto& t : jets.at("f")) ex.fjet.push_back(tensor_from_json<Rational>(t));
  for (const auto& t : jets.at("v")) ex.vjet.push_back(tensor_from_json<Rational>(t));
  if (ex.fjet.empty()) throw std::invalid_argument("jets.f must contain at least the order-0 tensor");
  ex.validate();
  in.d = ex.dim();
  if (ex.max_f_order() < 2 * in.L || ex.max_v_order() < 2 * in.L + 2)
    throw std::invalid_argument("jets must reach f order 2L and v order 2L+2");
  in.jet = to_double(ex);
  in.exact_jet = std::move(ex);
  in.g = "jet";
  in.echo = Json{{"jets", jets}, {"d", in.d}, {"n", in.n}, {"L", in.L}};
  return in;
}

}  // namespace laplace
