#pragma once

#include "laplace/forms.hpp"
#include "laplace/sym_tensor.hpp"
#include "laplace/weight.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace laplace {

using Evaluator = std::function<double(std::span<const double>)>;
// Returns the k-th derivative of a function at x as a symmetric form.
using DerivativeProvider = std::function<std::shared_ptr<const SymmetricForm>(std::span<const double>, int)>;

// Integrand data for the normalized integral of g exp(-n u) around the minimizer x0.
struct ProblemSpec {
  std::string name;
  int d = 1;
  double n = 1.0;
  int L = 1;
  Evaluator u;
  Evaluator g;
  Eigen::VectorXd x0;
  WeightMatrix H;
  DerivativeProvider u_deriv;  // optional
  DerivativeProvider g_deriv;  // optional
  // Caller asserts |g| exp(-n(u - u(x0))) <= exp(-sqrt(dn) ||x - x0||_H / 4) away from x0.
  bool envelope = false;
};

// Derivatives of f and v at the origin; v's tensors start at order 3.
template <Scalar S>
struct BasicLocalJet {
  std::vector<BasicSymTensor<S>> fjet;  // orders 0..
  std::vector<BasicSymTensor<S>> vjet;  // orders 3..

  int dim() const { return fjet.empty() ? (vjet.empty() ? 1 : vjet.front().dim()) : fjet.front().dim(); }
  int max_f_order() const { return static_cast<int>(fjet.size()) - 1; }
  int max_v_order() const { return static_cast<int>(vjet.size()) + 2; }
  const BasicSymTensor<S>& f(int k) const { return fjet.at(static_cast<std::size_t>(k)); }
  const BasicSymTensor<S>& v(int k) const { return vjet.at(static_cast<std::size_t>(k - 3)); }

  void validate() const {
    const int d = dim();
    for (std::size_t i = 0; i < fjet.size(); ++i)
      if (fjet[i].dim() != d || fjet[i].order() != static_cast<int>(i))
        throw std::invalid_argument("f jet entry " + std::to_string(i) + " has the wrong order or dimension");
    for (std::size_t i = 0; i < vjet.size(); ++i)
      if (vjet[i].dim() != d || vjet[i].order() != static_cast<int>(i) + 3)
        throw std::invalid_argument("v jet entry " + std::to_string(i + 3) + " has the wrong order or dimension");
  }
};

using LocalJet = BasicLocalJet<double>;
using ExactLocalJet = BasicLocalJet<Rational>;

LocalJet to_double(const ExactLocalJet& j);

// epsilon = d / sqrt(n); U = {||x|| < R sqrt(d)} in standardized coordinates.
struct ExpansionSetup {
  int d = 1;
  double n = 1.0;
  double epsilon = 1.0;
  double R = 40.0;

  ExpansionSetup(int d_, double n_, double R_, bool strict = false);
  bool in_region(std::span<const double> y) const;
};

// Central-difference tensors of orders 0..k_max; step 0 selects h_k = (1e-16)^{1/(k+2)}.
std::vector<SymTensor> jet_from_finite_differences(const Evaluator& f, const Eigen::VectorXd& x0, int k_max,
                                                   double step = 0.0);
SymTensor finite_difference_tensor(const Evaluator& f, const Eigen::VectorXd& x, int k, double step = 0.0);

// k-th derivative form of u (or g) at x: user provider first, finite differences otherwise.
std::shared_ptr<const SymmetricForm> derivative_form(const ProblemSpec& p, bool of_g, const Eigen::VectorXd& x, int k);
SymTensor derivative_tensor(const ProblemSpec& p, bool of_g, const Eigen::VectorXd& x, int k);

Eigen::VectorXd gradient_at(const ProblemSpec& p, const Eigen::VectorXd& x);
Eigen::MatrixXd hessian_at(const ProblemSpec& p, const Eigen::VectorXd& x);

// Jets of f and v at 0: f to order 2L, v to order 2L+2.
LocalJet standardize(const ProblemSpec& p);
LocalJet standardize(const ProblemSpec& p, int f_order, int v_order);

// Damped Newton polish of a critical point of u.
Eigen::VectorXd refine_minimizer(const ProblemSpec& p, Eigen::VectorXd start, double tol = 1e-10, int max_iter = 100);

struct BallSupOptions {
  int points = 64;
  int polish_rounds = 12;
  std::uint64_t seed = 0xba11;
  AscentOptions ascent{};
  int ball_starts = 4;
  bool weighted = true;  // false: plain Euclidean operator norm, same H-ball
  std::vector<Eigen::VectorXd> extra_points;  // already-visited points, kept if inside the ball
};

struct BallSup {
  double value = 0.0;
  Eigen::VectorXd where;
  std::vector<Eigen::VectorXd> visited;
};

// Sampled sup of ||nabla^k u||_H (or g) over ||x - x0||_H <= radius.
BallSup ball_sup_norm(const ProblemSpec& p, bool of_g, int k, double radius, const BallSupOptions& opt = {});

struct TailCheck {
  bool satisfied = false;
  double coefficient = 0.0;
  double margin = 0.0;
  double c3 = 0.0;
};

// r/2 - r^2 c3 sqrt(d/n) / 6 against 1/3.
double tail_coefficient(double r, double c3, int d, double n);
TailCheck check_tail_condition(const ProblemSpec& p, double r, const BallSupOptions& opt = {});

}  // namespace laplace
