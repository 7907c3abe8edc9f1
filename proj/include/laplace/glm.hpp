#pragma once

#include "laplace/builtins.hpp"
#include "laplace/problem.hpp"
#include "laplace/remainder.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace laplace {

enum class LinkKind { logistic, quadratic };
LinkKind parse_link(const std::string& name);
std::string link_name(LinkKind link);

// phi(t) = log(1 + e^t) and its derivatives through order k_max (k_max <= 14).
std::vector<double> logistic_derivs(double t, int k_max);
// phi(t) = t^2 / 2.
std::vector<double> quadratic_link_derivs(double t, int k_max);
std::vector<double> link_derivs(LinkKind link, double t, int k_max);

// n x d matrix of standard Gaussians, deterministic in seed.
Eigen::MatrixXd sample_design(int n, int d, std::uint64_t seed);
// Uniform point on the unit sphere, deterministic in seed.
Eigen::VectorXd sample_unit_vector(int d, std::uint64_t seed);

struct GlmInstance {
  LinkKind link = LinkKind::logistic;
  Eigen::MatrixXd X;   // rows X_i
  Eigen::VectorXd x0;  // ||x0|| = 1
  Eigen::VectorXd b;   // (1/n) sum phi'(X_i^T x0) X_i
  WeightMatrix H;      // (1/n) sum phi''(X_i^T x0) X_i X_i^T
  std::uint64_t seed = 0;
  int n() const { return static_cast<int>(X.rows()); }
  int d() const { return static_cast<int>(X.cols()); }
};

// Throws std::domain_error naming the smallest eigenvalue when H is singular.
GlmInstance make_glm_instance(Eigen::MatrixXd X, Eigen::VectorXd x0, LinkKind link = LinkKind::logistic,
                              std::uint64_t seed = 0);
GlmInstance make_glm_instance(int n, int d, std::uint64_t seed, LinkKind link = LinkKind::logistic);
// Smallest eigenvalue of H for a draw, without requiring it to be positive.
double glm_hessian_min_eigenvalue(int n, int d, std::uint64_t seed, LinkKind link = LinkKind::logistic);

// u -> <grad^k u(x), u^k> streamed over rows; order 1 includes the -b term, order 0 is u(x).
class GlmDerivativeForm final : public SymmetricForm {
 public:
  GlmDerivativeForm(std::shared_ptr<const GlmInstance> inst, Eigen::VectorXd x, int k);
  int order() const override { return k_; }
  int dim() const override { return inst_->d(); }
  double value_and_gradient(std::span<const double> u, std::span<double> grad) const override;
  SymTensor materialize() const override;

 private:
  std::shared_ptr<const GlmInstance> inst_;
  int k_;
  std::vector<double> w_;  // phi^{(k)}(X_i^T x) / n
  double u_value_ = 0.0;
};

double glm_u(const GlmInstance& inst, std::span<const double> x);

// u(x) = (1/n) sum phi(X_i^T x) - b^T x with analytic derivatives; n of the integral is the row count.
ProblemSpec glm_potential(std::shared_ptr<const GlmInstance> inst, int L, GBuiltin g = GBuiltin::constant);

struct GJet {
  double g0 = 1.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};
GJet g_jet(GBuiltin g, int d);

// Four-block A_2 with t_lm = X_l^T H^{-1} X_m.
double glm_a2(const GlmInstance& inst, const GJet& g);

struct GlmNormProfile {
  double lambda_min = 0.0;
  std::vector<double> unweighted0;  // sup_{|u|=1} |<grad^k u(x0), u^k>|, k = 0..k_max
  std::vector<double> unweightedR;  // sampled sup over the H-ball of radius R sqrt(d/n)
  DerivNormProfile profile0;        // unweighted * lambda_min^{-k/2}
  DerivNormProfile profileR;
  bool stagnated = false;
};

// u orders 3..k_max via unweighted ascent scaled by lambda_min^{-k/2}; g orders 0..2L H-weighted.
GlmNormProfile empirical_norm_profile(std::shared_ptr<const GlmInstance> inst, int k_max, double R, int L,
                                      GBuiltin g = GBuiltin::constant, const BallSupOptions& opt = {});

struct NormBandPoint {
  int d = 0;
  int n = 0;
  double mean_norm = 0.0;  // seed-average of the unweighted norm at x0
  double shape = 0.0;      // 1 + d^{k/2} / n
  double fitted_C = 0.0;
};

struct NormBandFit {
  int k = 3;
  std::vector<NormBandPoint> points;
  double band_ratio = 0.0;  // max C / min C
};

NormBandFit norm_band_fit(int k, const std::vector<std::pair<int, int>>& grid, int seeds, std::uint64_t seed0,
                          LinkKind link = LinkKind::logistic);

}  // namespace laplace
