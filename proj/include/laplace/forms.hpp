#pragma once

#include "laplace/sym_tensor.hpp"
#include "laplace/weight.hpp"

#include <cstdint>
#include <memory>
#include <span>

namespace laplace {

// A symmetric k-linear form accessed through u -> <T, u^k> and its gradient.
class SymmetricForm {
 public:
  virtual ~SymmetricForm() = default;
  virtual int order() const = 0;
  virtual int dim() const = 0;
  virtual double value_and_gradient(std::span<const double> u, std::span<double> grad) const = 0;
  virtual SymTensor materialize() const = 0;
};

class TensorForm final : public SymmetricForm {
 public:
  explicit TensorForm(SymTensor t) : t_(std::move(t)), poly_(t_) {}
  int order() const override { return t_.order(); }
  int dim() const override { return t_.dim(); }
  double value_and_gradient(std::span<const double> u, std::span<double> grad) const override {
    return poly_.value_and_gradient(u, grad);
  }
  SymTensor materialize() const override { return t_; }

 private:
  SymTensor t_;
  MonomialForm poly_;
};

// u -> <T, (A u)^k> for symmetric A.
class TransformedForm final : public SymmetricForm {
 public:
  TransformedForm(std::shared_ptr<const SymmetricForm> inner, Eigen::MatrixXd a)
      : inner_(std::move(inner)), a_(std::move(a)) {}
  int order() const override { return inner_->order(); }
  int dim() const override { return inner_->dim(); }
  double value_and_gradient(std::span<const double> u, std::span<double> grad) const override;
  SymTensor materialize() const override { return transform_slots(inner_->materialize(), a_); }

 private:
  std::shared_ptr<const SymmetricForm> inner_;
  Eigen::MatrixXd a_;
};

struct AscentOptions {
  int starts = 32;
  double tol = 1e-9;
  int max_iter = 500;
  std::uint64_t seed = 0x5eed;
  // Optional warm-start directions tried before the random ones.
  std::vector<Eigen::VectorXd> warm;
};

struct AscentResult {
  double value = 0.0;       // sup |<T, u^k>| found
  Eigen::VectorXd argmax;   // unit maximizer
  int iterations = 0;
  bool converged = false;
};

// sup over the Euclidean unit sphere of |<T, u^k>| by multi-start projected ascent.
AscentResult sphere_ascent(const SymmetricForm& form, const AscentOptions& opt = {});

// ||T||_H. Closed forms for k <= 2, ascent otherwise (a lower bound).
double operator_norm(const SymTensor& t, const WeightMatrix& h, const AscentOptions& opt = {});
double operator_norm(const SymTensor& t);

// Weighted norm of a streaming form.
AscentResult operator_norm_form(std::shared_ptr<const SymmetricForm> form, const WeightMatrix& h,
                                const AscentOptions& opt = {});

struct NormBracket {
  double lower = 0.0;
  double upper = 0.0;
};

// Angular grid over the H-unit circle (d <= 2) with a Lipschitz correction for the upper end.
NormBracket operator_norm_grid(const SymTensor& t, const WeightMatrix& h, int angles = 720);

}  // namespace laplace
