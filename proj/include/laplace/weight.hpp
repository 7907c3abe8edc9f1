#pragma once

#include "laplace/sym_tensor.hpp"

#include <Eigen/Dense>

namespace laplace {

// Symmetric positive-definite weight H with cached H^{-1/2}.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  explicit WeightMatrix(Eigen::MatrixXd h);
  static WeightMatrix identity(int d) { return WeightMatrix(Eigen::MatrixXd::Identity(d, d)); }

  int dim() const { return static_cast<int>(h_.rows()); }
  const Eigen::MatrixXd& matrix() const { return h_; }
  const Eigen::MatrixXd& inv_sqrt() const { return inv_sqrt_; }
  const Eigen::MatrixXd& inverse() const { return inv_; }
  const Eigen::VectorXd& eigenvalues() const { return eig_; }
  double min_eigenvalue() const { return eig_.minCoeff(); }
  double log_det() const { return eig_.array().log().sum(); }
  bool is_identity() const { return is_identity_; }

  // ||v||_H = sqrt(v^T H v)
  double norm(const Eigen::VectorXd& v) const { return std::sqrt(v.dot(h_ * v)); }
  // Gradient convention: ||H^{-1/2} g||.
  double gradient_norm(const Eigen::VectorXd& g) const { return (inv_sqrt_ * g).norm(); }

 private:
  Eigen::MatrixXd h_;
  Eigen::MatrixXd inv_sqrt_;
  Eigen::MatrixXd inv_;
  Eigen::VectorXd eig_;
  bool is_identity_ = false;
};

// S(u1..uk) = T(A u1, ..., A uk) for a general square A.
SymTensor transform_slots(const SymTensor& t, const Eigen::MatrixXd& a);

// Slots contracted with H^{-1/2}: maps the derivative of u at x0 to that of v at 0.
SymTensor pushforward_jet(const SymTensor& t, const WeightMatrix& h);

}  // namespace laplace
