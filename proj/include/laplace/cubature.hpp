#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>

namespace laplace {

using ScalarField = std::function<double(std::span<const double>)>;

struct CubatureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

// Adaptive degree-7/5 Genz-Malik cubature over the box [lo, hi], d >= 2.
CubatureResult genz_malik(const ScalarField& f, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, double abs_tol,
                          double rel_tol, std::size_t max_eval);

// Adaptive Gauss-Kronrod (61 points) on [a, b]; infinite limits allowed.
CubatureResult gauss_kronrod_1d(const std::function<double(double)>& f, double a, double b, double tol);

}  // namespace laplace
