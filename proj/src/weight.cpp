#include "laplace/weight.hpp"

#include <stdexcept>
#include <string>

namespace laplace {

WeightMatrix::WeightMatrix(Eigen::MatrixXd h) : h_(std::move(h)) {
  if (h_.rows() != h_.cols() || h_.rows() == 0) throw std::invalid_argument("weight matrix must be square");
  const double scale = std::max(1.0, h_.cwiseAbs().maxCoeff());
  if ((h_ - h_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("weight matrix is not symmetric");
  h_ = 0.5 * (h_ + h_.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h_);
  eig_ = es.eigenvalues();
  if (!(eig_.minCoeff() > 0.0))
    throw std::invalid_argument("weight matrix is not positive definite (smallest eigenvalue " +
                                std::to_string(eig_.minCoeff()) + ")");
  const Eigen::MatrixXd& q = es.eigenvectors();
  inv_sqrt_ = q * eig_.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
  inv_ = q * eig_.cwiseInverse().asDiagonal() * q.transpose();
  is_identity_ = h_.isIdentity(0.0);
  if (is_identity_) {
    inv_sqrt_.setIdentity();
    inv_.setIdentity();
  }
}

SymTensor transform_slots(const SymTensor& t, const Eigen::MatrixXd& a) {
  const int d = t.dim();
  const int k = t.order();
  if (a.rows() != d || a.cols() != d) throw std::invalid_argument("pushforward: dimension mismatch");
  if (k == 0) return t;
  std::size_t total = 1;
  for (int i = 0; i < k; ++i) {
    total *= static_cast<std::size_t>(d);
    if (total > 50'000'000) throw EnumerationTooLarge("pushforward: dense workspace too large");
  }
  // Dense copy, last index fastest.
  std::vector<double> cur(total);
  std::vector<int> tuple(static_cast<std::size_t>(k), 0);
  for (std::size_t pos = 0; pos < total; ++pos) {
    cur[pos] = t.entry(tuple);
    for (int m = k - 1; m >= 0; --m) {
      if (++tuple[m] < d) break;
      tuple[m] = 0;
    }
  }
  // Contract one slot at a time: new[.., i, ..] = sum_j old[.., j, ..] a(j, i).
  std::vector<double> next(total);
  std::size_t inner = 1;
  for (int m = k - 1; m >= 0; --m) {
    const std::size_t outer = total / (inner * d);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * d * inner + in;
        for (int i = 0; i < d; ++i) {
          double s = 0.0;
          for (int j = 0; j < d; ++j) s += cur[base + j * inner] * a(j, i);
          next[base + i * inner] = s;
        }
      }
    }
    cur.swap(next);
    inner *= d;
  }
  SymTensor out(k, d);
  std::size_t r = 0;
  out.for_each([&](std::span<const int> e, double) {
    std::size_t pos = 0;
    for (int i = 0; i < d; ++i)
      for (int c = 0; c < e[i]; ++c) pos = pos * d + i;
    out.values()[r++] = cur[pos];
  });
  return out;
}

SymTensor pushforward_jet(const SymTensor& t, const WeightMatrix& h) {
  if (t.dim() != h.dim()) throw std::invalid_argument("pushforward: dimension mismatch");
  if (h.is_identity()) return t;
  return transform_slots(t, h.inv_sqrt());
}

}  // namespace laplace
