#ifndef CANTM_NUMERIC_HPP_
#define CANTM_NUMERIC_HPP_

#include <cmath>

#include <Eigen/Dense>

namespace cantm {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

//
// Column-wise softmax family. Every column of the argument is one logit
// vector; a plain Vector is a single column.
//

template <typename Derived>
auto log_sum_exp(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  const RowVector<Scalar> peak = logits.colwise().maxCoeff();
  return RowVector<Scalar>(
      ((logits.rowwise() - peak).array().exp().colwise().sum().log().matrix() + peak));
}

template <typename Derived>
auto log_softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  const RowVector<Scalar> lse = log_sum_exp(logits);
  return Eigen::Matrix<Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>(
      logits.rowwise() - lse);
}

template <typename Derived>
auto softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  return Eigen::Matrix<Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>(
      log_softmax(logits).array().exp());
}

template <typename Derived>
auto leaky_relu(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar slope) {
  return x.unaryExpr([slope](auto v) { return v >= 0 ? v : slope * v; });
}

// Elementwise derivative of leaky_relu, evaluated at the pre-activation.
template <typename Derived>
auto leaky_relu_grad(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar slope) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([slope](auto v) { return v >= 0 ? Scalar(1) : slope; });
}

// KL(N(mu, diag(exp(log_var))) || N(0, I)), one value per column.
template <typename DerivedMu, typename DerivedLv>
auto gaussian_kl(const Eigen::MatrixBase<DerivedMu>& mu, const Eigen::MatrixBase<DerivedLv>& log_var) {
  using Scalar = typename DerivedMu::Scalar;
  return RowVector<Scalar>(
      (Scalar(0.5) * (log_var.array().exp() + mu.array().square() - log_var.array() - Scalar(1)))
          .colwise()
          .sum()
          .matrix());
}

}  // namespace cantm

#endif  // CANTM_NUMERIC_HPP_
