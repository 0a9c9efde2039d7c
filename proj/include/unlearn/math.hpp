// Numerically stable scalar and vector primitives used by the backends and
// the objectives. Header-only, templated on the Eigen scalar type.
#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Core>

namespace unlearn::math {

/// log(1 + exp(x)) without overflow.
template <class Scalar>
Scalar softplus(Scalar x) {
  using std::exp;
  using std::log1p;
  return x > Scalar(0) ? x + log1p(exp(-x)) : log1p(exp(x));
}

template <class Scalar>
Scalar sigmoid(Scalar x) {
  using std::exp;
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-x));
  const Scalar e = exp(x);
  return e / (Scalar(1) + e);
}

template <class Scalar>
Scalar log_sigmoid(Scalar x) {
  return -softplus(-x);
}

template <class Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = x.maxCoeff();
  if (!std::isfinite(static_cast<double>(m))) return m;
  return m + std::log((x.array() - m).exp().sum());
}

template <class Derived>
typename Derived::PlainObject log_softmax(const Eigen::MatrixBase<Derived>& x) {
  return (x.array() - log_sum_exp(x)).matrix();
}

template <class Derived>
typename Derived::PlainObject softmax(const Eigen::MatrixBase<Derived>& x) {
  return log_softmax(x).array().exp().matrix();
}

/// Column-wise log-softmax of a (vocabulary x positions) logit matrix.
template <class Derived>
typename Derived::PlainObject log_softmax_columns(const Eigen::MatrixBase<Derived>& logits) {
  typename Derived::PlainObject out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) out.col(c) = log_softmax(logits.col(c));
  return out;
}

/// KL(p || q) = sum p ln(p / q), with 0 ln 0 = 0.
template <class DerivedP, class DerivedQ>
typename DerivedP::Scalar kl_divergence(const Eigen::MatrixBase<DerivedP>& p, const Eigen::MatrixBase<DerivedQ>& q) {
  using Scalar = typename DerivedP::Scalar;
  Scalar total(0);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const Scalar pi = p(i);
    if (pi > Scalar(0)) total += pi * (std::log(pi) - std::log(static_cast<Scalar>(q(i))));
  }
  return total;
}

/// sum p ln p, with 0 ln 0 = 0.
template <class Derived>
typename Derived::Scalar negative_entropy(const Eigen::MatrixBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  Scalar total(0);
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > Scalar(0)) total += p(i) * std::log(p(i));
  return total;
}

/// Index of the maximum; ties go to the lowest index.
template <class Derived>
Eigen::Index argmax_first(const Eigen::MatrixBase<Derived>& x) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < x.size(); ++i)
    if (x(i) > x(best)) best = i;
  return best;
}

}  // namespace unlearn::math
