#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "rlgaf/errors.hpp"

// Scalar-generic numeric kernels over Eigen expressions. Everything here is
// pure and stable in the usual max-subtraction / log-sum-exp forms; the
// autodiff tape and the models call these rather than re-deriving them.

namespace rlgaf {

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum());
}

// Probability vector from logits, computed with max-subtraction.
template <typename Derived>
Eigen::Vector<typename Derived::Scalar, Eigen::Dynamic> softmax(
    const Eigen::MatrixBase<Derived>& logits) {
  if (logits.size() == 0) throw InvalidInputError("softmax: empty logits");
  if (!logits.allFinite()) throw InvalidInputError("softmax: non-finite logits");
  using Scalar = typename Derived::Scalar;
  Eigen::Vector<Scalar, Eigen::Dynamic> out =
      (logits.array() - logits.maxCoeff()).exp();
  out /= out.sum();
  return out;
}

template <typename Derived>
Eigen::Vector<typename Derived::Scalar, Eigen::Dynamic> log_softmax(
    const Eigen::MatrixBase<Derived>& logits) {
  if (logits.size() == 0) throw InvalidInputError("log_softmax: empty logits");
  if (!logits.allFinite())
    throw InvalidInputError("log_softmax: non-finite logits");
  using Scalar = typename Derived::Scalar;
  Eigen::Vector<Scalar, Eigen::Dynamic> out = logits;
  out.array() -= log_sum_exp(logits);
  return out;
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

// -[label*log(sigmoid(s)) + (1-label)*log(1-sigmoid(s))] in the stable
// max(s,0) - s*label + log1p(exp(-|s|)) form.
template <typename Scalar>
Scalar bce_with_logits(Scalar score, int label) {
  if (!std::isfinite(score))
    throw InvalidInputError("bce_with_logits: non-finite score");
  if (label != 0 && label != 1)
    throw InvalidInputError("bce_with_logits: label must be 0 or 1");
  return std::max(score, Scalar(0)) - score * Scalar(label) +
         std::log1p(std::exp(-std::abs(score)));
}

}  // namespace rlgaf
