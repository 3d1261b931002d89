#pragma once

#include "softtarget/matrix.hpp"

namespace softtarget {

/// Floor applied to probabilities inside the log, guarding exact zeros.
inline constexpr double kLossClip = 1e-12;

struct LossResult {
    double loss = 0.0;
    /// Fused softmax + cross-entropy gradient, (probs - targets) / N. Feed this
    /// straight into Network::backward() for a softmax-terminated network.
    Matrix grad_logits;
};

/// Mean categorical cross-entropy over rows:
///   loss = -(1/N) sum_i sum_k targets[i,k] * ln(max(probs[i,k], kLossClip)).
/// Targets may be soft distributions. Throws ShapeError on mismatch.
LossResult cross_entropy(const Matrix& probs, const Matrix& targets);

/// Fraction of rows whose argmax matches the target argmax (first index wins ties).
double accuracy(const Matrix& probs, const Matrix& targets);

}  // namespace softtarget
