#include "softtarget/loss.hpp"

#include <algorithm>
#include <cmath>

#include "softtarget/errors.hpp"

namespace softtarget {

LossResult cross_entropy(const Matrix& probs, const Matrix& targets) {
    if (!probs.same_shape(targets)) {
        throw ShapeError("cross_entropy: probs are " + probs.shape_str() + " but targets are " +
                         targets.shape_str());
    }
    if (probs.rows() == 0) throw ValueError("cross_entropy: empty batch");
    const double inv_n = 1.0 / static_cast<double>(probs.rows());

    LossResult result;
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double t = targets.data()[i];
        if (t != 0.0) acc += t * std::log(std::max(probs.data()[i], kLossClip));
    }
    result.loss = -acc * inv_n;

    result.grad_logits = Matrix(probs.rows(), probs.cols());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        result.grad_logits.data()[i] = (probs.data()[i] - targets.data()[i]) * inv_n;
    }
    return result;
}

double accuracy(const Matrix& probs, const Matrix& targets) {
    if (!probs.same_shape(targets)) {
        throw ShapeError("accuracy: probs are " + probs.shape_str() + " but targets are " +
                         targets.shape_str());
    }
    if (probs.rows() == 0) throw ValueError("accuracy: empty batch");
    std::size_t correct = 0;
    for (std::size_t r = 0; r < probs.rows(); ++r) {
        const double* p = probs.row_ptr(r);
        const double* t = targets.row_ptr(r);
        std::size_t pa = 0, ta = 0;
        for (std::size_t c = 1; c < probs.cols(); ++c) {
            if (p[c] > p[pa]) pa = c;
            if (t[c] > t[ta]) ta = c;
        }
        if (pa == ta) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(probs.rows());
}

}  // namespace softtarget
