#include "softtarget/adadelta.hpp"

#include <cmath>
#include <string>

#include "softtarget/errors.hpp"

namespace softtarget {

void adadelta_step(Matrix& params, const Matrix& grads, Matrix& e_g2, Matrix& e_dx2,
                   const AdadeltaConfig& config) {
    if (!params.same_shape(grads) || !params.same_shape(e_g2) || !params.same_shape(e_dx2)) {
        throw ShapeError("adadelta_step: params " + params.shape_str() + ", grads " +
                         grads.shape_str() + ", E[g2] " + e_g2.shape_str() + ", E[dx2] " +
                         e_dx2.shape_str() + " must all match");
    }
    const double rho = config.rho;
    const double eps = config.eps;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads.data()[i];
        double& eg2 = e_g2.data()[i];
        double& edx2 = e_dx2.data()[i];
        eg2 = rho * eg2 + (1.0 - rho) * g * g;
        const double dx = -(std::sqrt(edx2 + eps) / std::sqrt(eg2 + eps)) * g;
        edx2 = rho * edx2 + (1.0 - rho) * dx * dx;
        params.data()[i] += dx;
    }
}

AdadeltaState::AdadeltaState(const Network& net, AdadeltaConfig config) : config_(config) {
    if (!(config_.rho > 0.0 && config_.rho < 1.0)) {
        throw ValueError("AdadeltaState: rho must lie in (0, 1), got " + std::to_string(config_.rho));
    }
    if (!(config_.eps > 0.0)) {
        throw ValueError("AdadeltaState: eps must be positive, got " + std::to_string(config_.eps));
    }
    for (const Matrix* p : net.param_matrices()) {
        e_g2_.emplace_back(p->rows(), p->cols());
        e_dx2_.emplace_back(p->rows(), p->cols());
    }
}

void AdadeltaState::step(Network& net, const Gradients& grads) {
    auto params = net.param_matrices();
    if (grads.weights.size() != net.dense_count() || grads.biases.size() != net.dense_count()) {
        throw ShapeError("AdadeltaState::step: gradient count does not match the network");
    }
    if (params.size() != e_g2_.size()) {
        throw ShapeError("AdadeltaState::step: state was built for a different network");
    }
    for (std::size_t d = 0; d < net.dense_count(); ++d) {
        adadelta_step(*params[2 * d], grads.weights[d], e_g2_[2 * d], e_dx2_[2 * d], config_);
        adadelta_step(*params[2 * d + 1], grads.biases[d], e_g2_[2 * d + 1], e_dx2_[2 * d + 1],
                      config_);
    }
}

AdadeltaState AdadeltaState::restore(AdadeltaConfig config, std::vector<Matrix> e_g2,
                                     std::vector<Matrix> e_dx2) {
    if (e_g2.size() != e_dx2.size()) {
        throw ValueError("AdadeltaState::restore: accumulator lists differ in length");
    }
    AdadeltaState state;
    state.config_ = config;
    state.e_g2_ = std::move(e_g2);
    state.e_dx2_ = std::move(e_dx2);
    return state;
}

}  // namespace softtarget
