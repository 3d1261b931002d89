#pragma once

#include <cstddef>
#include <vector>

#include "softtarget/matrix.hpp"
#include "softtarget/network.hpp"

namespace softtarget {

struct AdadeltaConfig {
    double rho = 0.95;  // decay of the running averages
    double eps = 1e-6;  // conditioning constant inside both square roots
};

/// One ADADELTA update, elementwise over a parameter matrix:
///   E[g^2]  <- rho * E[g^2]  + (1 - rho) * g^2
///   dx       = -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
///   E[dx^2] <- rho * E[dx^2] + (1 - rho) * dx^2
///   params  <- params + dx
/// All four matrices must share a shape.
void adadelta_step(Matrix& params, const Matrix& grads, Matrix& e_g2, Matrix& e_dx2,
                   const AdadeltaConfig& config);

/// Running accumulators for every parameter matrix of one network, in the order
/// Network::param_matrices() yields them. Owned by a single training loop.
class AdadeltaState {
public:
    AdadeltaState() = default;
    AdadeltaState(const Network& net, AdadeltaConfig config);

    /// Applies one update from `grads` to every Dense layer of `net`.
    void step(Network& net, const Gradients& grads);

    const AdadeltaConfig& config() const noexcept { return config_; }
    const std::vector<Matrix>& e_g2() const noexcept { return e_g2_; }
    const std::vector<Matrix>& e_dx2() const noexcept { return e_dx2_; }

    /// Rebuilds a state from checkpointed accumulators.
    static AdadeltaState restore(AdadeltaConfig config, std::vector<Matrix> e_g2,
                                 std::vector<Matrix> e_dx2);

private:
    AdadeltaConfig config_;
    std::vector<Matrix> e_g2_;
    std::vector<Matrix> e_dx2_;
};

}  // namespace softtarget
