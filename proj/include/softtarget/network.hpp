#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "softtarget/layers.hpp"
#include "softtarget/matrix.hpp"
#include "softtarget/rng.hpp"

namespace softtarget {

/// Everything the backward pass needs from a training-mode forward pass:
/// the input each layer saw, plus the scaled keep-masks drawn by Dropout layers.
struct ForwardTrace {
    std::vector<Matrix> inputs;  // inputs[i] = what layer i consumed
    std::vector<Matrix> masks;   // masks[i] nonempty only for Dropout layers
    Matrix output;
};

/// Per-Dense-layer parameter gradients, summed over the rows of grad_out.
struct Gradients {
    std::vector<Matrix> weights;  // parallel to the network's Dense layers
    std::vector<Matrix> biases;
};

/// Feed-forward stack of Dense / ReLU / Softmax / Dropout layers.
///
/// Conventions:
///  - Dropout is inverted: Train mode scales kept activations by 1/(1-p),
///    Infer mode is the identity. Dropout may not be the first layer.
///  - A Softmax layer may only appear in the final position. It is paired with
///    cross_entropy(): backward() expects grad_out with respect to the softmax
///    *input* (the fused softmax + cross-entropy gradient), so the Softmax layer
///    itself passes gradients through unchanged.
class Network {
public:
    Network() = default;

    /// Glorot-uniform weights in +-sqrt(6 / (in + out)), zero biases.
    /// Deterministic under the rng stream.
    static Network init(std::vector<LayerSpec> specs, Rng& rng);

    /// Assembles a network from existing parameters (checkpoint load, tests).
    static Network with_params(std::vector<LayerSpec> specs, std::vector<Matrix> weights,
                               std::vector<Matrix> biases);

    const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
    std::size_t dense_count() const noexcept { return weights_.size(); }

    Matrix& weight(std::size_t dense_idx) { return weights_[dense_idx]; }
    const Matrix& weight(std::size_t dense_idx) const { return weights_[dense_idx]; }
    Matrix& bias(std::size_t dense_idx) { return biases_[dense_idx]; }
    const Matrix& bias(std::size_t dense_idx) const { return biases_[dense_idx]; }

    /// 0 when the network has no Dense layer (input width is then unconstrained).
    std::size_t input_dim() const noexcept;

    /// Inference pass: Dropout off, consumes no randomness.
    Matrix infer(const Matrix& x) const;

    /// Inference over row blocks of at most `block_rows`, bounding peak memory.
    /// Numerically identical to infer() since every op is row-independent.
    Matrix infer_in_batches(const Matrix& x, std::size_t block_rows = 8192) const;

    /// Training-mode pass: draws dropout masks from `rng`, returns the output
    /// and the trace required by backward().
    std::pair<Matrix, ForwardTrace> forward(const Matrix& x, Rng& rng) const;

    /// Backpropagates grad_out (see class comment for the Softmax convention)
    /// and returns parameter gradients, sum-reduced over rows.
    Gradients backward(const ForwardTrace& trace, const Matrix& grad_out) const;

    std::size_t param_count() const noexcept;

    /// Flat views over all parameter matrices (W0, b0, W1, b1, ...), used by the
    /// optimizer and gradient checking.
    std::vector<Matrix*> param_matrices();
    std::vector<const Matrix*> param_matrices() const;

private:
    enum class RunMode { Train, Infer };
    Matrix run(const Matrix& x, RunMode mode, Rng* rng, ForwardTrace* trace) const;
    void validate() const;

    std::vector<LayerSpec> layers_;
    std::vector<Matrix> weights_;
    std::vector<Matrix> biases_;
};

}  // namespace softtarget
