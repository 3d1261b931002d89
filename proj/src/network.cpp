#include "softtarget/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "softtarget/errors.hpp"

namespace softtarget {

const char* layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::Dense: return "Dense";
        case LayerKind::Relu: return "ReLU";
        case LayerKind::Softmax: return "Softmax";
        case LayerKind::Dropout: return "Dropout";
    }
    return "?";
}

void Network::validate() const {
    if (layers_.empty()) throw ValueError("Network: layer list is empty");
    std::size_t width = 0;  // 0 = not yet pinned by a Dense layer
    std::size_t dense_seen = 0;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const LayerSpec& spec = layers_[i];
        switch (spec.kind) {
            case LayerKind::Dense:
                if (spec.in == 0 || spec.out == 0) {
                    throw ValueError("Network: Dense layer " + std::to_string(i) +
                                     " has zero in/out dimension");
                }
                if (width != 0 && spec.in != width) {
                    throw ValueError("Network: Dense layer " + std::to_string(i) + " expects " +
                                     std::to_string(spec.in) + " inputs but previous layer yields " +
                                     std::to_string(width));
                }
                width = spec.out;
                ++dense_seen;
                break;
            case LayerKind::Dropout:
                if (!(spec.p >= 0.0 && spec.p < 1.0)) {
                    throw ValueError("Network: Dropout p must lie in [0, 1), got " +
                                     std::to_string(spec.p));
                }
                if (i == 0) throw ValueError("Network: Dropout is not applied at the input layer");
                break;
            case LayerKind::Softmax:
                if (i + 1 != layers_.size()) {
                    throw ValueError("Network: Softmax is only supported as the final layer");
                }
                break;
            case LayerKind::Relu:
                break;
        }
    }
    if (weights_.size() != dense_seen || biases_.size() != dense_seen) {
        throw ValueError("Network: parameter store does not match Dense layer count");
    }
    std::size_t d = 0;
    for (const LayerSpec& spec : layers_) {
        if (spec.kind != LayerKind::Dense) continue;
        if (weights_[d].rows() != spec.in || weights_[d].cols() != spec.out ||
            biases_[d].rows() != 1 || biases_[d].cols() != spec.out) {
            throw ValueError("Network: parameter shapes for Dense layer " + std::to_string(d) +
                             " do not match its spec");
        }
        ++d;
    }
}

Network Network::init(std::vector<LayerSpec> specs, Rng& rng) {
    Network net;
    net.layers_ = std::move(specs);
    for (const LayerSpec& spec : net.layers_) {
        if (spec.kind != LayerKind::Dense) continue;
        const double limit = std::sqrt(6.0 / static_cast<double>(spec.in + spec.out));
        Matrix w(spec.in, spec.out);
        for (double& v : w.data()) v = rng.uniform(-limit, limit);
        net.weights_.push_back(std::move(w));
        net.biases_.emplace_back(1, spec.out);
    }
    net.validate();
    return net;
}

Network Network::with_params(std::vector<LayerSpec> specs, std::vector<Matrix> weights,
                             std::vector<Matrix> biases) {
    Network net;
    net.layers_ = std::move(specs);
    net.weights_ = std::move(weights);
    net.biases_ = std::move(biases);
    net.validate();
    return net;
}

std::size_t Network::input_dim() const noexcept {
    for (const LayerSpec& spec : layers_)
        if (spec.kind == LayerKind::Dense) return spec.in;
    return 0;
}

Matrix Network::run(const Matrix& x, RunMode mode, Rng* rng, ForwardTrace* trace) const {
    if (input_dim() != 0 && x.cols() != input_dim()) {
        throw ShapeError("forward: input is " + x.shape_str() + " but the network expects " +
                         std::to_string(input_dim()) + " columns");
    }
    Matrix cur = x;
    std::size_t d = 0;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const LayerSpec& spec = layers_[i];
        if (trace) trace->inputs.push_back(cur);
        switch (spec.kind) {
            case LayerKind::Dense: {
                Matrix next = matmul(cur, weights_[d]);
                const double* b = biases_[d].row_ptr(0);
                for (std::size_t r = 0; r < next.rows(); ++r) {
                    double* row = next.row_ptr(r);
                    for (std::size_t c = 0; c < next.cols(); ++c) row[c] += b[c];
                }
                cur = std::move(next);
                ++d;
                break;
            }
            case LayerKind::Relu:
                for (double& v : cur.data()) v = v > 0.0 ? v : 0.0;
                break;
            case LayerKind::Softmax:
                cur = row_softmax(cur);
                break;
            case LayerKind::Dropout: {
                if (mode == RunMode::Infer || spec.p == 0.0) {
                    if (trace) trace->masks.emplace_back();
                    break;
                }
                const double scale = 1.0 / (1.0 - spec.p);
                Matrix mask(cur.rows(), cur.cols());
                for (double& v : mask.data()) v = rng->next_double() >= spec.p ? scale : 0.0;
                for (std::size_t j = 0; j < cur.size(); ++j) cur.data()[j] *= mask.data()[j];
                if (trace) trace->masks.push_back(std::move(mask));
                break;
            }
        }
        if (trace && spec.kind != LayerKind::Dropout) trace->masks.emplace_back();
    }
    if (trace) trace->output = cur;
    return cur;
}

Matrix Network::infer(const Matrix& x) const {
    return run(x, RunMode::Infer, nullptr, nullptr);
}

Matrix Network::infer_in_batches(const Matrix& x, std::size_t block_rows) const {
    if (block_rows == 0 || x.rows() <= block_rows) return infer(x);
    Matrix out;
    for (std::size_t r0 = 0; r0 < x.rows(); r0 += block_rows) {
        const std::size_t r1 = std::min(x.rows(), r0 + block_rows);
        Matrix block(r1 - r0, x.cols());
        std::memcpy(block.row_ptr(0), x.row_ptr(r0), (r1 - r0) * x.cols() * sizeof(double));
        Matrix probs = infer(block);
        if (out.empty()) out = Matrix(x.rows(), probs.cols());
        std::memcpy(out.row_ptr(r0), probs.row_ptr(0), probs.size() * sizeof(double));
    }
    return out;
}

std::pair<Matrix, ForwardTrace> Network::forward(const Matrix& x, Rng& rng) const {
    ForwardTrace trace;
    Matrix probs = run(x, RunMode::Train, &rng, &trace);
    return {std::move(probs), std::move(trace)};
}

Gradients Network::backward(const ForwardTrace& trace, const Matrix& grad_out) const {
    if (trace.inputs.size() != layers_.size() || trace.masks.size() != layers_.size()) {
        throw ShapeError("backward: trace does not match the network (got " +
                         std::to_string(trace.inputs.size()) + " cached layers, expected " +
                         std::to_string(layers_.size()) + ")");
    }
    if (!grad_out.same_shape(trace.output)) {
        throw ShapeError("backward: grad_out is " + grad_out.shape_str() +
                         " but the forward output was " + trace.output.shape_str());
    }
    Gradients grads;
    grads.weights.resize(weights_.size());
    grads.biases.resize(biases_.size());

    Matrix delta = grad_out;
    std::size_t d = weights_.size();
    for (std::size_t i = layers_.size(); i-- > 0;) {
        const LayerSpec& spec = layers_[i];
        const Matrix& input = trace.inputs[i];
        switch (spec.kind) {
            case LayerKind::Dense: {
                --d;
                grads.weights[d] = matmul(input.transposed(), delta);
                Matrix db(1, spec.out);
                for (std::size_t r = 0; r < delta.rows(); ++r) {
                    const double* row = delta.row_ptr(r);
                    for (std::size_t c = 0; c < spec.out; ++c) db(0, c) += row[c];
                }
                grads.biases[d] = std::move(db);
                if (i > 0) delta = matmul(delta, weights_[d].transposed());
                break;
            }
            case LayerKind::Relu:
                for (std::size_t j = 0; j < delta.size(); ++j) {
                    if (input.data()[j] <= 0.0) delta.data()[j] = 0.0;
                }
                break;
            case LayerKind::Softmax:
                // Fused with cross_entropy(): grad_out already holds the gradient
                // with respect to this layer's input.
                break;
            case LayerKind::Dropout: {
                const Matrix& mask = trace.masks[i];
                if (!mask.empty()) {
                    for (std::size_t j = 0; j < delta.size(); ++j)
                        delta.data()[j] *= mask.data()[j];
                }
                break;
            }
        }
    }
    return grads;
}

std::size_t Network::param_count() const noexcept {
    std::size_t n = 0;
    for (const Matrix& w : weights_) n += w.size();
    for (const Matrix& b : biases_) n += b.size();
    return n;
}

std::vector<Matrix*> Network::param_matrices() {
    std::vector<Matrix*> out;
    out.reserve(weights_.size() * 2);
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        out.push_back(&weights_[i]);
        out.push_back(&biases_[i]);
    }
    return out;
}

std::vector<const Matrix*> Network::param_matrices() const {
    std::vector<const Matrix*> out;
    out.reserve(weights_.size() * 2);
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        out.push_back(&weights_[i]);
        out.push_back(&biases_[i]);
    }
    return out;
}

}  // namespace softtarget
