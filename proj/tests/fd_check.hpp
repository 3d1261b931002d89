// Finite-difference gradient oracle shared by the unit and acceptance suites.
// Stays on the inference path (no dropout networks), independent of backward().
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "softtarget/loss.hpp"
#include "softtarget/network.hpp"

namespace softtarget::testing {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t params_checked = 0;
    std::size_t networks_checked = 0;
    bool ok = true;
};

inline double composite_loss(const Network& net, const Matrix& x, const Matrix& targets) {
    return cross_entropy(net.infer(x), targets).loss;
}

/// Checks every parameter of `net` against central differences of the
/// cross-entropy loss. h = 1e-5; passes when the relative error is < 1e-5
/// (an absolute escape of 1e-8 covers gradients that are themselves ~0).
inline void check_network_gradients(Network& net, const Matrix& x, const Matrix& targets,
                                    GradCheckReport& report) {
    Rng unused(0);
    const auto [probs, trace] = net.forward(x, unused);
    const Gradients analytic = net.backward(trace, cross_entropy(probs, targets).grad_logits);

    std::vector<Matrix> analytic_flat;
    for (std::size_t d = 0; d < net.dense_count(); ++d) {
        analytic_flat.push_back(analytic.weights[d]);
        analytic_flat.push_back(analytic.biases[d]);
    }

    constexpr double h = 1e-5;
    auto params = net.param_matrices();
    for (std::size_t p = 0; p < params.size(); ++p) {
        for (std::size_t i = 0; i < params[p]->size(); ++i) {
            double& theta = params[p]->data()[i];
            const double saved = theta;
            theta = saved + h;
            const double up = composite_loss(net, x, targets);
            theta = saved - h;
            const double down = composite_loss(net, x, targets);
            theta = saved;

            const double fd = (up - down) / (2.0 * h);
            const double bp = analytic_flat[p].data()[i];
            const double abs_err = std::abs(fd - bp);
            const double rel = abs_err / std::max({std::abs(fd), std::abs(bp), 1e-300});
            // Gradients that are themselves at finite-difference noise level
            // only need the absolute bound; everything else the relative one.
            if (std::max(std::abs(fd), std::abs(bp)) > 1e-8) {
                report.max_rel_error = std::max(report.max_rel_error, rel);
            }
            if (abs_err > 1e-8 && rel >= 1e-5) report.ok = false;
            ++report.params_checked;
        }
    }
    ++report.networks_checked;
}

/// True when some ReLU pre-activation sits closer to its kink than `margin`.
/// Central differences are ill-posed there (the loss is not differentiable in
/// the kink's h-neighborhood), so such batches are resampled.
inline bool near_relu_kink(const Network& net, const Matrix& x, double margin) {
    Rng unused(0);
    const auto [probs, trace] = net.forward(x, unused);
    const auto& layers = net.layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].kind != LayerKind::Relu) continue;
        for (double z : trace.inputs[i].data()) {
            if (std::abs(z) < margin) return true;
        }
    }
    return false;
}

/// Random small network (<= 3 Dense layers, <= 10 units, no Dropout) with a
/// random batch and random soft targets, checked end to end.
inline void check_random_network(Rng& rng, GradCheckReport& report) {
    const std::size_t depth = 1 + rng.next_below(3);
    const std::size_t batch = 2 + rng.next_below(5);
    std::size_t width = 2 + rng.next_below(9);

    std::vector<LayerSpec> specs;
    std::size_t in_dim = width;
    for (std::size_t d = 0; d < depth; ++d) {
        const std::size_t out = 2 + rng.next_below(9);
        specs.push_back(LayerSpec::dense(width, out));
        if (d + 1 < depth) specs.push_back(LayerSpec::relu());
        width = out;
    }
    specs.push_back(LayerSpec::softmax());

    Network net = Network::init(specs, rng);
    Matrix x(batch, in_dim);
    for (int attempt = 0; attempt < 100; ++attempt) {
        for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
        if (!near_relu_kink(net, x, 1e-4)) break;
    }
    Matrix target_logits(batch, width);
    for (double& v : target_logits.data()) v = rng.uniform(-2.0, 2.0);
    const Matrix targets = row_softmax(target_logits);

    check_network_gradients(net, x, targets, report);
}

inline GradCheckReport run_gradcheck(std::uint64_t seed, std::size_t networks) {
    Rng rng(seed);
    GradCheckReport report;
    for (std::size_t n = 0; n < networks; ++n) check_random_network(rng, report);
    return report;
}

}  // namespace softtarget::testing
