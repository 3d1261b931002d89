#pragma once

#include <cstddef>
#include <string>

namespace softtarget {

enum class LayerKind { Dense, Relu, Softmax, Dropout };

/// One layer of a feed-forward stack. Only Dense layers carry parameters.
struct LayerSpec {
    LayerKind kind = LayerKind::Dense;
    std::size_t in = 0;   // Dense only
    std::size_t out = 0;  // Dense only
    double p = 0.0;       // Dropout only, keep-out probability in [0, 1)

    static LayerSpec dense(std::size_t in, std::size_t out) {
        return LayerSpec{LayerKind::Dense, in, out, 0.0};
    }
    static LayerSpec relu() { return LayerSpec{LayerKind::Relu, 0, 0, 0.0}; }
    static LayerSpec softmax() { return LayerSpec{LayerKind::Softmax, 0, 0, 0.0}; }
    static LayerSpec dropout(double p) { return LayerSpec{LayerKind::Dropout, 0, 0, p}; }
};

const char* layer_kind_name(LayerKind kind);

}  // namespace softtarget
