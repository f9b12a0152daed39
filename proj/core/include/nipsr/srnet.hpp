#ifndef NIPSR_SRNET_HPP
#define NIPSR_SRNET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nipsr/tensor.hpp"

namespace nipsr {

struct ConvLayer {
    Tensor w;               // [co, ci, 3, 3]
    std::vector<double> b;  // [co]
};

// Residual network: conv+ReLU repeated depth-1 times, then a final conv
// with no activation, and the input added back to the result. Channel
// plan 1 -> width -> ... -> width -> 1, all kernels 3x3 applied with
// pad 1 so spatial size is preserved. width is a test knob; the CLI pins
// it to 64.
struct SrNetwork {
    int depth = 0;
    int width = 64;
    std::vector<ConvLayer> layers;

    std::int64_t parameter_count() const;
};

// Hidden and first layers get N(0, sqrt(2/(ci*9))) weights and zero
// biases; the final layer is all zero, so a fresh network is exactly the
// identity map (the residual is zero).
SrNetwork init_network(int depth, std::uint64_t seed, int width = 64);

struct ForwardCache {
    Tensor input;
    std::vector<Tensor> pre;   // conv outputs per layer
    std::vector<Tensor> post;  // after activation (same as pre for the last layer)
};

// y = x + residual(x). x must be [n,1,h,w] with h,w >= 3. Pass a cache to
// keep the per-layer tensors needed by backward.
Tensor forward(const SrNetwork& net, const Tensor& x, ForwardCache* cache = nullptr);

struct LayerGrads {
    Tensor w;
    std::vector<double> b;
};

struct NetworkGrads {
    std::vector<LayerGrads> layers;
    Tensor input;  // includes the skip connection's unit path
};

// Exact gradients of sum(grad_y .* forward(net, x)) given the cache from
// the matching forward call.
NetworkGrads backward(const SrNetwork& net, const ForwardCache& cache, const Tensor& grad_y);

// Binary checkpoint: magic, version, depth, per-layer shape headers,
// little-endian 64-bit payload, trailing CRC-32. load verifies the CRC
// and the channel plan; pass expected_depth to also enforce the depth.
void save_checkpoint(const SrNetwork& net, const std::string& path);
SrNetwork load_checkpoint(const std::string& path, int expected_depth = 0);

}  // namespace nipsr

#endif
