#ifndef NIPSR_TENSOR_HPP
#define NIPSR_TENSOR_HPP

#include <cstdint>
#include <vector>

#include "nipsr/errors.hpp"

namespace nipsr {

// Dense 4-axis array (batch, channel, height, width), row-major with the
// width axis fastest. All network math runs on these.
struct Tensor {
    int n = 0;
    int c = 0;
    int h = 0;
    int w = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_, double fill = 0.0);

    std::int64_t size() const { return static_cast<std::int64_t>(n) * c * h * w; }

    double& at(int b, int ch, int y, int x) {
        return data[((static_cast<std::int64_t>(b) * c + ch) * h + y) * w + x];
    }
    double at(int b, int ch, int y, int x) const {
        return data[((static_cast<std::int64_t>(b) * c + ch) * h + y) * w + x];
    }

    double* plane(int b, int ch) {
        return data.data() + (static_cast<std::int64_t>(b) * c + ch) * h * w;
    }
    const double* plane(int b, int ch) const {
        return data.data() + (static_cast<std::int64_t>(b) * c + ch) * h * w;
    }

    bool same_shape(const Tensor& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }

    // Throws NumericError if any element is NaN or infinite.
    void check_finite(const char* what) const;
};

// out[b,o,i,j] = bias[o] + sum_{c,u,v} weights[o,c,u,v] * x_pad[b,c,i+u,j+v]
// with zero padding of `pad` pixels on each side. Output spatial size is
// h - kh + 1 + 2*pad by w - kw + 1 + 2*pad.
Tensor conv2d_forward(const Tensor& x, const Tensor& weights,
                      const std::vector<double>& bias, int pad);

struct ConvGrads {
    Tensor x;
    Tensor w;
    std::vector<double> b;
};

// Exact gradients of sum(grad_out .* conv2d_forward(x, weights, bias, pad))
// with respect to x, weights and bias.
ConvGrads conv2d_backward(const Tensor& x, const Tensor& weights, int pad,
                          const Tensor& grad_out);

Tensor relu(const Tensor& x);

// Passes grad where x > 0, zero elsewhere (zero exactly at x == 0).
Tensor relu_backward(const Tensor& x, const Tensor& grad_out);

}  // namespace nipsr

#endif
