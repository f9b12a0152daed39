#include "nipsr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nipsr {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ContractError(msg);
}

// Copies one input plane into a zero-padded scratch buffer.
void pad_plane(const double* src, int h, int w, int pad, std::vector<double>& dst) {
    const int ph = h + 2 * pad;
    const int pw = w + 2 * pad;
    dst.assign(static_cast<std::size_t>(ph) * pw, 0.0);
    for (int y = 0; y < h; ++y) {
        std::copy(src + static_cast<std::size_t>(y) * w,
                  src + static_cast<std::size_t>(y + 1) * w,
                  dst.begin() + static_cast<std::size_t>(y + pad) * pw + pad);
    }
}

}  // namespace

Tensor::Tensor(int n_, int c_, int h_, int w_, double fill) : n(n_), c(c_), h(h_), w(w_) {
    require(n >= 0 && c >= 0 && h >= 0 && w >= 0, "tensor shape axes must be non-negative");
    data.assign(static_cast<std::size_t>(size()), fill);
}

void Tensor::check_finite(const char* what) const {
    for (double v : data) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string(what) + ": non-finite tensor element");
        }
    }
}

Tensor conv2d_forward(const Tensor& x, const Tensor& weights,
                      const std::vector<double>& bias, int pad) {
    require(pad >= 0, "conv2d_forward: pad must be >= 0");
    require(weights.c == x.c, "conv2d_forward: channel axis mismatch (x.c=" +
                                  std::to_string(x.c) + ", weights.ci=" +
                                  std::to_string(weights.c) + ")");
    require(static_cast<int>(bias.size()) == weights.n,
            "conv2d_forward: bias length must equal output-channel axis");
    const int oh = x.h - weights.h + 1 + 2 * pad;
    const int ow = x.w - weights.w + 1 + 2 * pad;
    require(oh >= 1 && ow >= 1, "conv2d_forward: kernel does not fit padded input (height/width axis)");

    Tensor out(x.n, weights.n, oh, ow);
    std::vector<double> padded;
    const int pw = x.w + 2 * pad;

    for (int b = 0; b < x.n; ++b) {
        for (int ci = 0; ci < x.c; ++ci) {
            pad_plane(x.plane(b, ci), x.h, x.w, pad, padded);
            for (int o = 0; o < weights.n; ++o) {
                double* out_p = out.plane(b, o);
                const double* w_k = weights.plane(o, ci);
                for (int u = 0; u < weights.h; ++u) {
                    for (int v = 0; v < weights.w; ++v) {
                        const double wv = w_k[u * weights.w + v];
                        if (wv == 0.0) continue;
                        for (int i = 0; i < oh; ++i) {
                            const double* src = padded.data() + static_cast<std::size_t>(i + u) * pw + v;
                            double* dst = out_p + static_cast<std::size_t>(i) * ow;
                            for (int j = 0; j < ow; ++j) dst[j] += wv * src[j];
                        }
                    }
                }
            }
        }
        for (int o = 0; o < weights.n; ++o) {
            double* out_p = out.plane(b, o);
            const double bo = bias[static_cast<std::size_t>(o)];
            if (bo == 0.0) continue;
            for (std::int64_t i = 0; i < static_cast<std::int64_t>(oh) * ow; ++i) out_p[i] += bo;
        }
    }
    out.check_finite("conv2d_forward");
    return out;
}

ConvGrads conv2d_backward(const Tensor& x, const Tensor& weights, int pad,
                          const Tensor& grad_out) {
    require(pad >= 0, "conv2d_backward: pad must be >= 0");
    require(weights.c == x.c, "conv2d_backward: channel axis mismatch");
    const int oh = x.h - weights.h + 1 + 2 * pad;
    const int ow = x.w - weights.w + 1 + 2 * pad;
    require(grad_out.n == x.n && grad_out.c == weights.n && grad_out.h == oh && grad_out.w == ow,
            "conv2d_backward: grad_out shape does not match forward output shape");

    ConvGrads g;
    g.x = Tensor(x.n, x.c, x.h, x.w);
    g.w = Tensor(weights.n, weights.c, weights.h, weights.w);
    g.b.assign(static_cast<std::size_t>(weights.n), 0.0);

    const int ph = x.h + 2 * pad;
    const int pw = x.w + 2 * pad;
    std::vector<double> padded;
    std::vector<double> grad_padded(static_cast<std::size_t>(ph) * pw);

    for (int b = 0; b < x.n; ++b) {
        for (int o = 0; o < weights.n; ++o) {
            const double* go = grad_out.plane(b, o);
            double acc = 0.0;
            for (std::int64_t i = 0; i < static_cast<std::int64_t>(oh) * ow; ++i) acc += go[i];
            g.b[static_cast<std::size_t>(o)] += acc;
        }
        for (int ci = 0; ci < x.c; ++ci) {
            pad_plane(x.plane(b, ci), x.h, x.w, pad, padded);
            std::fill(grad_padded.begin(), grad_padded.end(), 0.0);
            for (int o = 0; o < weights.n; ++o) {
                const double* go = grad_out.plane(b, o);
                double* gw = g.w.plane(o, ci);
                const double* w_k = weights.plane(o, ci);
                for (int u = 0; u < weights.h; ++u) {
                    for (int v = 0; v < weights.w; ++v) {
                        const double wv = w_k[u * weights.w + v];
                        double acc = 0.0;
                        for (int i = 0; i < oh; ++i) {
                            const double* src = padded.data() + static_cast<std::size_t>(i + u) * pw + v;
                            const double* go_row = go + static_cast<std::size_t>(i) * ow;
                            double* gp_row = grad_padded.data() + static_cast<std::size_t>(i + u) * pw + v;
                            for (int j = 0; j < ow; ++j) {
                                acc += go_row[j] * src[j];
                                gp_row[j] += wv * go_row[j];
                            }
                        }
                        gw[u * weights.w + v] += acc;
                    }
                }
            }
            double* gx = g.x.plane(b, ci);
            for (int y = 0; y < x.h; ++y) {
                const double* row = grad_padded.data() + static_cast<std::size_t>(y + pad) * pw + pad;
                for (int z = 0; z < x.w; ++z) gx[static_cast<std::size_t>(y) * x.w + z] = row[z];
            }
        }
    }
    g.x.check_finite("conv2d_backward (grad_x)");
    g.w.check_finite("conv2d_backward (grad_w)");
    return g;
}

Tensor relu(const Tensor& x) {
    Tensor out = x;
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    return out;
}

Tensor relu_backward(const Tensor& x, const Tensor& grad_out) {
    require(x.same_shape(grad_out), "relu_backward: grad_out shape must match x");
    Tensor out(x.n, x.c, x.h, x.w);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = x.data[i] > 0.0 ? grad_out.data[i] : 0.0;
    }
    return out;
}

}  // namespace nipsr
