#include <cmath>

#include "nipsr/nip_prior.hpp"

namespace nipsr {

namespace {

constexpr double kSurrogateGain = 22025.465794806718;  // e^10 - 1

constexpr int kNeighborOffsets[8][2] = {
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1},
};

bool use_surrogate(const NipConfig& cfg) {
    return cfg.alpha == 0.1 && cfg.smooth_surrogate;
}

// Filter responses at rounding-noise scale are treated as exact zeros.
// Without this a plane that is constant up to resampling roundoff is not
// a stationary point: the surrogate's slope near 0 (~2202.5) turns 1e-16
// wiggles into macroscopic gradient kicks.
constexpr double kResponseSnap = 1e-12;

double snap(double r) { return std::fabs(r) < kResponseSnap ? 0.0 : r; }

// Compensated accumulation; the penalty terms are all nonnegative, so the
// compensated sum is accurate to a few ulps regardless of term order and
// the filter-bank and brute-force routes agree to the pinned 1e-12.
struct KahanSum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        const double t = x - c;
        const double u = s + t;
        c = (u - s) - t;
        s = u;
    }
};

}  // namespace

Tensor FilterBank::as_weights() const {
    Tensor w(8, 1, 3, 3);
    for (int k = 0; k < 8; ++k)
        for (int i = 0; i < 9; ++i) w.plane(k, 0)[i] = kernels[k][i];
    return w;
}

FilterBank build_filter_bank() {
    FilterBank fb;
    for (int k = 0; k < 8; ++k) {
        fb.kernels[k].fill(0.0);
        fb.kernels[k][4] = 1.0;  // center
        const int dy = kNeighborOffsets[k][0];
        const int dx = kNeighborOffsets[k][1];
        fb.kernels[k][(1 + dy) * 3 + (1 + dx)] = -1.0;
    }
    return fb;
}

double NipConfig::resolved_lambda() const {
    if (sigma_n && sigma_r) return (*sigma_r) * (*sigma_r) / std::pow(*sigma_n, alpha);
    return lambda;
}

void NipConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= 2.0)) {
        throw ConfigError("alpha must be in (0, 2]");
    }
    if (alpha < 1.0 && !(alpha == 0.1 && smooth_surrogate)) {
        throw ConfigError(
            "alpha < 1 is only supported as alpha = 0.1 with the smooth surrogate enabled");
    }
    if (sigma_n && *sigma_n <= 0.0) throw ConfigError("sigma_n must be positive");
    if (sigma_r && *sigma_r <= 0.0) throw ConfigError("sigma_r must be positive");
    if (static_cast<bool>(sigma_n) != static_cast<bool>(sigma_r)) {
        throw ConfigError("sigma_n and sigma_r must be set together");
    }
    if (resolved_lambda() < 0.0) throw ConfigError("lambda must be >= 0");
}

double phi(double x, const NipConfig& cfg) {
    const double a = std::fabs(x);
    if (use_surrogate(cfg)) return 0.1 * std::log(kSurrogateGain * a + 1.0);
    return std::pow(a, cfg.alpha);
}

double phi_prime(double x, const NipConfig& cfg) {
    if (x == 0.0) return 0.0;
    const double s = x > 0.0 ? 1.0 : -1.0;
    const double a = std::fabs(x);
    if (use_surrogate(cfg)) return s * 0.1 * kSurrogateGain / (kSurrogateGain * a + 1.0);
    return s * cfg.alpha * std::pow(a, cfg.alpha - 1.0);
}

double pairwise_penalty_bruteforce(const ImagePlane& y, const NipConfig& cfg) {
    if (y.h < 3 || y.w < 3) throw ContractError("pairwise penalty: image must be at least 3x3");
    KahanSum acc;
    for (int i = 1; i + 1 < y.h; ++i) {
        for (int j = 1; j + 1 < y.w; ++j) {
            const double center = y.at(i, j);
            for (const auto& d : kNeighborOffsets) {
                acc.add(phi(snap(center - y.at(i + d[0], j + d[1])), cfg));
            }
        }
    }
    return acc.s;
}

namespace {

Tensor plane_as_tensor(const ImagePlane& p) {
    Tensor t(1, 1, p.h, p.w);
    t.data = p.v;
    return t;
}

// Valid-region responses of the 8-filter bank, shape [1,8,h-2,w-2].
Tensor bank_responses(const ImagePlane& y) {
    static const Tensor weights = build_filter_bank().as_weights();
    return conv2d_forward(plane_as_tensor(y), weights, std::vector<double>(8, 0.0), 0);
}

}  // namespace

double nip_penalty(const ImagePlane& y, const NipConfig& cfg) {
    if (y.h < 3 || y.w < 3) throw ContractError("nip_penalty: image must be at least 3x3");
    const Tensor resp = bank_responses(y);
    KahanSum acc;
    for (double r : resp.data) acc.add(phi(snap(r), cfg));
    return acc.s;
}

ImagePlane nip_penalty_grad(const ImagePlane& y, const NipConfig& cfg) {
    if (y.h < 3 || y.w < 3) throw ContractError("nip_penalty_grad: image must be at least 3x3");
    static const Tensor weights = build_filter_bank().as_weights();
    const Tensor x = plane_as_tensor(y);
    Tensor resp = conv2d_forward(x, weights, std::vector<double>(8, 0.0), 0);
    for (double& r : resp.data) r = phi_prime(snap(r), cfg);
    // Transpose of the valid convolution scatters phi' back to the input.
    const ConvGrads g = conv2d_backward(x, weights, 0, resp);
    ImagePlane out(y.h, y.w);
    out.v = g.x.data;
    return out;
}

LossResult total_loss(const Tensor& y_h, const Tensor& y_g, const NipConfig& cfg) {
    if (!y_h.same_shape(y_g)) throw ContractError("total_loss: y_h and y_g shapes differ");
    if (y_h.c != 1) throw ContractError("total_loss: channel axis must be 1");
    if (y_h.n < 1) throw ContractError("total_loss: empty batch");
    cfg.validate();
    const double lambda = cfg.resolved_lambda();
    const double inv_n = 1.0 / y_h.n;

    LossResult res;
    res.grad = Tensor(y_h.n, 1, y_h.h, y_h.w);
    const std::size_t plane = static_cast<std::size_t>(y_h.h) * y_h.w;
    for (int b = 0; b < y_h.n; ++b) {
        const double* ph = y_h.plane(b, 0);
        const double* pg = y_g.plane(b, 0);
        double* pd = res.grad.plane(b, 0);
        double mse = 0.0;
        for (std::size_t i = 0; i < plane; ++i) {
            const double d = ph[i] - pg[i];
            mse += d * d;
            pd[i] = 2.0 * d * inv_n;
        }
        res.mse_term += mse * inv_n;

        if (lambda != 0.0) {
            ImagePlane yp(y_h.h, y_h.w);
            yp.v.assign(ph, ph + plane);
            res.nip_term += lambda * nip_penalty(yp, cfg) * inv_n;
            const ImagePlane pg_nip = nip_penalty_grad(yp, cfg);
            for (std::size_t i = 0; i < plane; ++i) pd[i] += lambda * pg_nip.v[i] * inv_n;
        }
    }
    res.loss = res.mse_term + res.nip_term;
    if (!std::isfinite(res.loss)) throw NumericError("total_loss: non-finite loss");
    return res;
}

}  // namespace nipsr
