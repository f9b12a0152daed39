#ifndef NIPSR_NIP_PRIOR_HPP
#define NIPSR_NIP_PRIOR_HPP

#include <array>
#include <optional>

#include "nipsr/image.hpp"
#include "nipsr/tensor.hpp"

namespace nipsr {

// The 8 fixed 3x3 difference kernels of the natural-image-prior penalty.
// Each kernel is +1 at the center and -1 at one neighbor, so a constant
// image produces zero response everywhere.
struct FilterBank {
    // Kernels stored row-major, neighbor order NW, N, NE, W, E, SW, S, SE.
    std::array<std::array<double, 9>, 8> kernels;

    // Weight tensor [8,1,3,3] for running the bank through conv2d.
    Tensor as_weights() const;
};

FilterBank build_filter_bank();

// Hyper-Laplacian penalty configuration. lambda is the coefficient on the
// neighborhood-difference term of the training loss; when both sigmas are
// given it is derived as sigma_r^2 / sigma_n^alpha.
struct NipConfig {
    double alpha = 0.1;
    std::optional<double> sigma_n;
    std::optional<double> sigma_r;
    double lambda = 1e-3;
    bool smooth_surrogate = true;
    // Surrogate gain is pinned at e^10 - 1; with natural log this makes
    // phi(1) = 1 = |1|^0.1 exact.

    double resolved_lambda() const;
    void validate() const;  // throws ConfigError
};

// Penalty applied to one filter response (or pixel difference).
// alpha = 0.1 with the surrogate: 0.1 * ln((e^10 - 1)|x| + 1).
// alpha >= 1: exact |x|^alpha. Other combinations are refused by
// NipConfig::validate, since the surrogate constants are only defined for
// alpha = 0.1 and the exact alpha-norm has infinite slope at 0 for alpha < 1.
double phi(double x, const NipConfig& cfg);

// d(phi)/dx; 0 at x = 0 (even function, bounded subgradient convention).
double phi_prime(double x, const NipConfig& cfg);

// sum over the 8 filters of sum over VALID positions of phi(response).
// Valid (unpadded) convolution only: the penalty counts true neighbor
// pairs and fabricates nothing at the border. y must be at least 3x3.
double nip_penalty(const ImagePlane& y, const NipConfig& cfg);

// Exact gradient of nip_penalty with respect to every pixel of y.
ImagePlane nip_penalty_grad(const ImagePlane& y, const NipConfig& cfg);

// Literal double loop over interior pixels and their 8 neighbors,
// accumulating phi(center - neighbor). Independent oracle for nip_penalty:
// both routes count each ordered interior-centered pair exactly once.
double pairwise_penalty_bruteforce(const ImagePlane& y, const NipConfig& cfg);

struct LossResult {
    double loss = 0.0;      // mse_term + nip_term
    double mse_term = 0.0;  // mean over batch of ||y_h - y_g||_F^2
    double nip_term = 0.0;  // mean over batch of lambda * nip_penalty(y_h)
    Tensor grad;            // d(loss)/d(y_h)
};

// Training loss on a batch of single-channel planes: per item
// lambda * nip_penalty(y_h) + ||y_h - y_g||_F^2, averaged over the batch
// so lambda's meaning is independent of batch size. lambda = 0 recovers
// the plain MSE objective.
LossResult total_loss(const Tensor& y_h, const Tensor& y_g, const NipConfig& cfg);

}  // namespace nipsr

#endif
