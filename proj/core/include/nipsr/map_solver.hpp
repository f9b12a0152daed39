#ifndef NIPSR_MAP_SOLVER_HPP
#define NIPSR_MAP_SOLVER_HPP

#include <string>
#include <vector>

#include "nipsr/image.hpp"
#include "nipsr/nip_prior.hpp"

namespace nipsr {

// Explicit linear map T from an HR plane to its antialiased bicubic
// decimation, stored as the two separable coefficient tables. apply is
// bit-identical to bicubic_resize(x, lr_h, lr_w, antialias on) because it
// runs the same passes on the same tables; apply_adjoint is the exact
// transpose, so <T x, u> = <x, T' u> up to rounding.
struct DownsampleOperator {
    int hr_h = 0, hr_w = 0;
    int lr_h = 0, lr_w = 0;
    ResampleTable rows;  // hr_h -> lr_h
    ResampleTable cols;  // hr_w -> lr_w

    ImagePlane apply(const ImagePlane& x) const;
    ImagePlane apply_adjoint(const ImagePlane& u) const;
};

DownsampleOperator build_downsampler(int hr_h, int hr_w, int scale);

struct MapConfig {
    NipConfig nip;
    int iterations = 400;
    double step_size = 0.1;
    bool record_trace = false;

    void validate() const;  // throws ConfigError
};

struct MapResult {
    ImagePlane y;               // clamped to [0,1]
    std::vector<double> trace;  // J per iterate (iterations + 1 entries) when recorded
};

// Objective and its exact gradient at y:
//   J(y) = lambda * nip_penalty(y) + ||T y - y_l||_F^2
//   dJ   = lambda * nip_penalty_grad(y) + 2 * T'(T y - y_l)
double map_objective(const ImagePlane& y, const ImagePlane& y_l, const DownsampleOperator& op,
                     const NipConfig& nip);
ImagePlane map_objective_grad(const ImagePlane& y, const ImagePlane& y_l,
                              const DownsampleOperator& op, const NipConfig& nip);

// Fixed-step gradient descent from the bicubic upscale of y_l. Iterates
// are left unclamped; only the returned plane is clamped to [0,1]. A
// non-finite objective aborts with the iteration index in the message.
MapResult map_sr(const ImagePlane& y_l, int scale, const MapConfig& cfg);

// CSV with header iter,objective, one row per trace entry.
void write_trace_csv(const std::vector<double>& trace, const std::string& path);

}  // namespace nipsr

#endif
