#include <algorithm>
#include <cmath>

#include "nipsr/image.hpp"

namespace nipsr {

namespace {

// Keys cubic convolution kernel with a = -0.5, support [-2, 2].
double cubic(double x) {
    x = std::fabs(x);
    if (x <= 1.0) return (1.5 * x - 2.5) * x * x + 1.0;
    if (x < 2.0) return ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0;
    return 0.0;
}

ImagePlane hflip(const ImagePlane& p) {
    ImagePlane out(p.h, p.w);
    for (int y = 0; y < p.h; ++y)
        for (int x = 0; x < p.w; ++x) out.at(y, x) = p.at(y, p.w - 1 - x);
    return out;
}

ImagePlane rot90_cw(const ImagePlane& p) {
    ImagePlane out(p.w, p.h);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) out.at(y, x) = p.at(p.h - 1 - x, y);
    return out;
}

}  // namespace

ImagePlane resample_cols(const ImagePlane& p, const ResampleTable& t) {
    if (t.in_len != p.w) throw ContractError("resample_cols: table built for a different width");
    ImagePlane out(p.h, t.out_len);
    for (int y = 0; y < p.h; ++y) {
        const double* row = &p.v[static_cast<std::size_t>(y) * p.w];
        for (int j = 0; j < t.out_len; ++j) {
            const int base = j * t.taps;
            double acc = 0.0;
            for (int k = 0; k < t.taps; ++k) acc += t.wgt[base + k] * row[t.idx[base + k]];
            out.at(y, j) = acc;
        }
    }
    return out;
}

ImagePlane resample_rows(const ImagePlane& p, const ResampleTable& t) {
    if (t.in_len != p.h) throw ContractError("resample_rows: table built for a different height");
    ImagePlane out(t.out_len, p.w);
    for (int i = 0; i < t.out_len; ++i) {
        const int base = i * t.taps;
        double* dst = &out.v[static_cast<std::size_t>(i) * p.w];
        for (int k = 0; k < t.taps; ++k) {
            const double wv = t.wgt[base + k];
            const double* src = &p.v[static_cast<std::size_t>(t.idx[base + k]) * p.w];
            if (k == 0) {
                for (int x = 0; x < p.w; ++x) dst[x] = wv * src[x];
            } else {
                for (int x = 0; x < p.w; ++x) dst[x] += wv * src[x];
            }
        }
    }
    return out;
}

ResampleTable make_resample_table(int in_len, int out_len, bool antialias) {
    if (in_len < 1 || out_len < 1) {
        throw ContractError("make_resample_table: lengths must be positive");
    }
    const double scale = static_cast<double>(out_len) / in_len;
    const bool widen = antialias && scale < 1.0;
    const double kernel_width = widen ? 4.0 / scale : 4.0;

    ResampleTable t;
    t.in_len = in_len;
    t.out_len = out_len;
    t.taps = static_cast<int>(std::ceil(kernel_width)) + 2;
    t.idx.resize(static_cast<std::size_t>(out_len) * t.taps);
    t.wgt.resize(static_cast<std::size_t>(out_len) * t.taps);

    for (int i = 0; i < out_len; ++i) {
        const double u = (i + 0.5) / scale - 0.5;
        const int left = static_cast<int>(std::floor(u - kernel_width / 2.0));
        const int base = i * t.taps;
        double sum = 0.0;
        for (int k = 0; k < t.taps; ++k) {
            const int j = left + 1 + k;
            const double d = u - j;
            const double wv = widen ? scale * cubic(scale * d) : cubic(d);
            t.idx[base + k] = std::clamp(j, 0, in_len - 1);
            t.wgt[base + k] = wv;
            sum += wv;
        }
        for (int k = 0; k < t.taps; ++k) t.wgt[base + k] /= sum;
    }
    return t;
}

ImagePlane bicubic_resize(const ImagePlane& p, int out_h, int out_w, bool antialias) {
    if (out_h < 1 || out_w < 1) throw ContractError("bicubic_resize: output size must be >= 1");
    if (p.h < 1 || p.w < 1) throw ContractError("bicubic_resize: empty input plane");
    const ResampleTable cols = make_resample_table(p.w, out_w, antialias);
    const ResampleTable rows = make_resample_table(p.h, out_h, antialias);
    return resample_rows(resample_cols(p, cols), rows);
}

ImagePlane center_crop_to_multiple(const ImagePlane& p, int scale) {
    if (scale < 1) throw ContractError("center_crop_to_multiple: scale must be >= 1");
    if (p.h < scale || p.w < scale) {
        throw ContractError("center_crop_to_multiple: image smaller than scale factor");
    }
    const int ch = (p.h / scale) * scale;
    const int cw = (p.w / scale) * scale;
    const int oy = (p.h - ch) / 2;
    const int ox = (p.w - cw) / 2;
    ImagePlane out(ch, cw);
    for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x) out.at(y, x) = p.at(y + oy, x + ox);
    return out;
}

ImagePlane degrade(const ImagePlane& hr, int scale) {
    if (scale < 1) throw ContractError("degrade: scale must be >= 1");
    if (hr.h < scale || hr.w < scale) throw ContractError("degrade: image smaller than scale factor");
    const ImagePlane cropped = center_crop_to_multiple(hr, scale);
    const ImagePlane down = bicubic_resize(cropped, cropped.h / scale, cropped.w / scale, true);
    return bicubic_resize(down, cropped.h, cropped.w, true);
}

std::vector<ImagePlane> augment(const ImagePlane& p) {
    static const double scales[3] = {1.0, 0.7, 0.5};
    std::vector<ImagePlane> out;
    out.reserve(24);
    for (int flip = 0; flip < 2; ++flip) {
        const ImagePlane flipped = flip ? hflip(p) : p;
        for (int rot = 0; rot < 4; ++rot) {
            ImagePlane rotated = flipped;
            for (int r = 0; r < rot; ++r) rotated = rot90_cw(rotated);
            for (double s : scales) {
                if (s == 1.0) {
                    out.push_back(rotated);
                } else {
                    const int sh = std::max(1, static_cast<int>(std::lround(rotated.h * s)));
                    const int sw = std::max(1, static_cast<int>(std::lround(rotated.w * s)));
                    out.push_back(bicubic_resize(rotated, sh, sw, true));
                }
            }
        }
    }
    return out;
}

}  // namespace nipsr
