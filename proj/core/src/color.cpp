#include <array>
#include <cmath>

#include "nipsr/image.hpp"

namespace nipsr {

namespace {

// Studio-swing BT.601 forward matrix, 8-bit offsets 16/128/128.
constexpr std::array<std::array<double, 3>, 3> kForward = {{
    {65.481, 128.553, 24.966},
    {-37.797, -74.203, 112.0},
    {112.0, -93.786, -18.214},
}};

std::array<std::array<double, 3>, 3> invert(const std::array<std::array<double, 3>, 3>& m) {
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    std::array<std::array<double, 3>, 3> r;
    r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
    return r;
}

std::uint8_t quantize(double v) {
    if (v < 0.0) v = 0.0;
    if (v > 255.0) v = 255.0;
    return static_cast<std::uint8_t>(std::lround(v));
}

}  // namespace

YcbcrPlanes rgb_to_ycbcr(const RgbImage& img) {
    YcbcrPlanes out{ImagePlane(img.h, img.w), ImagePlane(img.h, img.w), ImagePlane(img.h, img.w)};
    const std::size_t npx = static_cast<std::size_t>(img.h) * img.w;
    for (std::size_t i = 0; i < npx; ++i) {
        const double r = img.rgb[3 * i + 0] / 255.0;
        const double g = img.rgb[3 * i + 1] / 255.0;
        const double b = img.rgb[3 * i + 2] / 255.0;
        out.y.v[i] = (16.0 + kForward[0][0] * r + kForward[0][1] * g + kForward[0][2] * b) / 255.0;
        out.cb.v[i] = (128.0 + kForward[1][0] * r + kForward[1][1] * g + kForward[1][2] * b) / 255.0;
        out.cr.v[i] = (128.0 + kForward[2][0] * r + kForward[2][1] * g + kForward[2][2] * b) / 255.0;
    }
    return out;
}

RgbImage ycbcr_to_rgb(const ImagePlane& y, const ImagePlane& cb, const ImagePlane& cr) {
    if (y.h != cb.h || y.w != cb.w || y.h != cr.h || y.w != cr.w) {
        throw ContractError("ycbcr_to_rgb: plane dimensions disagree");
    }
    static const std::array<std::array<double, 3>, 3> inv = invert(kForward);
    RgbImage img(y.h, y.w);
    const std::size_t npx = static_cast<std::size_t>(y.h) * y.w;
    for (std::size_t i = 0; i < npx; ++i) {
        const double yp = y.v[i] * 255.0 - 16.0;
        const double cbp = cb.v[i] * 255.0 - 128.0;
        const double crp = cr.v[i] * 255.0 - 128.0;
        const double r = inv[0][0] * yp + inv[0][1] * cbp + inv[0][2] * crp;
        const double g = inv[1][0] * yp + inv[1][1] * cbp + inv[1][2] * crp;
        const double b = inv[2][0] * yp + inv[2][1] * cbp + inv[2][2] * crp;
        img.rgb[3 * i + 0] = quantize(r * 255.0);
        img.rgb[3 * i + 1] = quantize(g * 255.0);
        img.rgb[3 * i + 2] = quantize(b * 255.0);
    }
    return img;
}

}  // namespace nipsr
