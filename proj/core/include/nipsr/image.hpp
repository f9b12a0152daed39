#ifndef NIPSR_IMAGE_HPP
#define NIPSR_IMAGE_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "nipsr/tensor.hpp"

namespace nipsr {

// Single-channel image, nominal range [0,1]. Values may leave the range
// transiently (resampling ringing); they are clamped before any quantized
// output.
struct ImagePlane {
    int h = 0;
    int w = 0;
    std::vector<double> v;

    ImagePlane() = default;
    ImagePlane(int h_, int w_, double fill = 0.0)
        : h(h_), w(w_), v(static_cast<std::size_t>(h_) * w_, fill) {}

    double& at(int y, int x) { return v[static_cast<std::size_t>(y) * w + x]; }
    double at(int y, int x) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

// 8-bit RGB raster, interleaved r,g,b per pixel.
struct RgbImage {
    int h = 0;
    int w = 0;
    std::vector<std::uint8_t> rgb;

    RgbImage() = default;
    RgbImage(int h_, int w_) : h(h_), w(w_), rgb(static_cast<std::size_t>(h_) * w_ * 3, 0) {}
};

using NetpbmImage = std::variant<ImagePlane, RgbImage>;

// Binary netpbm, P5 (gray) or P6 (color), maxval 255 only. Parse failures
// throw ParseError with the byte offset. save/load round-trips are
// byte-exact for files in the canonical header layout emitted by save.
NetpbmImage load_netpbm(const std::string& path);
void save_netpbm(const ImagePlane& p, const std::string& path);
void save_netpbm(const RgbImage& img, const std::string& path);

// Luminance plane regardless of input flavor (P6 goes through BT.601).
ImagePlane load_luminance(const std::string& path);

struct YcbcrPlanes {
    ImagePlane y, cb, cr;
};

// Studio-swing BT.601 split; all planes scaled to [0,1] (Y spans 16/255
// to 235/255 for in-gamut input).
YcbcrPlanes rgb_to_ycbcr(const RgbImage& img);
RgbImage ycbcr_to_rgb(const ImagePlane& y, const ImagePlane& cb, const ImagePlane& cr);

// Precomputed separable resampling weights for one axis: `taps` source
// samples per output index, indices clamped to the border, each weight row
// normalized to sum 1. Shared by bicubic_resize and the map-solver
// downsampling operator so both use the identical kernel.
struct ResampleTable {
    int in_len = 0;
    int out_len = 0;
    int taps = 0;
    std::vector<int> idx;     // out_len * taps
    std::vector<double> wgt;  // out_len * taps
};

ResampleTable make_resample_table(int in_len, int out_len, bool antialias);

// One separable pass: resample_cols maps width p.w -> t.out_len on every
// row, resample_rows maps height p.h -> t.out_len on every column.
ImagePlane resample_cols(const ImagePlane& p, const ResampleTable& t);
ImagePlane resample_rows(const ImagePlane& p, const ResampleTable& t);

// Keys cubic kernel, a = -0.5; antialiased downscale widens the kernel by
// the inverse scale. Column pass then row pass.
ImagePlane bicubic_resize(const ImagePlane& p, int out_h, int out_w, bool antialias);

ImagePlane center_crop_to_multiple(const ImagePlane& p, int scale);

// Bicubic down-by-scale then up-by-scale; the network input. The source is
// center-cropped to a multiple of scale first, and the result has the
// cropped size.
ImagePlane degrade(const ImagePlane& hr, int scale);

// Deterministic 24-element list: {identity, horizontal flip} x
// {0, 90, 180, 270 degrees} x {scale 1.0, 0.7, 0.5}, scale index fastest.
std::vector<ImagePlane> augment(const ImagePlane& p);

struct PatchSet {
    Tensor lr;  // [m,1,size,size]
    Tensor hr;  // [m,1,size,size]

    int count() const { return lr.n; }
    void append(const PatchSet& other);
};

// Aligned patch pairs on a regular top-left anchored grid; the final
// row/column window is back-shifted so coverage reaches the border.
PatchSet extract_patches(const ImagePlane& lr_up, const ImagePlane& hr,
                         int size = 41, int stride = 41);

// ceil(fraction*m) pairs, uniform without replacement, deterministic given
// seed. fraction 1.0 returns the identity ordering.
PatchSet subsample_patches(const PatchSet& ps, double fraction, std::uint64_t seed);

struct ManifestEntry {
    enum class Role { train, test };
    Role role;
    std::string path;  // as written in the manifest
};

// Plain text, one `<role> <path>` record per line, `#` comments.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::string base_dir;  // directory of the manifest file

    std::vector<std::string> paths(ManifestEntry::Role role) const;  // resolved
    std::string resolve(const std::string& path) const;
};

DatasetManifest load_manifest(const std::string& path);

}  // namespace nipsr

#endif
