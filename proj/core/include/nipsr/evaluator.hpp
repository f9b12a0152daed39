#ifndef NIPSR_EVALUATOR_HPP
#define NIPSR_EVALUATOR_HPP

#include <string>
#include <vector>

#include "nipsr/image.hpp"
#include "nipsr/srnet.hpp"
#include "nipsr/trainer.hpp"

namespace nipsr {

// Luminance PSNR in dB. Both planes are clamped to [0,1] and a border of
// `shave` pixels is removed before the MSE. Identical planes return the
// 99.0 dB sentinel (all results are capped there so reports stay finite).
double psnr(const ImagePlane& a, const ImagePlane& b, int shave);

// Mean local SSIM, 11x11 Gaussian window sigma 1.5, K1=0.01, K2=0.03,
// dynamic range 1.0, windows fully inside the image. Planes are clamped
// to [0,1] like psnr.
double ssim(const ImagePlane& a, const ImagePlane& b);

struct ImageScore {
    std::string name;
    double psnr_db = 0.0;
    double ssim = 0.0;
    bool ok = false;
    std::string error;
};

struct EvalResult {
    std::vector<ImageScore> images;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    int failed = 0;
};

// Per test image: load -> luminance -> crop to scale multiple -> degrade ->
// forward -> metrics against the ground-truth luminance. Unreadable files
// are recorded per image and evaluation continues.
EvalResult evaluate(const SrNetwork& net, const DatasetManifest& manifest,
                    int scale, int shave);

struct SweepRow {
    std::string variant;  // "baseline" or "nip"
    int depth = 0;
    double fraction = 1.0;
    double psnr = 0.0;
    double ssim = 0.0;
    std::uint64_t seed = 0;
    int epochs = 0;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    std::vector<std::string> errors;  // failed cells, sweep continues

    void add_row(SweepRow row);  // rejects duplicate (variant, depth, fraction)
};

struct SweepAxes {
    std::vector<int> depths;
    std::vector<double> fractions;
    std::vector<std::string> variants{"baseline", "nip"};
};

struct PipelineConfig {
    int scale = 3;
    int patch_size = 41;
    int patch_stride = 41;
    bool augment = false;
};

// Patch pairs from every train entry of the manifest: luminance ->
// (optional augmentation) -> degrade -> aligned windows. Augmented planes
// smaller than the patch size are skipped.
PatchSet build_patch_set(const DatasetManifest& manifest, const PipelineConfig& pipe);

// Trains one network per (variant, depth, fraction) cell and evaluates it.
// baseline runs with lambda = 0, nip with the configured lambda. Cells
// with the same fraction share one data subsample drawn with the base
// seed, so the variants are paired.
SweepTable run_sweep(const DatasetManifest& manifest, const SweepAxes& axes,
                     const TrainConfig& base_cfg, const PipelineConfig& pipe,
                     int width = 64);

// CSV with header variant,depth,fraction,psnr,ssim,seed,epochs; rows in
// canonical (variant, depth, fraction) order. Byte-deterministic.
void emit_table_csv(const SweepTable& t, const std::string& path);
SweepTable read_table_csv(const std::string& path);

// Line chart of mean PSNR vs training fraction, one polyline per
// (variant, depth). Byte-deterministic for a given table.
void emit_plot_svg(const SweepTable& t, const std::string& path);

}  // namespace nipsr

#endif
