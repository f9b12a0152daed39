#include "nipsr/evaluator.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "nipsr/rng.hpp"

namespace nipsr {
namespace {

ImagePlane noisy_plane(int h, int w, std::uint64_t seed) {
    ImagePlane p(h, w);
    SeededRng rng(seed);
    for (double& v : p.v) v = 0.15 + 0.7 * rng.next_double();
    return p;
}

TEST(Psnr, ClosedFormValues) {
    ImagePlane a(16, 16, 0.5);
    ImagePlane b(16, 16, 0.6);
    EXPECT_NEAR(psnr(a, b, 0), 20.0, 1e-12);

    ImagePlane c(16, 16, 0.5);
    ImagePlane d(16, 16, 0.5 + 1.0 / 255.0);
    EXPECT_NEAR(psnr(c, d, 0), 48.130803608679344, 1e-9);

    EXPECT_DOUBLE_EQ(psnr(a, a, 0), 99.0);
    EXPECT_DOUBLE_EQ(psnr(a, a, 3), 99.0);
}

TEST(Psnr, ClampsBeforeComparing) {
    ImagePlane a(8, 8, 1.5);   // clamps to 1.0
    ImagePlane b(8, 8, 0.9);
    EXPECT_NEAR(psnr(a, b, 0), 20.0, 1e-12);
    ImagePlane c(8, 8, -3.0);  // clamps to 0.0
    EXPECT_DOUBLE_EQ(psnr(c, ImagePlane(8, 8, 0.0), 0), 99.0);
}

TEST(Psnr, ShaveDropsBorder) {
    ImagePlane a(10, 10, 0.5);
    ImagePlane b = a;
    for (int x = 0; x < 10; ++x) b.at(0, x) = 1.0;  // damaged top row only
    EXPECT_LT(psnr(a, b, 0), 25.0);
    EXPECT_DOUBLE_EQ(psnr(a, b, 1), 99.0);
    EXPECT_DOUBLE_EQ(psnr(a, b, 4), 99.0);
}

TEST(Psnr, Contracts) {
    ImagePlane a(8, 8, 0.5);
    EXPECT_THROW(psnr(a, ImagePlane(8, 9, 0.5), 0), ContractError);
    EXPECT_THROW(psnr(a, a, -1), ContractError);
    EXPECT_THROW(psnr(a, a, 4), ContractError);  // nothing left after shave
    EXPECT_THROW(psnr(ImagePlane(), ImagePlane(), 0), ContractError);
}

TEST(Ssim, IdenticalPlanesScoreOne) {
    const ImagePlane p = noisy_plane(24, 20, 31);
    EXPECT_NEAR(ssim(p, p), 1.0, 1e-12);
    EXPECT_NEAR(ssim(ImagePlane(11, 11, 0.3), ImagePlane(11, 11, 0.3)), 1.0, 1e-12);
}

TEST(Ssim, SymmetricAndBounded) {
    const ImagePlane a = noisy_plane(20, 20, 33);
    ImagePlane b = a;
    SeededRng rng(34);
    for (double& v : b.v) v += rng.normal(0.0, 0.05);
    const double s = ssim(a, b);
    EXPECT_DOUBLE_EQ(ssim(b, a), s);
    EXPECT_LT(s, 1.0);
    EXPECT_GT(s, 0.0);
    ImagePlane blurred = a;
    for (int y = 1; y < a.h - 1; ++y)
        for (int x = 1; x < a.w - 1; ++x)
            blurred.at(y, x) = (a.at(y, x - 1) + a.at(y, x) + a.at(y, x + 1)) / 3.0;
    EXPECT_LT(ssim(a, blurred), 1.0);
}

TEST(Ssim, RejectsSmallOrMismatchedPlanes) {
    EXPECT_THROW(ssim(ImagePlane(10, 11, 0.5), ImagePlane(10, 11, 0.5)), ContractError);
    EXPECT_THROW(ssim(ImagePlane(11, 10, 0.5), ImagePlane(11, 10, 0.5)), ContractError);
    EXPECT_THROW(ssim(ImagePlane(12, 12, 0.5), ImagePlane(12, 11, 0.5)), ContractError);
}

// ----- evaluate() against files on disk -----

struct EvalFixture {
    std::string dir;
    std::string manifest_path;

    EvalFixture() {
        dir = testing::TempDir() + "evalfix";
        std::filesystem::create_directories(dir);
        save_netpbm(make_plane(48, 45, 1), dir + "/t1.pgm");
        save_netpbm(make_plane(39, 48, 2), dir + "/t2.pgm");
        save_netpbm(make_plane(48, 48, 3), dir + "/train.pgm");
        manifest_path = dir + "/set.txt";
        std::ofstream m(manifest_path);
        m << "# tiny corpus\n";
        m << "train train.pgm\n";
        m << "test t1.pgm\n";
        m << "test t2.pgm\n";
    }

    static ImagePlane make_plane(int h, int w, std::uint64_t seed) {
        ImagePlane p(h, w);
        SeededRng rng(seed);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                p.at(y, x) = 0.5 + 0.35 * std::sin(0.23 * y + 0.31 * x + rng.next_double());
        return p;
    }
};

TEST(Evaluate, IdentityNetworkMatchesBicubicBaseline) {
    const EvalFixture fix;
    const DatasetManifest man = load_manifest(fix.manifest_path);
    const SrNetwork net = init_network(4, 0, 8);  // exact identity at init
    const EvalResult res = evaluate(net, man, 3, 3);

    ASSERT_EQ(res.images.size(), 2u);
    EXPECT_EQ(res.failed, 0);
    for (const auto& score : res.images) {
        ASSERT_TRUE(score.ok) << score.error;
        EXPECT_GT(score.psnr_db, 10.0);
        EXPECT_LT(score.psnr_db, 99.0);
        EXPECT_GT(score.ssim, 0.2);
    }

    // The identity network scores exactly what the degraded input scores.
    const ImagePlane gt = center_crop_to_multiple(load_luminance(fix.dir + "/t1.pgm"), 3);
    const ImagePlane low = degrade(gt, 3);
    EXPECT_DOUBLE_EQ(res.images[0].psnr_db, psnr(low, gt, 3));
    EXPECT_DOUBLE_EQ(res.images[0].ssim, ssim(low, gt));
    EXPECT_DOUBLE_EQ(res.mean_psnr, 0.5 * (res.images[0].psnr_db + res.images[1].psnr_db));
}

TEST(Evaluate, UnreadableImageRecordedNotFatal) {
    const EvalFixture fix;
    {
        std::ofstream m(fix.manifest_path, std::ios::trunc);
        m << "train train.pgm\ntest t1.pgm\ntest missing.pgm\n";
    }
    const DatasetManifest man = load_manifest(fix.manifest_path);
    const SrNetwork net = init_network(3, 0, 8);
    const EvalResult res = evaluate(net, man, 3, 3);
    ASSERT_EQ(res.images.size(), 2u);
    EXPECT_TRUE(res.images[0].ok);
    EXPECT_FALSE(res.images[1].ok);
    EXPECT_FALSE(res.images[1].error.empty());
    EXPECT_EQ(res.failed, 1);
    // Means cover the images that worked.
    EXPECT_DOUBLE_EQ(res.mean_psnr, res.images[0].psnr_db);
}

TEST(BuildPatchSet, GridCountsAndSkips) {
    const EvalFixture fix;
    const DatasetManifest man = load_manifest(fix.manifest_path);
    PipelineConfig pipe;
    pipe.scale = 3;
    pipe.patch_size = 12;
    pipe.patch_stride = 12;
    const PatchSet ps = build_patch_set(man, pipe);
    // One 48x48 train image: 4x4 anchor grid.
    EXPECT_EQ(ps.count(), 16);
    EXPECT_EQ(ps.lr.h, 12);
    EXPECT_EQ(ps.hr.w, 12);

    PipelineConfig big = pipe;
    big.patch_size = 64;  // larger than the image: nothing extractable
    big.patch_stride = 64;
    EXPECT_THROW(build_patch_set(man, big), ContractError);
}

// ----- sweep table, CSV, SVG -----

SweepTable sample_table() {
    SweepTable t;
    t.add_row({"baseline", 5, 0.1, 24.5, 0.71, 0, 60});
    t.add_row({"nip", 5, 0.1, 24.9, 0.72, 0, 60});
    t.add_row({"baseline", 5, 1.0, 26.0, 0.76, 0, 60});
    t.add_row({"nip", 5, 1.0, 26.2, 0.77, 0, 60});
    t.add_row({"baseline", 10, 0.1, 24.8, 0.72, 0, 60});
    t.add_row({"nip", 10, 0.1, 25.3, 0.73, 0, 60});
    return t;
}

TEST(SweepTable, RejectsDuplicateCells) {
    SweepTable t = sample_table();
    EXPECT_THROW(t.add_row({"nip", 5, 0.1, 30.0, 0.9, 1, 10}), ContractError);
    t.add_row({"nip", 5, 0.2, 30.0, 0.9, 1, 10});  // new fraction is fine
}

TEST(SweepCsv, RoundTripAndHeader) {
    const SweepTable t = sample_table();
    const std::string path = testing::TempDir() + "sweep_rt.csv";
    emit_table_csv(t, path);

    std::ifstream f(path);
    std::string header;
    ASSERT_TRUE(std::getline(f, header));
    EXPECT_EQ(header, "variant,depth,fraction,psnr,ssim,seed,epochs");

    const SweepTable back = read_table_csv(path);
    ASSERT_EQ(back.rows.size(), t.rows.size());
    // emit sorts canonically; compare as sets via lookup.
    for (const auto& row : t.rows) {
        bool found = false;
        for (const auto& other : back.rows) {
            if (other.variant == row.variant && other.depth == row.depth &&
                std::fabs(other.fraction - row.fraction) < 1e-12) {
                found = true;
                EXPECT_NEAR(other.psnr, row.psnr, 5e-5);
                EXPECT_NEAR(other.ssim, row.ssim, 5e-5);
                EXPECT_EQ(other.seed, row.seed);
                EXPECT_EQ(other.epochs, row.epochs);
            }
        }
        EXPECT_TRUE(found) << row.variant << " d" << row.depth;
    }
}

TEST(SweepCsv, EmitIsByteDeterministicAndSorted) {
    const SweepTable t = sample_table();
    const std::string p1 = testing::TempDir() + "sweep_a.csv";
    const std::string p2 = testing::TempDir() + "sweep_b.csv";
    emit_table_csv(t, p1);
    emit_table_csv(t, p2);
    std::ifstream f1(p1), f2(p2);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    ASSERT_EQ(s1.str(), s2.str());

    // baseline rows precede nip rows, depths ascending inside a variant.
    std::istringstream lines(s1.str());
    std::string line;
    std::getline(lines, line);  // header
    std::vector<std::string> variants;
    while (std::getline(lines, line)) {
        if (!line.empty()) variants.push_back(line.substr(0, line.find(',')));
    }
    ASSERT_EQ(variants.size(), 6u);
    EXPECT_EQ(variants[0], "baseline");
    EXPECT_EQ(variants[2], "baseline");
    EXPECT_EQ(variants[3], "nip");
}

TEST(SweepCsv, ReadRejectsMalformedInput) {
    const std::string path = testing::TempDir() + "sweep_bad.csv";
    {
        std::ofstream f(path);
        f << "variant,depth,fraction\n";
    }
    EXPECT_THROW(read_table_csv(path), ParseError);
    {
        std::ofstream f(path, std::ios::trunc);
        f << "variant,depth,fraction,psnr,ssim,seed,epochs\n";
        f << "nip,5,0.1,24.9\n";
    }
    EXPECT_THROW(read_table_csv(path), ParseError);
    {
        std::ofstream f(path, std::ios::trunc);
        f << "variant,depth,fraction,psnr,ssim,seed,epochs\n";
        f << "nip,notanumber,0.1,24.9,0.72,0,60\n";
    }
    EXPECT_THROW(read_table_csv(path), ParseError);
    EXPECT_THROW(read_table_csv(testing::TempDir() + "does_not_exist.csv"), IoError);
}

TEST(SweepSvg, DeterministicWithOnePolylinePerSeries) {
    const SweepTable t = sample_table();
    const std::string p1 = testing::TempDir() + "plot_a.svg";
    const std::string p2 = testing::TempDir() + "plot_b.svg";
    emit_plot_svg(t, p1);
    emit_plot_svg(t, p2);
    std::ifstream f1(p1), f2(p2);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    ASSERT_FALSE(s1.str().empty());
    EXPECT_EQ(s1.str(), s2.str());
    EXPECT_NE(s1.str().find("<svg"), std::string::npos);
    EXPECT_NE(s1.str().find("</svg>"), std::string::npos);

    // Series: (baseline,5), (nip,5), (baseline,10), (nip,10).
    int polylines = 0;
    for (std::size_t pos = s1.str().find("<polyline"); pos != std::string::npos;
         pos = s1.str().find("<polyline", pos + 1)) {
        ++polylines;
    }
    EXPECT_EQ(polylines, 4);
}

TEST(RunSweep, ToyCorpusFillsEveryCell) {
    const EvalFixture fix;
    const DatasetManifest man = load_manifest(fix.manifest_path);

    SweepAxes axes;
    axes.depths = {2};
    axes.fractions = {0.5, 1.0};
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.lr0 = 0.01;
    cfg.decay_epochs = {};
    cfg.seed = 5;
    PipelineConfig pipe;
    pipe.scale = 3;
    pipe.patch_size = 12;
    pipe.patch_stride = 12;

    const SweepTable t = run_sweep(man, axes, cfg, pipe, /*width=*/4);
    EXPECT_TRUE(t.errors.empty());
    ASSERT_EQ(t.rows.size(), 4u);
    for (const auto& row : t.rows) {
        EXPECT_TRUE(row.variant == "baseline" || row.variant == "nip");
        EXPECT_EQ(row.depth, 2);
        EXPECT_EQ(row.seed, 5u);
        EXPECT_EQ(row.epochs, 2);
        EXPECT_TRUE(std::isfinite(row.psnr));
        EXPECT_GT(row.psnr, 5.0);
        EXPECT_GT(row.ssim, 0.0);
    }

    SweepAxes bad = axes;
    bad.variants = {"baseline", "fancy"};
    EXPECT_THROW(run_sweep(man, bad, cfg, pipe, 4), ConfigError);
}

}  // namespace
}  // namespace nipsr
