#include "nipsr/config.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

namespace nipsr {
namespace {

TEST(Config, Defaults) {
    const CliConfig cfg;
    EXPECT_EQ(cfg.scale, 3);
    EXPECT_EQ(cfg.patch_size, 41);
    EXPECT_EQ(cfg.depth, 20);
    EXPECT_EQ(cfg.batch_size, 64);
    EXPECT_DOUBLE_EQ(cfg.lr0, 0.1);
    EXPECT_EQ(cfg.decay_epochs, (std::vector<int>{60, 140}));
    EXPECT_EQ(cfg.epochs, 300);
    EXPECT_DOUBLE_EQ(cfg.clip_theta, 0.01);
    EXPECT_DOUBLE_EQ(cfg.alpha, 0.1);
    EXPECT_DOUBLE_EQ(cfg.lambda, 1e-3);
    EXPECT_FALSE(cfg.sigma_n.has_value());
    EXPECT_TRUE(cfg.smooth_surrogate);
    EXPECT_EQ(cfg.map_iterations, 400);
    EXPECT_EQ(cfg.sweep_depths, (std::vector<int>{5, 10}));
    EXPECT_EQ(cfg.sweep_variants, (std::vector<std::string>{"baseline", "nip"}));
}

TEST(Config, ParsesKeysCommentsAndBlankLines) {
    const CliConfig cfg = parse_config_text(
        "# training setup\n"
        "manifest = data/set91.txt\n"
        "depth=9\n"
        "  epochs = 12   # trailing comment\n"
        "lr0 = 0.05\n"
        "\n"
        "decay_epochs = 4, 8\n"
        "augment = true\n"
        "sweep_fractions = 0.25,1\n"
        "seed = 17\n");
    EXPECT_EQ(cfg.manifest, "data/set91.txt");
    EXPECT_EQ(cfg.depth, 9);
    EXPECT_EQ(cfg.epochs, 12);
    EXPECT_DOUBLE_EQ(cfg.lr0, 0.05);
    EXPECT_EQ(cfg.decay_epochs, (std::vector<int>{4, 8}));
    EXPECT_TRUE(cfg.augment);
    EXPECT_EQ(cfg.sweep_fractions, (std::vector<double>{0.25, 1.0}));
    EXPECT_EQ(cfg.seed, 17u);
}

TEST(Config, UnknownAndDuplicateKeysRejected) {
    EXPECT_THROW(parse_config_text("depht = 9\n"), ConfigError);
    EXPECT_THROW(parse_config_text("depth = 9\ndepth = 10\n"), ConfigError);
}

TEST(Config, MalformedLinesCarryOffsets) {
    try {
        parse_config_text("depth = 9\nthis line has no equals\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("at byte"), std::string::npos);
        EXPECT_GE(e.offset, 10u);
    }
    // Malformed values are configuration errors, not byte-level parse errors.
    EXPECT_THROW(parse_config_text("depth = twenty\n"), ConfigError);
    EXPECT_THROW(parse_config_text("epochs = 1e3\n"), ConfigError);
    EXPECT_THROW(parse_config_text("augment = maybe\n"), ConfigError);
    EXPECT_THROW(parse_config_text("decay_epochs = 4,,8\n"), ConfigError);
}

TEST(Config, RangeViolationsAreConfigErrors) {
    EXPECT_THROW(parse_config_text("depth = 1\n"), ConfigError);
    EXPECT_THROW(parse_config_text("scale = 0\n"), ConfigError);
    EXPECT_THROW(parse_config_text("momentum = 1.0\n"), ConfigError);
    EXPECT_THROW(parse_config_text("lr0 = 0\n"), ConfigError);
    EXPECT_THROW(parse_config_text("training_fraction = 1.5\n"), ConfigError);
    EXPECT_THROW(parse_config_text("alpha = -0.5\n"), ConfigError);
    EXPECT_THROW(parse_config_text("patch_size = 2\n"), ConfigError);
    EXPECT_THROW(parse_config_text("map_step_size = -1\n"), ConfigError);
    EXPECT_THROW(parse_config_text("sweep_variants = baseline,fancy\n"), ConfigError);
    EXPECT_THROW(parse_config_text("decay_epochs = 8, 4\n"), ConfigError);
}

TEST(Config, LambdaAndSigmasAreMutuallyExclusive) {
    EXPECT_THROW(parse_config_text("lambda = 0.5\nsigma_n = 2\nsigma_r = 0.1\n"), ConfigError);
    // One sigma alone cannot resolve lambda.
    EXPECT_THROW(parse_config_text("sigma_n = 2\n"), ConfigError);

    const CliConfig cfg = parse_config_text("sigma_n = 2\nsigma_r = 0.1\nalpha = 0.1\n");
    ASSERT_TRUE(cfg.sigma_n.has_value());
    // lambda = sigma_r^2 / sigma_n^alpha = 0.01 / 2^0.1
    EXPECT_NEAR(cfg.nip_config().resolved_lambda(), 0.01 / std::pow(2.0, 0.1), 1e-15);
}

TEST(Config, SerializeRoundTripIsStable) {
    CliConfig cfg = parse_config_text(
        "manifest = corpus.txt\n"
        "depth = 7\n"
        "lr0 = 0.014999999999999999\n"
        "sweep_fractions = 0.1, 0.33333333333333331\n"
        "lambda = 2.5e-4\n");
    const std::string s1 = serialize_config(cfg);
    const CliConfig back = parse_config_text(s1);
    const std::string s2 = serialize_config(back);
    EXPECT_EQ(s1, s2);
    EXPECT_EQ(back.manifest, "corpus.txt");
    EXPECT_EQ(back.depth, 7);
    EXPECT_EQ(back.lr0, cfg.lr0);
    EXPECT_EQ(back.sweep_fractions, cfg.sweep_fractions);
    EXPECT_EQ(back.lambda, cfg.lambda);

    // Sigma-mode config keeps the sigmas and drops lambda on output.
    const CliConfig sig = parse_config_text("sigma_n = 2\nsigma_r = 0.1\n");
    const std::string out = serialize_config(sig);
    EXPECT_NE(out.find("sigma_n"), std::string::npos);
    EXPECT_EQ(out.find("lambda"), std::string::npos);
    const CliConfig sig_back = parse_config_text(out);
    EXPECT_EQ(sig_back.sigma_n, sig.sigma_n);
    EXPECT_EQ(sig_back.sigma_r, sig.sigma_r);
}

TEST(Config, SetKeyAppliesSameValidation) {
    CliConfig cfg;
    set_config_key(cfg, "depth", "6");
    EXPECT_EQ(cfg.depth, 6);
    set_config_key(cfg, "training_fraction", "0.25");
    EXPECT_DOUBLE_EQ(cfg.training_fraction, 0.25);
    set_config_key(cfg, "smooth_surrogate", "false");
    EXPECT_FALSE(cfg.smooth_surrogate);
    EXPECT_THROW(set_config_key(cfg, "depth", "0"), ConfigError);
    EXPECT_THROW(set_config_key(cfg, "no_such_key", "1"), ConfigError);
}

TEST(Config, LoadConfigReadsFilesAndReportsMissing) {
    const std::string path = testing::TempDir() + "cfg.txt";
    {
        std::ofstream f(path);
        f << "depth = 4\nepochs = 2\n";
    }
    const CliConfig cfg = load_config(path);
    EXPECT_EQ(cfg.depth, 4);
    EXPECT_EQ(cfg.epochs, 2);
    EXPECT_THROW(load_config(testing::TempDir() + "missing_cfg.txt"), IoError);
}

TEST(Config, ConvertersMirrorFields) {
    CliConfig cfg = parse_config_text(
        "depth = 5\n"
        "batch_size = 16\n"
        "momentum = 0.8\n"
        "epochs = 25\n"
        "seed = 9\n"
        "alpha = 1\n"
        "smooth_surrogate = false\n"
        "lambda = 0.02\n"
        "map_iterations = 50\n"
        "map_step_size = 0.2\n"
        "scale = 2\n"
        "patch_size = 24\n"
        "patch_stride = 12\n"
        "augment = true\n"
        "sweep_depths = 3,4\n");
    const TrainConfig tc = cfg.train_config();
    EXPECT_EQ(tc.batch_size, 16);
    EXPECT_DOUBLE_EQ(tc.momentum, 0.8);
    EXPECT_EQ(tc.epochs, 25);
    EXPECT_EQ(tc.seed, 9u);
    EXPECT_DOUBLE_EQ(tc.nip.lambda, 0.02);
    EXPECT_DOUBLE_EQ(tc.nip.alpha, 1.0);
    EXPECT_FALSE(tc.nip.smooth_surrogate);
    tc.validate();

    const MapConfig mc = cfg.map_config();
    EXPECT_EQ(mc.iterations, 50);
    EXPECT_DOUBLE_EQ(mc.step_size, 0.2);
    EXPECT_DOUBLE_EQ(mc.nip.lambda, 0.02);
    mc.validate();

    const PipelineConfig pc = cfg.pipeline_config();
    EXPECT_EQ(pc.scale, 2);
    EXPECT_EQ(pc.patch_size, 24);
    EXPECT_EQ(pc.patch_stride, 12);
    EXPECT_TRUE(pc.augment);

    const SweepAxes ax = cfg.sweep_axes();
    EXPECT_EQ(ax.depths, (std::vector<int>{3, 4}));
    EXPECT_EQ(ax.variants, (std::vector<std::string>{"baseline", "nip"}));
}

TEST(Config, AlphaBelowOneRequiresSurrogate) {
    EXPECT_THROW(parse_config_text("alpha = 0.5\nsmooth_surrogate = false\n"), ConfigError);
    const CliConfig ok = parse_config_text("alpha = 2\nsmooth_surrogate = false\n");
    ok.nip_config().validate();
}

}  // namespace
}  // namespace nipsr
