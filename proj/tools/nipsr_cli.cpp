#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <variant>

#include "CLI11.hpp"
#include "nipsr/config.hpp"
#include "nipsr/evaluator.hpp"
#include "nipsr/gradcheck.hpp"
#include "nipsr/map_solver.hpp"
#include "nipsr/srnet.hpp"
#include "nipsr/trainer.hpp"

namespace {

using namespace nipsr;

// The CLI always runs the full-width network; narrower widths are a
// library-level test knob only.
constexpr int kCliWidth = 64;

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitConfig = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitSelfCheck = 5;

CliConfig load_config_cli(const std::string& path) {
    // A malformed config is a configuration problem (exit 3), not a
    // generic I/O failure.
    try {
        return load_config(path);
    } catch (const ParseError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

std::string checkpoint_path(const CliConfig& cfg) {
    if (!cfg.checkpoint.empty()) return cfg.checkpoint;
    return cfg.output_dir + "/model.ckpt";
}

int cmd_degrade(const std::string& in, const std::string& out, int scale) {
    if (scale < 1) throw ConfigError("scale must be >= 1");
    const NetpbmImage img = load_netpbm(in);
    if (std::holds_alternative<ImagePlane>(img)) {
        save_netpbm(degrade(std::get<ImagePlane>(img), scale), out);
    } else {
        const RgbImage& rgb = std::get<RgbImage>(img);
        ImagePlane ch[3] = {ImagePlane(rgb.h, rgb.w), ImagePlane(rgb.h, rgb.w),
                            ImagePlane(rgb.h, rgb.w)};
        for (int i = 0; i < rgb.h * rgb.w; ++i)
            for (int c = 0; c < 3; ++c) ch[c].v[i] = rgb.rgb[3 * i + c] / 255.0;
        ImagePlane deg[3] = {degrade(ch[0], scale), degrade(ch[1], scale),
                             degrade(ch[2], scale)};
        RgbImage res(deg[0].h, deg[0].w);
        for (int i = 0; i < res.h * res.w; ++i)
            for (int c = 0; c < 3; ++c) {
                const double v = std::clamp(deg[c].v[i], 0.0, 1.0);
                res.rgb[3 * i + c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
            }
        save_netpbm(res, out);
    }
    return kExitOk;
}

int cmd_train(const CliConfig& cfg) {
    if (cfg.manifest.empty()) throw ConfigError("train requires the manifest key");
    const TrainConfig tcfg = cfg.train_config();
    tcfg.validate();
    ensure_dir(cfg.output_dir);

    const DatasetManifest manifest = load_manifest(cfg.manifest);
    const PatchSet all = build_patch_set(manifest, cfg.pipeline_config());
    const PatchSet used = subsample_patches(all, cfg.training_fraction, cfg.seed);

    SrNetwork net = init_network(cfg.depth, cfg.seed, kCliWidth);
    const TrainLog log = train(net, used, tcfg);

    save_checkpoint(net, checkpoint_path(cfg));
    log.write_csv(cfg.output_dir + "/train_log.csv");

    std::printf("trained depth=%d patches=%d/%d epochs=%d -> %s\n", cfg.depth,
                used.count(), all.count(), cfg.epochs, checkpoint_path(cfg).c_str());
    if (!log.epochs.empty()) {
        std::printf("first-epoch loss %.6g, final-epoch loss %.6g\n",
                    log.epochs.front().loss, log.epochs.back().loss);
    }
    return kExitOk;
}

int cmd_eval(const CliConfig& cfg, const std::string& ckpt_flag) {
    if (cfg.manifest.empty()) throw ConfigError("eval requires the manifest key");
    const std::string ckpt = ckpt_flag.empty() ? checkpoint_path(cfg) : ckpt_flag;
    if (ckpt.empty()) throw ConfigError("eval requires --checkpoint or the checkpoint key");

    const SrNetwork net = load_checkpoint(ckpt, cfg.depth);
    const DatasetManifest manifest = load_manifest(cfg.manifest);
    const EvalResult res = evaluate(net, manifest, cfg.scale, cfg.scale);

    std::printf("image,psnr,ssim\n");
    for (const ImageScore& s : res.images) {
        if (s.ok) {
            std::printf("%s,%.4f,%.4f\n", s.name.c_str(), s.psnr_db, s.ssim);
        } else {
            std::fprintf(stderr, "failed: %s: %s\n", s.name.c_str(), s.error.c_str());
        }
    }
    if (res.failed == static_cast<int>(res.images.size())) {
        std::fprintf(stderr, "error: every test image failed to evaluate\n");
        return kExitIo;
    }
    std::printf("mean,%.4f,%.4f\n", res.mean_psnr, res.mean_ssim);
    return kExitOk;
}

int cmd_sweep(const CliConfig& cfg) {
    if (cfg.manifest.empty()) throw ConfigError("sweep requires the manifest key");
    const TrainConfig tcfg = cfg.train_config();
    tcfg.validate();
    ensure_dir(cfg.output_dir);

    const DatasetManifest manifest = load_manifest(cfg.manifest);
    const SweepTable table =
        run_sweep(manifest, cfg.sweep_axes(), tcfg, cfg.pipeline_config(), kCliWidth);
    for (const std::string& e : table.errors) std::fprintf(stderr, "cell failed: %s\n", e.c_str());

    const std::string csv = cfg.output_dir + "/sweep.csv";
    const std::string svg = cfg.output_dir + "/sweep.svg";
    emit_table_csv(table, csv);
    emit_plot_svg(table, svg);
    std::printf("sweep: %zu rows -> %s, %s\n", table.rows.size(), csv.c_str(), svg.c_str());
    return kExitOk;
}

int cmd_mapsr(const std::string& in, const std::string& out, int scale, const MapConfig& mcfg,
              const std::string& trace_path) {
    if (scale < 1) throw ConfigError("scale must be >= 1");
    mcfg.validate();
    const NetpbmImage img = load_netpbm(in);

    if (std::holds_alternative<ImagePlane>(img)) {
        const MapResult res = map_sr(std::get<ImagePlane>(img), scale, mcfg);
        save_netpbm(res.y, out);
        if (!trace_path.empty()) write_trace_csv(res.trace, trace_path);
    } else {
        // Only luminance gets the MAP treatment; chroma is upscaled
        // bicubically.
        const RgbImage& rgb = std::get<RgbImage>(img);
        const YcbcrPlanes ycc = rgb_to_ycbcr(rgb);
        const MapResult res = map_sr(ycc.y, scale, mcfg);
        const ImagePlane cb = bicubic_resize(ycc.cb, res.y.h, res.y.w, true);
        const ImagePlane cr = bicubic_resize(ycc.cr, res.y.h, res.y.w, true);
        save_netpbm(ycbcr_to_rgb(res.y, cb, cr), out);
        if (!trace_path.empty()) write_trace_csv(res.trace, trace_path);
    }
    return kExitOk;
}

int cmd_plot(const std::string& csv, const std::string& svg) {
    emit_plot_svg(read_table_csv(csv), svg);
    return kExitOk;
}

int cmd_gradcheck() {
    bool all_pass = true;
    for (const GradCheckResult& r : run_gradient_checks()) {
        std::printf("%s %s (max_rel_err=%.3e, tol=%.0e)\n", r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.max_rel_err, r.tolerance);
        all_pass = all_pass && r.pass;
    }
    return all_pass ? kExitOk : kExitSelfCheck;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"natural-image-prior super-resolution toolkit"};
    app.require_subcommand(1);

    std::string in_path, out_path, config_path, ckpt_path, csv_path, svg_path, trace_path;
    int scale = 3;
    MapConfig mcfg;

    // Optional overrides; only applied when the flag is present.
    std::string ov_seed, ov_depth, ov_fraction, ov_lambda;

    CLI::App* degrade = app.add_subcommand("degrade", "bicubic down+up of an image");
    degrade->add_option("--in", in_path, "input PGM/PPM")->required();
    degrade->add_option("--out", out_path, "output image")->required();
    degrade->add_option("--scale", scale, "integer scale factor");

    CLI::App* train = app.add_subcommand("train", "train the residual network");
    train->add_option("--config", config_path, "key = value config file")->required();
    train->add_option("--seed", ov_seed, "override seed");
    train->add_option("--depth", ov_depth, "override depth");
    train->add_option("--fraction", ov_fraction, "override training_fraction");
    train->add_option("--lambda", ov_lambda, "override lambda");

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the test set");
    eval_cmd->add_option("--config", config_path, "key = value config file")->required();
    eval_cmd->add_option("--checkpoint", ckpt_path, "checkpoint to load");

    CLI::App* sweep = app.add_subcommand("sweep", "variant x depth x fraction sweep");
    sweep->add_option("--config", config_path, "key = value config file")->required();

    CLI::App* mapsr = app.add_subcommand("mapsr", "classical MAP super-resolution");
    mapsr->add_option("--in", in_path, "input LR PGM/PPM")->required();
    mapsr->add_option("--out", out_path, "output HR image")->required();
    mapsr->add_option("--scale", scale, "integer scale factor");
    mapsr->add_option("--alpha", mcfg.nip.alpha, "prior exponent");
    mapsr->add_option("--lambda", mcfg.nip.lambda, "prior weight");
    mapsr->add_option("--iters", mcfg.iterations, "gradient-descent iterations");
    mapsr->add_option("--step", mcfg.step_size, "gradient-descent step size");
    mapsr->add_option("--trace", trace_path, "write iter,objective CSV here");

    CLI::App* plot = app.add_subcommand("plot", "render a sweep CSV as SVG");
    plot->add_option("--csv", csv_path, "sweep CSV")->required();
    plot->add_option("--svg", svg_path, "output SVG")->required();

    app.add_subcommand("gradcheck", "finite-difference self checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (degrade->parsed()) return cmd_degrade(in_path, out_path, scale);
        if (train->parsed()) {
            CliConfig cfg = load_config_cli(config_path);
            if (!ov_seed.empty()) set_config_key(cfg, "seed", ov_seed);
            if (!ov_depth.empty()) set_config_key(cfg, "depth", ov_depth);
            if (!ov_fraction.empty()) set_config_key(cfg, "training_fraction", ov_fraction);
            if (!ov_lambda.empty()) {
                // An explicit lambda wins over file-level sigmas.
                cfg.sigma_n.reset();
                cfg.sigma_r.reset();
                set_config_key(cfg, "lambda", ov_lambda);
            }
            return cmd_train(cfg);
        }
        if (eval_cmd->parsed()) return cmd_eval(load_config_cli(config_path), ckpt_path);
        if (sweep->parsed()) return cmd_sweep(load_config_cli(config_path));
        if (mapsr->parsed()) {
            mcfg.record_trace = !trace_path.empty();
            return cmd_mapsr(in_path, out_path, scale, mcfg, trace_path);
        }
        if (plot->parsed()) return cmd_plot(csv_path, svg_path);
        return cmd_gradcheck();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const ContractError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    } catch (const CheckpointError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        // IoError, ParseError, anything else file-shaped.
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    }
}
