// End-to-end checks of the installed command-line tool. The test driver
// receives the binary path in the NIPSR_CLI environment variable.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "nipsr/image.hpp"
#include "nipsr/rng.hpp"

namespace nipsr {
namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string cli_path() {
    const char* p = std::getenv("NIPSR_CLI");
    EXPECT_NE(p, nullptr) << "NIPSR_CLI must point at the nipsr binary";
    return p ? p : "";
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args) {
    const std::string out = testing::TempDir() + "cli_stdout.txt";
    const std::string err = testing::TempDir() + "cli_stderr.txt";
    const std::string cmd = cli_path() + " " + args + " >" + out + " 2>" + err;
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

struct Corpus {
    std::string dir;
    std::string manifest;
    std::string config;

    explicit Corpus(const std::string& name) {
        dir = testing::TempDir() + name;
        fs::create_directories(dir);
        write_image(dir + "/a.pgm", 48, 48, 1);
        write_image(dir + "/b.pgm", 48, 45, 2);
        write_image(dir + "/t.pgm", 45, 48, 3);
        manifest = dir + "/set.txt";
        std::ofstream m(manifest);
        m << "train a.pgm\ntrain b.pgm\ntest t.pgm\n";
    }

    static void write_image(const std::string& path, int h, int w, std::uint64_t seed) {
        ImagePlane p(h, w);
        SeededRng rng(seed);
        for (double& v : p.v) v = rng.next_double();
        save_netpbm(p, path);
    }

    void write_config(const std::string& extra) {
        config = dir + "/run.cfg";
        std::ofstream f(config);
        f << "manifest = " << manifest << "\n";
        f << "output_dir = " << dir << "\n";
        f << "scale = 3\npatch_size = 12\npatch_stride = 12\n";
        f << extra;
    }
};

TEST(CliDegrade, WritesDegradedImage) {
    const std::string in = testing::TempDir() + "deg_in.pgm";
    const std::string out = testing::TempDir() + "deg_out.pgm";
    Corpus::write_image(in, 14, 13, 7);
    const RunResult r = run_cli("degrade --in " + in + " --out " + out + " --scale 3");
    EXPECT_EQ(r.exit_code, 0) << r.err;
    const ImagePlane p = load_luminance(out);
    EXPECT_EQ(p.h, 12);  // cropped to the scale multiple
    EXPECT_EQ(p.w, 12);
}

TEST(CliDegrade, ScaleOneIsByteIdentity) {
    const std::string in = testing::TempDir() + "deg1_in.pgm";
    const std::string out = testing::TempDir() + "deg1_out.pgm";
    Corpus::write_image(in, 9, 11, 8);
    const RunResult r = run_cli("degrade --in " + in + " --out " + out + " --scale 1");
    EXPECT_EQ(r.exit_code, 0) << r.err;
    EXPECT_EQ(slurp(out), slurp(in));
}

TEST(CliDegrade, MissingInputExitsTwo) {
    const RunResult r = run_cli("degrade --in " + testing::TempDir() +
                                "nope.pgm --out " + testing::TempDir() + "x.pgm");
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(CliDegrade, ColorInputStaysColor) {
    const std::string in = testing::TempDir() + "deg_rgb.ppm";
    const std::string out = testing::TempDir() + "deg_rgb_out.ppm";
    RgbImage img(12, 12);
    SeededRng rng(9);
    for (auto& b : img.rgb) b = static_cast<std::uint8_t>(rng.next_u64() & 0xff);
    save_netpbm(img, in);
    const RunResult r = run_cli("degrade --in " + in + " --out " + out + " --scale 3");
    EXPECT_EQ(r.exit_code, 0) << r.err;
    std::ifstream f(out, std::ios::binary);
    char magic[2] = {0, 0};
    f.read(magic, 2);
    EXPECT_EQ(magic[0], 'P');
    EXPECT_EQ(magic[1], '6');
}

TEST(CliTrain, BadConfigExitsThree) {
    Corpus c("cli_badcfg");
    c.write_config("definitely_not_a_key = 1\n");
    const RunResult r = run_cli("train --config " + c.config);
    EXPECT_EQ(r.exit_code, 3);
    EXPECT_NE(r.err.find("error:"), std::string::npos);

    // A config file that cannot be opened is an I/O failure, not a config error.
    const RunResult missing = run_cli("train --config " + c.dir + "/no_such.cfg");
    EXPECT_EQ(missing.exit_code, 2);
}

TEST(CliTrain, TrainsAndEvalReadsTheCheckpoint) {
    Corpus c("cli_train");
    c.write_config("depth = 2\nepochs = 2\nbatch_size = 8\nlr0 = 0.01\n"
                   "decay_epochs = 1\nlambda = 0.001\nseed = 3\n");
    const RunResult tr = run_cli("train --config " + c.config);
    ASSERT_EQ(tr.exit_code, 0) << tr.err;
    EXPECT_NE(tr.out.find("trained depth=2"), std::string::npos);
    EXPECT_TRUE(fs::exists(c.dir + "/model.ckpt"));
    EXPECT_TRUE(fs::exists(c.dir + "/train_log.csv"));
    {
        std::ifstream log(c.dir + "/train_log.csv");
        std::string header;
        ASSERT_TRUE(std::getline(log, header));
        EXPECT_EQ(header, "epoch,lr,loss,mse_term,nip_term,seconds");
    }

    const RunResult ev = run_cli("eval --config " + c.config);
    ASSERT_EQ(ev.exit_code, 0) << ev.err;
    EXPECT_NE(ev.out.find("image,psnr,ssim"), std::string::npos);
    EXPECT_NE(ev.out.find("t.pgm,"), std::string::npos);
    EXPECT_NE(ev.out.find("mean,"), std::string::npos);
}

TEST(CliTrain, SameSeedSameCheckpointBytes) {
    Corpus c1("cli_det1");
    c1.write_config("depth = 2\nepochs = 1\nbatch_size = 8\nlr0 = 0.01\n"
                    "decay_epochs = 1\nseed = 11\n");
    Corpus c2("cli_det2");
    c2.write_config("depth = 2\nepochs = 1\nbatch_size = 8\nlr0 = 0.01\n"
                    "decay_epochs = 1\nseed = 11\n");
    ASSERT_EQ(run_cli("train --config " + c1.config).exit_code, 0);
    ASSERT_EQ(run_cli("train --config " + c2.config).exit_code, 0);
    EXPECT_EQ(slurp(c1.dir + "/model.ckpt"), slurp(c2.dir + "/model.ckpt"));

    // A different seed must change the bytes.
    ASSERT_EQ(run_cli("train --config " + c1.config + " --seed 12").exit_code, 0);
    EXPECT_NE(slurp(c1.dir + "/model.ckpt"), slurp(c2.dir + "/model.ckpt"));
}

TEST(CliEval, DepthMismatchExitsTwo) {
    Corpus c("cli_mismatch");
    c.write_config("depth = 2\nepochs = 0\nseed = 1\n");
    ASSERT_EQ(run_cli("train --config " + c.config).exit_code, 0);
    c.write_config("depth = 3\nepochs = 0\nseed = 1\n");
    const RunResult ev = run_cli("eval --config " + c.config);
    EXPECT_EQ(ev.exit_code, 2);
    EXPECT_NE(ev.err.find("error:"), std::string::npos);
}

TEST(CliMapsr, UpscalesAndTraces) {
    const std::string in = testing::TempDir() + "map_in.pgm";
    const std::string out = testing::TempDir() + "map_out.pgm";
    const std::string trace = testing::TempDir() + "map_trace.csv";
    Corpus::write_image(in, 8, 8, 21);
    const RunResult r = run_cli("mapsr --in " + in + " --out " + out + " --scale 3 --iters 20 --trace " + trace);
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const ImagePlane p = load_luminance(out);
    EXPECT_EQ(p.h, 24);
    EXPECT_EQ(p.w, 24);
    std::ifstream tf(trace);
    std::string header;
    ASSERT_TRUE(std::getline(tf, header));
    EXPECT_EQ(header, "iter,objective");
    int rows = 0;
    for (std::string line; std::getline(tf, line);)
        if (!line.empty()) ++rows;
    EXPECT_EQ(rows, 21);  // iterations + 1
}

TEST(CliSweepAndPlot, ProducesCsvAndSvg) {
    Corpus c("cli_sweep");
    c.write_config("depth = 2\nepochs = 1\nbatch_size = 8\nlr0 = 0.01\n"
                   "decay_epochs = 1\nseed = 2\n"
                   "sweep_depths = 2\nsweep_fractions = 1\n");
    const RunResult sw = run_cli("sweep --config " + c.config);
    ASSERT_EQ(sw.exit_code, 0) << sw.err;
    ASSERT_TRUE(fs::exists(c.dir + "/sweep.csv"));
    ASSERT_TRUE(fs::exists(c.dir + "/sweep.svg"));
    {
        std::ifstream csv(c.dir + "/sweep.csv");
        std::string header;
        ASSERT_TRUE(std::getline(csv, header));
        EXPECT_EQ(header, "variant,depth,fraction,psnr,ssim,seed,epochs");
        int rows = 0;
        for (std::string line; std::getline(csv, line);)
            if (!line.empty()) ++rows;
        EXPECT_EQ(rows, 2);  // baseline + nip at one cell
    }

    const std::string svg2 = c.dir + "/replot.svg";
    const RunResult pl = run_cli("plot --csv " + c.dir + "/sweep.csv --svg " + svg2);
    ASSERT_EQ(pl.exit_code, 0) << pl.err;
    EXPECT_EQ(slurp(svg2), slurp(c.dir + "/sweep.svg"));

    const RunResult bad = run_cli("plot --csv " + c.dir + "/set.txt --svg " + svg2);
    EXPECT_EQ(bad.exit_code, 2);
}

TEST(CliGradcheck, AllChecksPass) {
    const RunResult r = run_cli("gradcheck");
    EXPECT_EQ(r.exit_code, 0) << r.out << r.err;
    int passes = 0;
    for (std::size_t pos = r.out.find("PASS"); pos != std::string::npos;
         pos = r.out.find("PASS", pos + 1)) {
        ++passes;
    }
    EXPECT_EQ(passes, 4);
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, UnknownSubcommandFails) {
    const RunResult r = run_cli("frobnicate");
    EXPECT_NE(r.exit_code, 0);
}

}  // namespace
}  // namespace nipsr
