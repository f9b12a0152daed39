#include "nipsr/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace nipsr {

namespace {

constexpr double kPsnrCap = 99.0;

ImagePlane clamped(const ImagePlane& p) {
    ImagePlane out = p;
    for (double& v : out.v) v = std::clamp(v, 0.0, 1.0);
    return out;
}

std::vector<double> gaussian_window_11(double sigma) {
    std::vector<double> w(121);
    double sum = 0.0;
    for (int y = 0; y < 11; ++y) {
        for (int x = 0; x < 11; ++x) {
            const double dy = y - 5.0;
            const double dx = x - 5.0;
            w[static_cast<std::size_t>(y) * 11 + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            sum += w[static_cast<std::size_t>(y) * 11 + x];
        }
    }
    for (double& v : w) v /= sum;
    return w;
}

}  // namespace

double psnr(const ImagePlane& a, const ImagePlane& b, int shave) {
    if (a.h != b.h || a.w != b.w) throw ContractError("psnr: plane dimensions differ");
    if (shave < 0) throw ContractError("psnr: shave must be >= 0");
    if (a.h <= 2 * shave || a.w <= 2 * shave) {
        throw ContractError("psnr: dimensions must exceed twice the shave border");
    }
    double mse = 0.0;
    std::int64_t count = 0;
    for (int y = shave; y < a.h - shave; ++y) {
        for (int x = shave; x < a.w - shave; ++x) {
            const double av = std::clamp(a.at(y, x), 0.0, 1.0);
            const double bv = std::clamp(b.at(y, x), 0.0, 1.0);
            const double d = av - bv;
            mse += d * d;
            ++count;
        }
    }
    mse /= static_cast<double>(count);
    if (mse == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const ImagePlane& a, const ImagePlane& b) {
    if (a.h != b.h || a.w != b.w) throw ContractError("ssim: plane dimensions differ");
    if (a.h < 11 || a.w < 11) throw ContractError("ssim: dimensions must be >= 11");

    static const std::vector<double> win = gaussian_window_11(1.5);
    const ImagePlane x = clamped(a);
    const ImagePlane y = clamped(b);

    constexpr double c1 = 0.01 * 0.01;  // (K1*L)^2, L = 1
    constexpr double c2 = 0.03 * 0.03;  // (K2*L)^2

    double acc = 0.0;
    std::int64_t count = 0;
    for (int oy = 0; oy + 11 <= x.h; ++oy) {
        for (int ox = 0; ox + 11 <= x.w; ++ox) {
            double mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
            for (int wy = 0; wy < 11; ++wy) {
                for (int wx = 0; wx < 11; ++wx) {
                    const double wv = win[static_cast<std::size_t>(wy) * 11 + wx];
                    const double xv = x.at(oy + wy, ox + wx);
                    const double yv = y.at(oy + wy, ox + wx);
                    mx += wv * xv;
                    my += wv * yv;
                    sxx += wv * xv * xv;
                    syy += wv * yv * yv;
                    sxy += wv * xv * yv;
                }
            }
            const double vx = sxx - mx * mx;
            const double vy = syy - my * my;
            const double cov = sxy - mx * my;
            const double num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
            const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
            acc += num / den;
            ++count;
        }
    }
    return acc / static_cast<double>(count);
}

EvalResult evaluate(const SrNetwork& net, const DatasetManifest& manifest, int scale, int shave) {
    const std::vector<std::string> tests = manifest.paths(ManifestEntry::Role::test);
    if (tests.empty()) throw ContractError("evaluate: manifest has no test entries");

    EvalResult res;
    double sum_psnr = 0.0, sum_ssim = 0.0;
    int ok_count = 0;
    for (const std::string& path : tests) {
        ImageScore score;
        score.name = path;
        try {
            const ImagePlane gt = center_crop_to_multiple(load_luminance(path), scale);
            const ImagePlane lr_up = degrade(gt, scale);
            Tensor x(1, 1, lr_up.h, lr_up.w);
            x.data = lr_up.v;
            const Tensor y = forward(net, x);
            ImagePlane out(lr_up.h, lr_up.w);
            out.v = y.data;
            score.psnr_db = psnr(out, gt, shave);
            score.ssim = ssim(out, gt);
            score.ok = true;
            sum_psnr += score.psnr_db;
            sum_ssim += score.ssim;
            ++ok_count;
        } catch (const std::exception& e) {
            score.error = e.what();
            ++res.failed;
        }
        res.images.push_back(std::move(score));
    }
    res.mean_psnr = ok_count ? sum_psnr / ok_count : std::nan("");
    res.mean_ssim = ok_count ? sum_ssim / ok_count : std::nan("");
    return res;
}

void SweepTable::add_row(SweepRow row) {
    for (const auto& r : rows) {
        if (r.variant == row.variant && r.depth == row.depth && r.fraction == row.fraction) {
            throw ContractError("SweepTable: duplicate key (" + row.variant + ", " +
                                std::to_string(row.depth) + ", " + std::to_string(row.fraction) +
                                ")");
        }
    }
    rows.push_back(std::move(row));
}

PatchSet build_patch_set(const DatasetManifest& manifest, const PipelineConfig& pipe) {
    const std::vector<std::string> train = manifest.paths(ManifestEntry::Role::train);
    if (train.empty()) throw ContractError("build_patch_set: manifest has no train entries");

    PatchSet all;
    for (const std::string& path : train) {
        const ImagePlane y = load_luminance(path);
        std::vector<ImagePlane> planes;
        if (pipe.augment) {
            planes = augment(y);
        } else {
            planes.push_back(y);
        }
        for (const ImagePlane& p : planes) {
            if (p.h < pipe.patch_size || p.w < pipe.patch_size) continue;
            if (p.h < pipe.scale || p.w < pipe.scale) continue;
            const ImagePlane hr = center_crop_to_multiple(p, pipe.scale);
            if (hr.h < pipe.patch_size || hr.w < pipe.patch_size) continue;
            const ImagePlane lr_up = degrade(hr, pipe.scale);
            all.append(extract_patches(lr_up, hr, pipe.patch_size, pipe.patch_stride));
        }
    }
    if (all.count() == 0) {
        throw ContractError("build_patch_set: no usable patches (images smaller than patch size?)");
    }
    return all;
}

SweepTable run_sweep(const DatasetManifest& manifest, const SweepAxes& axes,
                     const TrainConfig& base_cfg, const PipelineConfig& pipe, int width) {
    if (axes.depths.empty() || axes.fractions.empty() || axes.variants.empty()) {
        throw ContractError("run_sweep: empty sweep axis");
    }
    for (const std::string& v : axes.variants) {
        if (v != "baseline" && v != "nip") {
            throw ConfigError("run_sweep: unknown variant '" + v + "'");
        }
    }
    base_cfg.validate();

    const PatchSet full = build_patch_set(manifest, pipe);
    SweepTable table;
    for (double fraction : axes.fractions) {
        const PatchSet subset = subsample_patches(full, fraction, base_cfg.seed);
        for (int depth : axes.depths) {
            for (const std::string& variant : axes.variants) {
                TrainConfig cfg = base_cfg;
                cfg.training_fraction = fraction;
                if (variant == "baseline") {
                    cfg.nip.lambda = 0.0;
                    cfg.nip.sigma_n.reset();
                    cfg.nip.sigma_r.reset();
                }
                try {
                    SrNetwork net = init_network(depth, cfg.seed, width);
                    train(net, subset, cfg);
                    const EvalResult er = evaluate(net, manifest, pipe.scale, pipe.scale);
                    SweepRow row;
                    row.variant = variant;
                    row.depth = depth;
                    row.fraction = fraction;
                    row.psnr = er.mean_psnr;
                    row.ssim = er.mean_ssim;
                    row.seed = cfg.seed;
                    row.epochs = cfg.epochs;
                    table.add_row(std::move(row));
                } catch (const std::exception& e) {
                    std::ostringstream msg;
                    msg << variant << ",d" << depth << ",f" << fraction << ": " << e.what();
                    table.errors.push_back(msg.str());
                }
            }
        }
    }
    return table;
}

namespace {

std::vector<SweepRow> sorted_rows(const SweepTable& t) {
    std::vector<SweepRow> rows = t.rows;
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.variant != b.variant) return a.variant < b.variant;
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.fraction < b.fraction;
    });
    return rows;
}

}  // namespace

void emit_table_csv(const SweepTable& t, const std::string& path) {
    if (t.rows.empty()) throw ContractError("emit_table_csv: empty table");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << "variant,depth,fraction,psnr,ssim,seed,epochs\n";
    char line[256];
    for (const auto& r : sorted_rows(t)) {
        std::snprintf(line, sizeof(line), "%s,%d,%.6g,%.4f,%.4f,%llu,%d\n", r.variant.c_str(),
                      r.depth, r.fraction, r.psnr, r.ssim,
                      static_cast<unsigned long long>(r.seed), r.epochs);
        f << line;
    }
    if (!f) throw IoError("write failure on '" + path + "'");
}

SweepTable read_table_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(f, line)) throw ParseError("empty sweep CSV", 0);
    if (line != "variant,depth,fraction,psnr,ssim,seed,epochs") {
        throw ParseError("unexpected sweep CSV header", 0);
    }
    SweepTable t;
    std::size_t offset = line.size() + 1;
    while (std::getline(f, line)) {
        const std::size_t line_start = offset;
        offset += line.size() + 1;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 7) throw ParseError("sweep CSV row needs 7 fields", line_start);
        try {
            SweepRow r;
            r.variant = fields[0];
            r.depth = std::stoi(fields[1]);
            r.fraction = std::stod(fields[2]);
            r.psnr = std::stod(fields[3]);
            r.ssim = std::stod(fields[4]);
            r.seed = std::stoull(fields[5]);
            r.epochs = std::stoi(fields[6]);
            t.add_row(std::move(r));
        } catch (const ContractError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError("malformed sweep CSV row", line_start);
        }
    }
    return t;
}

void emit_plot_svg(const SweepTable& t, const std::string& path) {
    if (t.rows.empty()) throw ContractError("emit_plot_svg: empty table");

    // Series keyed by (variant, depth); points sorted by fraction.
    std::map<std::pair<std::string, int>, std::vector<std::pair<double, double>>> series;
    double fmin = 1e300, fmax = -1e300, pmin = 1e300, pmax = -1e300;
    for (const auto& r : sorted_rows(t)) {
        if (!std::isfinite(r.psnr)) continue;
        series[{r.variant, r.depth}].emplace_back(r.fraction, r.psnr);
        fmin = std::min(fmin, r.fraction);
        fmax = std::max(fmax, r.fraction);
        pmin = std::min(pmin, r.psnr);
        pmax = std::max(pmax, r.psnr);
    }
    if (series.empty()) throw ContractError("emit_plot_svg: no finite rows to plot");
    if (fmax - fmin < 1e-12) {
        fmin -= 0.5;
        fmax += 0.5;
    }
    pmin -= 0.5;
    pmax += 0.5;

    const double width = 720.0, height = 480.0;
    const double ml = 64.0, mr = 170.0, mt = 28.0, mb = 52.0;
    const double pw = width - ml - mr, ph = height - mt - mb;
    auto sx = [&](double f) { return ml + (f - fmin) / (fmax - fmin) * pw; };
    auto sy = [&](double p) { return mt + (pmax - p) / (pmax - pmin) * ph; };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

    std::ostringstream svg;
    char buf[512];
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                  "viewBox=\"0 0 %.0f %.0f\">\n",
                  width, height, width, height);
    svg << buf;
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Axes.
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", ml,
                  mt + ph, ml + pw, mt + ph);
    svg << buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", ml,
                  mt, ml, mt + ph);
    svg << buf;

    // X ticks at the distinct fractions present.
    std::vector<double> ticks;
    for (const auto& [key, pts] : series) {
        for (const auto& [f, p] : pts) ticks.push_back(f);
    }
    std::sort(ticks.begin(), ticks.end());
    ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
    for (double f : ticks) {
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                      sx(f), mt + ph, sx(f), mt + ph + 5.0);
        svg << buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\">%.4g"
                      "</text>\n",
                      sx(f), mt + ph + 20.0, f);
        svg << buf;
    }
    for (int i = 0; i <= 4; ++i) {
        const double p = pmin + (pmax - pmin) * i / 4.0;
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                      ml - 5.0, sy(p), ml, sy(p));
        svg << buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"end\">%.2f"
                      "</text>\n",
                      ml - 8.0, sy(p) + 4.0, p);
        svg << buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"13\" text-anchor=\"middle\">training "
                  "fraction</text>\n",
                  ml + pw / 2.0, height - 12.0);
    svg << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"16\" y=\"%.2f\" font-size=\"13\" text-anchor=\"middle\" "
                  "transform=\"rotate(-90 16 %.2f)\">PSNR (dB)</text>\n",
                  mt + ph / 2.0, mt + ph / 2.0);
    svg << buf;

    int color_index = 0;
    double legend_y = mt + 10.0;
    for (const auto& [key, pts] : series) {
        const char* color = palette[color_index % 8];
        std::ostringstream poly;
        for (const auto& [f, p] : pts) {
            std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", sx(f), sy(p));
            poly << buf;
        }
        std::snprintf(buf, sizeof(buf),
                      "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"2\" points=\"%s\"/>\n",
                      color, poly.str().c_str());
        svg << buf;
        for (const auto& [f, p] : pts) {
            std::snprintf(buf, sizeof(buf),
                          "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n", sx(f), sy(p),
                          color);
            svg << buf;
        }
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" "
                      "stroke-width=\"2\"/>\n",
                      ml + pw + 12.0, legend_y, ml + pw + 36.0, legend_y, color);
        svg << buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\">%s depth %d</text>\n",
                      ml + pw + 42.0, legend_y + 4.0, key.first.c_str(), key.second);
        svg << buf;
        legend_y += 20.0;
        ++color_index;
    }
    svg << "</svg>\n";

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << svg.str();
    if (!f) throw IoError("write failure on '" + path + "'");
}

}  // namespace nipsr
