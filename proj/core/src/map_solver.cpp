#include "nipsr/map_solver.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace nipsr {

namespace {

// Transpose of one resample pass: scatter each output row/column back
// through the same (idx, wgt) table.
ImagePlane adjoint_rows(const ImagePlane& u, const ResampleTable& t) {
    ImagePlane out(t.in_len, u.w);
    for (int i = 0; i < t.out_len; ++i) {
        const int base = i * t.taps;
        const double* src = &u.v[static_cast<std::size_t>(i) * u.w];
        for (int k = 0; k < t.taps; ++k) {
            const double wv = t.wgt[base + k];
            double* dst = &out.v[static_cast<std::size_t>(t.idx[base + k]) * u.w];
            for (int x = 0; x < u.w; ++x) dst[x] += wv * src[x];
        }
    }
    return out;
}

ImagePlane adjoint_cols(const ImagePlane& u, const ResampleTable& t) {
    ImagePlane out(u.h, t.in_len);
    for (int y = 0; y < u.h; ++y) {
        const double* src = &u.v[static_cast<std::size_t>(y) * u.w];
        double* dst = &out.v[static_cast<std::size_t>(y) * out.w];
        for (int j = 0; j < t.out_len; ++j) {
            const int base = j * t.taps;
            for (int k = 0; k < t.taps; ++k) dst[t.idx[base + k]] += t.wgt[base + k] * src[j];
        }
    }
    return out;
}

}  // namespace

ImagePlane DownsampleOperator::apply(const ImagePlane& x) const {
    if (x.h != hr_h || x.w != hr_w) {
        throw ContractError("DownsampleOperator::apply: plane is not the HR shape");
    }
    return resample_rows(resample_cols(x, cols), rows);
}

ImagePlane DownsampleOperator::apply_adjoint(const ImagePlane& u) const {
    if (u.h != lr_h || u.w != lr_w) {
        throw ContractError("DownsampleOperator::apply_adjoint: plane is not the LR shape");
    }
    return adjoint_cols(adjoint_rows(u, rows), cols);
}

DownsampleOperator build_downsampler(int hr_h, int hr_w, int scale) {
    if (scale < 1) throw ContractError("build_downsampler: scale must be >= 1");
    if (hr_h < 1 || hr_w < 1) throw ContractError("build_downsampler: empty HR shape");
    if (hr_h % scale != 0 || hr_w % scale != 0) {
        throw ContractError("build_downsampler: HR dims must be multiples of the scale");
    }
    DownsampleOperator op;
    op.hr_h = hr_h;
    op.hr_w = hr_w;
    op.lr_h = hr_h / scale;
    op.lr_w = hr_w / scale;
    op.rows = make_resample_table(hr_h, op.lr_h, true);
    op.cols = make_resample_table(hr_w, op.lr_w, true);
    return op;
}

void MapConfig::validate() const {
    nip.validate();
    if (iterations < 0) throw ConfigError("map_iterations must be >= 0");
    if (!(step_size > 0.0)) throw ConfigError("map_step_size must be > 0");
}

double map_objective(const ImagePlane& y, const ImagePlane& y_l, const DownsampleOperator& op,
                     const NipConfig& nip) {
    const ImagePlane down = op.apply(y);
    double data = 0.0;
    for (std::size_t i = 0; i < down.v.size(); ++i) {
        const double d = down.v[i] - y_l.v[i];
        data += d * d;
    }
    const double lambda = nip.resolved_lambda();
    return (lambda != 0.0 ? lambda * nip_penalty(y, nip) : 0.0) + data;
}

ImagePlane map_objective_grad(const ImagePlane& y, const ImagePlane& y_l,
                              const DownsampleOperator& op, const NipConfig& nip) {
    ImagePlane resid = op.apply(y);
    for (std::size_t i = 0; i < resid.v.size(); ++i) resid.v[i] -= y_l.v[i];
    ImagePlane grad = op.apply_adjoint(resid);
    for (double& g : grad.v) g *= 2.0;
    const double lambda = nip.resolved_lambda();
    if (lambda != 0.0) {
        const ImagePlane pg = nip_penalty_grad(y, nip);
        for (std::size_t i = 0; i < grad.v.size(); ++i) grad.v[i] += lambda * pg.v[i];
    }
    return grad;
}

MapResult map_sr(const ImagePlane& y_l, int scale, const MapConfig& cfg) {
    if (y_l.h < 1 || y_l.w < 1) throw ContractError("map_sr: empty LR plane");
    if (scale < 1) throw ContractError("map_sr: scale must be >= 1");
    cfg.validate();

    const int hr_h = y_l.h * scale;
    const int hr_w = y_l.w * scale;
    if (hr_h < 3 || hr_w < 3) throw ContractError("map_sr: HR plane must be at least 3x3");
    const DownsampleOperator op = build_downsampler(hr_h, hr_w, scale);

    MapResult res;
    res.y = bicubic_resize(y_l, hr_h, hr_w, true);

    for (int it = 0; it <= cfg.iterations; ++it) {
        if (cfg.record_trace) {
            const double j = map_objective(res.y, y_l, op, cfg.nip);
            if (!std::isfinite(j)) {
                throw NumericError("map_sr: non-finite objective at iteration " +
                                   std::to_string(it));
            }
            res.trace.push_back(j);
        }
        if (it == cfg.iterations) break;
        const ImagePlane grad = map_objective_grad(res.y, y_l, op, cfg.nip);
        for (std::size_t i = 0; i < res.y.v.size(); ++i) {
            res.y.v[i] -= cfg.step_size * grad.v[i];
            if (!std::isfinite(res.y.v[i])) {
                throw NumericError("map_sr: non-finite iterate at iteration " +
                                   std::to_string(it + 1));
            }
        }
    }
    for (double& v : res.y.v) v = std::clamp(v, 0.0, 1.0);
    return res;
}

void write_trace_csv(const std::vector<double>& trace, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << "iter,objective\n";
    char line[64];
    for (std::size_t i = 0; i < trace.size(); ++i) {
        std::snprintf(line, sizeof(line), "%zu,%.10g\n", i, trace[i]);
        f << line;
    }
    if (!f) throw IoError("write failure on '" + path + "'");
}

}  // namespace nipsr
