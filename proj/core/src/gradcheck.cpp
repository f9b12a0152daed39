#include "nipsr/gradcheck.hpp"

#include <cmath>

#include "nipsr/errors.hpp"
#include "nipsr/map_solver.hpp"
#include "nipsr/nip_prior.hpp"
#include "nipsr/rng.hpp"
#include "nipsr/srnet.hpp"

namespace nipsr {

namespace {

double rel_err(double a, double b) {
    const double scale = std::max({std::fabs(a), std::fabs(b), 1e-8});
    return std::fabs(a - b) / scale;
}

// Ramp plus small noise: every filter response keeps magnitude >= margin,
// so finite-difference probes never cross the kink of phi at 0.
ImagePlane kink_safe_plane(int h, int w, SeededRng& rng, double margin) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        ImagePlane p(h, w);
        for (int i = 0; i < h; ++i) {
            for (int j = 0; j < w; ++j) {
                p.at(i, j) = 0.1 + 0.03 * i + 0.07 * j + 0.005 * (2.0 * rng.next_double() - 1.0);
            }
        }
        double min_resp = 1e300;
        for (int i = 1; i < h - 1; ++i) {
            for (int j = 1; j < w - 1; ++j) {
                for (int di = -1; di <= 1; ++di) {
                    for (int dj = -1; dj <= 1; ++dj) {
                        if (di == 0 && dj == 0) continue;
                        min_resp = std::min(min_resp,
                                            std::fabs(p.at(i, j) - p.at(i + di, j + dj)));
                    }
                }
            }
        }
        if (min_resp >= margin) return p;
    }
    throw ContractError("kink_safe_plane: could not place responses away from the kink");
}

GradCheckResult check_nip_grad(SeededRng& rng) {
    GradCheckResult res{"nip_penalty_grad", 0.0, 1e-4, false};
    NipConfig cfg;
    ImagePlane y = kink_safe_plane(9, 9, rng, 2e-3);
    const ImagePlane g = nip_penalty_grad(y, cfg);
    const double h = 1e-6;
    for (std::size_t i = 0; i < y.v.size(); ++i) {
        const double keep = y.v[i];
        y.v[i] = keep + h;
        const double fp = nip_penalty(y, cfg);
        y.v[i] = keep - h;
        const double fm = nip_penalty(y, cfg);
        y.v[i] = keep;
        res.max_rel_err = std::max(res.max_rel_err, rel_err(g.v[i], (fp - fm) / (2.0 * h)));
    }
    res.pass = res.max_rel_err <= res.tolerance;
    return res;
}

GradCheckResult check_total_loss_grad(SeededRng& rng) {
    GradCheckResult res{"total_loss_grad", 0.0, 1e-4, false};
    NipConfig cfg;
    cfg.lambda = 1e-3;

    Tensor y_h(2, 1, 8, 8);
    for (int n = 0; n < 2; ++n) {
        const ImagePlane p = kink_safe_plane(8, 8, rng, 2e-3);
        std::copy(p.v.begin(), p.v.end(), y_h.data.begin() + n * 64);
    }
    Tensor y_g = y_h;
    for (double& v : y_g.data) v += 0.02 * (2.0 * rng.next_double() - 1.0);

    const LossResult base = total_loss(y_h, y_g, cfg);
    const double h = 1e-6;
    for (std::size_t i = 0; i < y_h.data.size(); ++i) {
        const double keep = y_h.data[i];
        y_h.data[i] = keep + h;
        const double fp = total_loss(y_h, y_g, cfg).loss;
        y_h.data[i] = keep - h;
        const double fm = total_loss(y_h, y_g, cfg).loss;
        y_h.data[i] = keep;
        res.max_rel_err =
            std::max(res.max_rel_err, rel_err(base.grad.data[i], (fp - fm) / (2.0 * h)));
    }
    res.pass = res.max_rel_err <= res.tolerance;
    return res;
}

GradCheckResult check_network_params(SeededRng& rng) {
    GradCheckResult res{"network_params", 0.0, 1e-4, false};
    NipConfig cfg;
    cfg.lambda = 1e-3;

    SrNetwork net = init_network(3, rng.next_u64(), 8);
    // The final layer is zero at init, which would zero every upstream
    // gradient; give it small random weights so the whole chain is live.
    ConvLayer& last = net.layers.back();
    for (double& w : last.w.data) w = rng.normal(0.0, 0.05);
    for (double& b : last.b) b = rng.normal(0.0, 0.05);

    Tensor x(1, 1, 12, 12);
    Tensor y_g(1, 1, 12, 12);
    for (int attempt = 0; attempt < 200; ++attempt) {
        const ImagePlane p = kink_safe_plane(12, 12, rng, 8e-3);
        x.data = p.v;
        ForwardCache probe;
        const Tensor out = forward(net, x, &probe);
        ImagePlane yp(12, 12);
        yp.v = out.data;
        double min_resp = 1e300;
        for (int i = 1; i < 11; ++i)
            for (int j = 1; j < 11; ++j)
                for (int di = -1; di <= 1; ++di)
                    for (int dj = -1; dj <= 1; ++dj) {
                        if (di == 0 && dj == 0) continue;
                        min_resp = std::min(min_resp,
                                            std::fabs(yp.at(i, j) - yp.at(i + di, j + dj)));
                    }
        if (min_resp >= 2e-3) break;
        if (attempt == 199) {
            throw ContractError("network_params check: no kink-safe output found");
        }
    }
    for (double& v : y_g.data) v = 0.3 + 0.4 * rng.next_double();

    ForwardCache cache;
    const Tensor y_h = forward(net, x, &cache);
    const LossResult loss = total_loss(y_h, y_g, cfg);
    const NetworkGrads grads = backward(net, cache, loss.grad);

    auto loss_at = [&]() { return total_loss(forward(net, x), y_g, cfg).loss; };
    const double h = 1e-5;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        for (std::size_t i = 0; i < net.layers[l].w.data.size(); ++i) {
            double& p = net.layers[l].w.data[i];
            const double keep = p;
            p = keep + h;
            const double fp = loss_at();
            p = keep - h;
            const double fm = loss_at();
            p = keep;
            res.max_rel_err = std::max(res.max_rel_err,
                                       rel_err(grads.layers[l].w.data[i], (fp - fm) / (2.0 * h)));
        }
        for (std::size_t i = 0; i < net.layers[l].b.size(); ++i) {
            double& p = net.layers[l].b[i];
            const double keep = p;
            p = keep + h;
            const double fp = loss_at();
            p = keep - h;
            const double fm = loss_at();
            p = keep;
            res.max_rel_err =
                std::max(res.max_rel_err, rel_err(grads.layers[l].b[i], (fp - fm) / (2.0 * h)));
        }
    }
    res.pass = res.max_rel_err <= res.tolerance;
    return res;
}

GradCheckResult check_map_grad(SeededRng& rng) {
    GradCheckResult res{"map_objective_grad", 0.0, 1e-4, false};
    NipConfig cfg;
    cfg.lambda = 1e-3;

    const DownsampleOperator op = build_downsampler(9, 9, 3);
    ImagePlane y = kink_safe_plane(9, 9, rng, 2e-3);
    ImagePlane y_l(3, 3);
    for (double& v : y_l.v) v = 0.2 + 0.6 * rng.next_double();

    const ImagePlane g = map_objective_grad(y, y_l, op, cfg);
    const double h = 1e-6;
    for (std::size_t i = 0; i < y.v.size(); ++i) {
        const double keep = y.v[i];
        y.v[i] = keep + h;
        const double fp = map_objective(y, y_l, op, cfg);
        y.v[i] = keep - h;
        const double fm = map_objective(y, y_l, op, cfg);
        y.v[i] = keep;
        res.max_rel_err = std::max(res.max_rel_err, rel_err(g.v[i], (fp - fm) / (2.0 * h)));
    }
    res.pass = res.max_rel_err <= res.tolerance;
    return res;
}

}  // namespace

std::vector<GradCheckResult> run_gradient_checks(std::uint64_t seed) {
    SeededRng rng(seed);
    std::vector<GradCheckResult> out;
    out.push_back(check_nip_grad(rng));
    out.push_back(check_total_loss_grad(rng));
    out.push_back(check_network_params(rng));
    out.push_back(check_map_grad(rng));
    return out;
}

}  // namespace nipsr
