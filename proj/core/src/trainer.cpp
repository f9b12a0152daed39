#include "nipsr/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "nipsr/rng.hpp"

namespace nipsr {

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
    if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
    if (lr0 <= 0.0) throw ConfigError("lr0 must be positive");
    if (!(decay_factor > 0.0 && decay_factor <= 1.0)) {
        throw ConfigError("decay_factor must be in (0, 1]");
    }
    for (std::size_t i = 1; i < decay_epochs.size(); ++i) {
        if (decay_epochs[i] <= decay_epochs[i - 1]) {
            throw ConfigError("decay_epochs must be strictly increasing");
        }
    }
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (clip_theta <= 0.0) throw ConfigError("clip_theta must be positive");
    if (!(training_fraction > 0.0 && training_fraction <= 1.0)) {
        throw ConfigError("training_fraction must be in (0, 1]");
    }
    nip.validate();
}

double lr_at_epoch(const TrainConfig& cfg, int epoch) {
    if (epoch < 0 || epoch >= cfg.epochs) {
        throw ContractError("lr_at_epoch: epoch out of range");
    }
    double lr = cfg.lr0;
    for (int d : cfg.decay_epochs) {
        if (d <= epoch) lr *= cfg.decay_factor;
    }
    return lr;
}

void clip_gradients(NetworkGrads& grads, double theta, double lr) {
    if (theta <= 0.0 || lr <= 0.0) throw ContractError("clip_gradients: theta and lr must be positive");
    const double bound = theta / lr;
    auto clamp_all = [bound](std::vector<double>& v) {
        for (double& g : v) g = std::clamp(g, -bound, bound);
    };
    for (auto& layer : grads.layers) {
        clamp_all(layer.w.data);
        clamp_all(layer.b);
    }
}

OptimizerState OptimizerState::zeros_like(const SrNetwork& net) {
    OptimizerState s;
    s.velocity.reserve(net.layers.size());
    for (const auto& l : net.layers) {
        LayerGrads v;
        v.w = Tensor(l.w.n, l.w.c, l.w.h, l.w.w);
        v.b.assign(l.b.size(), 0.0);
        s.velocity.push_back(std::move(v));
    }
    return s;
}

void sgd_update(SrNetwork& net, const NetworkGrads& grads, OptimizerState& state,
                double lr, const TrainConfig& cfg) {
    if (grads.layers.size() != net.layers.size() || state.velocity.size() != net.layers.size()) {
        throw ContractError("sgd_update: layer count mismatch across net/grads/state");
    }
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        ConvLayer& layer = net.layers[l];
        const LayerGrads& g = grads.layers[l];
        LayerGrads& v = state.velocity[l];
        if (!g.w.same_shape(layer.w) || g.b.size() != layer.b.size()) {
            throw ContractError("sgd_update: gradient shape mismatch at layer " + std::to_string(l));
        }
        for (std::size_t i = 0; i < layer.w.data.size(); ++i) {
            const double step = g.w.data[i] + cfg.weight_decay * layer.w.data[i];
            v.w.data[i] = cfg.momentum * v.w.data[i] - lr * step;
            layer.w.data[i] += v.w.data[i];
        }
        for (std::size_t i = 0; i < layer.b.size(); ++i) {
            v.b[i] = cfg.momentum * v.b[i] - lr * g.b[i];
            layer.b[i] += v.b[i];
        }
    }
}

void TrainLog::write_csv(const std::string& path) const {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << "epoch,lr,loss,mse_term,nip_term,seconds\n";
    char line[256];
    for (const auto& r : epochs) {
        std::snprintf(line, sizeof(line), "%d,%.10g,%.10g,%.10g,%.10g,%.3f\n", r.epoch, r.lr,
                      r.loss, r.mse_term, r.nip_term, r.seconds);
        f << line;
    }
    if (!f) throw IoError("write failure on '" + path + "'");
}

TrainLog train(SrNetwork& net, const PatchSet& ps, const TrainConfig& cfg) {
    cfg.validate();
    if (ps.count() == 0) throw ContractError("train: empty patch set");

    const int m = ps.count();
    const int size = ps.lr.h;
    const std::size_t plane = static_cast<std::size_t>(size) * size;

    OptimizerState state = OptimizerState::zeros_like(net);
    SeededRng rng(cfg.seed);
    std::vector<std::size_t> order(static_cast<std::size_t>(m));

    TrainLog log;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const double lr = lr_at_epoch(cfg, epoch);

        std::iota(order.begin(), order.end(), 0);
        shuffle_in_place(order, rng);

        double sum_loss = 0.0, sum_mse = 0.0, sum_nip = 0.0;
        int batch_index = 0;
        for (int start = 0; start < m; start += cfg.batch_size, ++batch_index) {
            const int b = std::min(cfg.batch_size, m - start);
            Tensor x(b, 1, size, size);
            Tensor target(b, 1, size, size);
            for (int i = 0; i < b; ++i) {
                const std::size_t src = order[static_cast<std::size_t>(start + i)];
                std::copy_n(ps.lr.data.begin() + static_cast<std::ptrdiff_t>(src * plane), plane,
                            x.data.begin() + static_cast<std::ptrdiff_t>(i) * static_cast<std::ptrdiff_t>(plane));
                std::copy_n(ps.hr.data.begin() + static_cast<std::ptrdiff_t>(src * plane), plane,
                            target.data.begin() + static_cast<std::ptrdiff_t>(i) * static_cast<std::ptrdiff_t>(plane));
            }

            ForwardCache cache;
            const Tensor y = forward(net, x, &cache);
            LossResult loss;
            try {
                loss = total_loss(y, target, cfg.nip);
            } catch (const NumericError&) {
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(batch_index));
            }

            NetworkGrads grads = backward(net, cache, loss.grad);
            clip_gradients(grads, cfg.clip_theta, lr);
            sgd_update(net, grads, state, lr, cfg);

            sum_loss += loss.loss * b;
            sum_mse += loss.mse_term * b;
            sum_nip += loss.nip_term * b;
        }

        const auto t1 = std::chrono::steady_clock::now();
        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = lr;
        rec.loss = sum_loss / m;
        rec.mse_term = sum_mse / m;
        rec.nip_term = sum_nip / m;
        rec.seconds = std::chrono::duration<double>(t1 - t0).count();
        log.epochs.push_back(rec);
    }
    return log;
}

}  // namespace nipsr
