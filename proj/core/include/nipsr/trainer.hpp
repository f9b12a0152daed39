#ifndef NIPSR_TRAINER_HPP
#define NIPSR_TRAINER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nipsr/image.hpp"
#include "nipsr/nip_prior.hpp"
#include "nipsr/srnet.hpp"

namespace nipsr {

struct TrainConfig {
    int batch_size = 64;
    double momentum = 0.9;
    double weight_decay = 0.0001;
    double lr0 = 0.1;
    std::vector<int> decay_epochs{60, 140};
    double decay_factor = 0.1;
    int epochs = 300;
    double clip_theta = 0.01;
    std::uint64_t seed = 0;
    NipConfig nip;
    double training_fraction = 1.0;

    void validate() const;  // throws ConfigError
};

// lr0 * decay_factor^(number of decay epochs <= epoch).
double lr_at_epoch(const TrainConfig& cfg, int epoch);

// Clamps every parameter gradient to [-theta/lr, +theta/lr]; the bound
// widens as the learning rate decays. Idempotent.
void clip_gradients(NetworkGrads& grads, double theta, double lr);

// Heavy-ball velocities, one per parameter tensor, zero initialized.
struct OptimizerState {
    std::vector<LayerGrads> velocity;

    static OptimizerState zeros_like(const SrNetwork& net);
};

// v <- momentum*v - lr*(grad + weight_decay*param); param <- param + v.
// Weight decay applies to weights only, not biases.
void sgd_update(SrNetwork& net, const NetworkGrads& grads, OptimizerState& state,
                double lr, const TrainConfig& cfg);

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double loss = 0.0;
    double mse_term = 0.0;
    double nip_term = 0.0;
    double seconds = 0.0;
};

struct TrainLog {
    std::vector<EpochRecord> epochs;

    // CSV with header epoch,lr,loss,mse_term,nip_term,seconds
    void write_csv(const std::string& path) const;
};

// Mini-batch SGD over the patch set: each epoch reshuffles with the seeded
// RNG, partitions into batches (last partial batch kept), and applies
// loss -> backprop -> clip -> update. Deterministic given (seed, config,
// data). Throws NumericError naming the epoch/batch if the loss leaves
// the finite range.
TrainLog train(SrNetwork& net, const PatchSet& ps, const TrainConfig& cfg);

}  // namespace nipsr

#endif
