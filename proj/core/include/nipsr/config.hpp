#ifndef NIPSR_CONFIG_HPP
#define NIPSR_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nipsr/evaluator.hpp"
#include "nipsr/map_solver.hpp"
#include "nipsr/trainer.hpp"

namespace nipsr {

// Flat key = value configuration mirroring TrainConfig, NipConfig,
// MapConfig, the patch pipeline, and the sweep axes, plus the three
// paths. `#` starts a comment, unknown keys are hard errors, and every
// value is range-checked while parsing. lambda and the sigma pair are
// mutually exclusive in one file: when the sigmas are given, lambda is
// derived as sigma_r^2 / sigma_n^alpha.
struct CliConfig {
    std::string manifest;
    std::string output_dir = ".";
    std::string checkpoint;

    int scale = 3;
    int patch_size = 41;
    int patch_stride = 41;
    bool augment = false;

    int depth = 20;

    int batch_size = 64;
    double momentum = 0.9;
    double weight_decay = 0.0001;
    double lr0 = 0.1;
    std::vector<int> decay_epochs{60, 140};
    double decay_factor = 0.1;
    int epochs = 300;
    double clip_theta = 0.01;
    std::uint64_t seed = 0;
    double training_fraction = 1.0;

    double alpha = 0.1;
    double lambda = 1e-3;
    std::optional<double> sigma_n;
    std::optional<double> sigma_r;
    bool smooth_surrogate = true;

    int map_iterations = 400;
    double map_step_size = 0.1;
    bool map_record_trace = false;

    std::vector<int> sweep_depths{5, 10};
    std::vector<double> sweep_fractions{0.1, 0.5, 1.0};
    std::vector<std::string> sweep_variants{"baseline", "nip"};

    NipConfig nip_config() const;
    TrainConfig train_config() const;
    MapConfig map_config() const;
    PipelineConfig pipeline_config() const;
    SweepAxes sweep_axes() const;
};

// Sets one key on the config, with the same validation the file parser
// applies. Used for command-line overrides. Throws ConfigError on an
// unknown key or out-of-range value.
void set_config_key(CliConfig& cfg, const std::string& key, const std::string& value);

CliConfig parse_config_text(const std::string& text);
CliConfig load_config(const std::string& path);

// Canonical serialization: fixed key order, %.17g reals (so a round trip
// re-parses to identical values), lambda omitted when the sigmas are set.
std::string serialize_config(const CliConfig& cfg);

}  // namespace nipsr

#endif
