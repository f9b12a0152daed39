#include "nipsr/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace nipsr {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_commas(const std::string& s, const std::string& key) {
    std::vector<std::string> out;
    std::istringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError("empty element in list for key '" + key + "'");
        out.push_back(item);
    }
    if (out.empty()) throw ConfigError("empty list for key '" + key + "'");
    return out;
}

double parse_real(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw ConfigError("");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("invalid real for key '" + key + "': '" + v + "'");
    }
}

int parse_int(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size() || d < INT32_MIN || d > INT32_MAX) throw ConfigError("");
        return static_cast<int>(d);
    } catch (const std::exception&) {
        throw ConfigError("invalid integer for key '" + key + "': '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        if (!v.empty() && v[0] == '-') throw ConfigError("");
        const unsigned long long d = std::stoull(v, &pos);
        if (pos != v.size()) throw ConfigError("");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("invalid unsigned integer for key '" + key + "': '" + v + "'");
    }
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("invalid boolean for key '" + key + "': '" + v + "' (use true/false)");
}

void check(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

}  // namespace

void set_config_key(CliConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "manifest") {
        cfg.manifest = value;
    } else if (key == "output_dir") {
        cfg.output_dir = value;
    } else if (key == "checkpoint") {
        cfg.checkpoint = value;
    } else if (key == "scale") {
        cfg.scale = parse_int(value, key);
        check(cfg.scale >= 1, "scale must be >= 1");
    } else if (key == "patch_size") {
        cfg.patch_size = parse_int(value, key);
        check(cfg.patch_size >= 3, "patch_size must be >= 3");
    } else if (key == "patch_stride") {
        cfg.patch_stride = parse_int(value, key);
        check(cfg.patch_stride >= 1, "patch_stride must be >= 1");
    } else if (key == "augment") {
        cfg.augment = parse_bool(value, key);
    } else if (key == "depth") {
        cfg.depth = parse_int(value, key);
        check(cfg.depth >= 2, "depth must be >= 2");
    } else if (key == "batch_size") {
        cfg.batch_size = parse_int(value, key);
        check(cfg.batch_size >= 1, "batch_size must be >= 1");
    } else if (key == "momentum") {
        cfg.momentum = parse_real(value, key);
        check(cfg.momentum >= 0.0 && cfg.momentum < 1.0, "momentum must be in [0, 1)");
    } else if (key == "weight_decay") {
        cfg.weight_decay = parse_real(value, key);
        check(cfg.weight_decay >= 0.0, "weight_decay must be >= 0");
    } else if (key == "lr0") {
        cfg.lr0 = parse_real(value, key);
        check(cfg.lr0 > 0.0, "lr0 must be positive");
    } else if (key == "decay_epochs") {
        std::vector<int> v;
        for (const std::string& s : split_commas(value, key)) {
            v.push_back(parse_int(s, key));
            check(v.back() >= 1, "decay_epochs entries must be >= 1");
            check(v.size() < 2 || v[v.size() - 2] < v.back(),
                  "decay_epochs must be strictly increasing");
        }
        cfg.decay_epochs = std::move(v);
    } else if (key == "decay_factor") {
        cfg.decay_factor = parse_real(value, key);
        check(cfg.decay_factor > 0.0 && cfg.decay_factor <= 1.0,
              "decay_factor must be in (0, 1]");
    } else if (key == "epochs") {
        cfg.epochs = parse_int(value, key);
        check(cfg.epochs >= 0, "epochs must be >= 0");
    } else if (key == "clip_theta") {
        cfg.clip_theta = parse_real(value, key);
        check(cfg.clip_theta > 0.0, "clip_theta must be positive");
    } else if (key == "seed") {
        cfg.seed = parse_u64(value, key);
    } else if (key == "training_fraction") {
        cfg.training_fraction = parse_real(value, key);
        check(cfg.training_fraction > 0.0 && cfg.training_fraction <= 1.0,
              "training_fraction must be in (0, 1]");
    } else if (key == "alpha") {
        cfg.alpha = parse_real(value, key);
        check(cfg.alpha > 0.0 && cfg.alpha <= 2.0, "alpha must be in (0, 2]");
    } else if (key == "lambda") {
        cfg.lambda = parse_real(value, key);
        check(cfg.lambda >= 0.0, "lambda must be >= 0");
    } else if (key == "sigma_n") {
        cfg.sigma_n = parse_real(value, key);
        check(*cfg.sigma_n > 0.0, "sigma_n must be positive");
    } else if (key == "sigma_r") {
        cfg.sigma_r = parse_real(value, key);
        check(*cfg.sigma_r > 0.0, "sigma_r must be positive");
    } else if (key == "smooth_surrogate") {
        cfg.smooth_surrogate = parse_bool(value, key);
    } else if (key == "map_iterations") {
        cfg.map_iterations = parse_int(value, key);
        check(cfg.map_iterations >= 0, "map_iterations must be >= 0");
    } else if (key == "map_step_size") {
        cfg.map_step_size = parse_real(value, key);
        check(cfg.map_step_size > 0.0, "map_step_size must be > 0");
    } else if (key == "map_record_trace") {
        cfg.map_record_trace = parse_bool(value, key);
    } else if (key == "sweep_depths") {
        std::vector<int> v;
        for (const std::string& s : split_commas(value, key)) {
            v.push_back(parse_int(s, key));
            check(v.back() >= 2, "sweep_depths entries must be >= 2");
        }
        cfg.sweep_depths = std::move(v);
    } else if (key == "sweep_fractions") {
        std::vector<double> v;
        for (const std::string& s : split_commas(value, key)) {
            v.push_back(parse_real(s, key));
            check(v.back() > 0.0 && v.back() <= 1.0,
                  "sweep_fractions entries must be in (0, 1]");
        }
        cfg.sweep_fractions = std::move(v);
    } else if (key == "sweep_variants") {
        std::vector<std::string> v = split_commas(value, key);
        for (const std::string& s : v) {
            check(s == "baseline" || s == "nip",
                  "sweep_variants entries must be baseline or nip");
        }
        cfg.sweep_variants = std::move(v);
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

CliConfig parse_config_text(const std::string& text) {
    CliConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
        const std::size_t line_start = offset;
        offset += line.size() + 1;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line is not 'key = value'", line_start);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("config line has an empty key", line_start);
        if (!seen.insert(key).second) throw ConfigError("duplicate config key '" + key + "'");
        set_config_key(cfg, key, value);
    }
    if (seen.count("lambda") && (seen.count("sigma_n") || seen.count("sigma_r"))) {
        throw ConfigError("lambda conflicts with sigma_n/sigma_r; give one or the other");
    }
    cfg.nip_config().validate();
    return cfg;
}

CliConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config_text(buf.str());
}

std::string serialize_config(const CliConfig& cfg) {
    std::ostringstream out;
    char buf[64];
    auto real = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    auto line = [&](const std::string& k, const std::string& v) {
        out << k << " = " << v << "\n";
    };
    line("manifest", cfg.manifest);
    line("output_dir", cfg.output_dir);
    line("checkpoint", cfg.checkpoint);
    line("scale", std::to_string(cfg.scale));
    line("patch_size", std::to_string(cfg.patch_size));
    line("patch_stride", std::to_string(cfg.patch_stride));
    line("augment", cfg.augment ? "true" : "false");
    line("depth", std::to_string(cfg.depth));
    line("batch_size", std::to_string(cfg.batch_size));
    line("momentum", real(cfg.momentum));
    line("weight_decay", real(cfg.weight_decay));
    line("lr0", real(cfg.lr0));
    {
        std::string v;
        for (std::size_t i = 0; i < cfg.decay_epochs.size(); ++i) {
            if (i) v += ",";
            v += std::to_string(cfg.decay_epochs[i]);
        }
        line("decay_epochs", v);
    }
    line("decay_factor", real(cfg.decay_factor));
    line("epochs", std::to_string(cfg.epochs));
    line("clip_theta", real(cfg.clip_theta));
    line("seed", std::to_string(cfg.seed));
    line("training_fraction", real(cfg.training_fraction));
    line("alpha", real(cfg.alpha));
    if (cfg.sigma_n && cfg.sigma_r) {
        line("sigma_n", real(*cfg.sigma_n));
        line("sigma_r", real(*cfg.sigma_r));
    } else {
        line("lambda", real(cfg.lambda));
    }
    line("smooth_surrogate", cfg.smooth_surrogate ? "true" : "false");
    line("map_iterations", std::to_string(cfg.map_iterations));
    line("map_step_size", real(cfg.map_step_size));
    line("map_record_trace", cfg.map_record_trace ? "true" : "false");
    {
        std::string v;
        for (std::size_t i = 0; i < cfg.sweep_depths.size(); ++i) {
            if (i) v += ",";
            v += std::to_string(cfg.sweep_depths[i]);
        }
        line("sweep_depths", v);
    }
    {
        std::string v;
        for (std::size_t i = 0; i < cfg.sweep_fractions.size(); ++i) {
            if (i) v += ",";
            v += real(cfg.sweep_fractions[i]);
        }
        line("sweep_fractions", v);
    }
    {
        std::string v;
        for (std::size_t i = 0; i < cfg.sweep_variants.size(); ++i) {
            if (i) v += ",";
            v += cfg.sweep_variants[i];
        }
        line("sweep_variants", v);
    }
    return out.str();
}

NipConfig CliConfig::nip_config() const {
    NipConfig n;
    n.alpha = alpha;
    n.sigma_n = sigma_n;
    n.sigma_r = sigma_r;
    n.lambda = lambda;
    n.smooth_surrogate = smooth_surrogate;
    return n;
}

TrainConfig CliConfig::train_config() const {
    TrainConfig t;
    t.batch_size = batch_size;
    t.momentum = momentum;
    t.weight_decay = weight_decay;
    t.lr0 = lr0;
    t.decay_epochs = decay_epochs;
    t.decay_factor = decay_factor;
    t.epochs = epochs;
    t.clip_theta = clip_theta;
    t.seed = seed;
    t.nip = nip_config();
    t.training_fraction = training_fraction;
    return t;
}

MapConfig CliConfig::map_config() const {
    MapConfig m;
    m.nip = nip_config();
    m.iterations = map_iterations;
    m.step_size = map_step_size;
    m.record_trace = map_record_trace;
    return m;
}

PipelineConfig CliConfig::pipeline_config() const {
    PipelineConfig p;
    p.scale = scale;
    p.patch_size = patch_size;
    p.patch_stride = patch_stride;
    p.augment = augment;
    return p;
}

SweepAxes CliConfig::sweep_axes() const {
    SweepAxes a;
    a.depths = sweep_depths;
    a.fractions = sweep_fractions;
    a.variants = sweep_variants;
    return a;
}

}  // namespace nipsr
