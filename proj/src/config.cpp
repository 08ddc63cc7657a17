#include "trajkit/config.hpp"

#include <cstdlib>

namespace trajkit::config {

namespace {

double double_field(const std::string& value, const std::string& where) {
    if (value.empty()) throw config_error(where + ": expected a number, got an empty value");
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end != value.c_str() + value.size() || !std::isfinite(v))
        throw config_error(where + ": expected a finite number, got \"" + value + "\"");
    return v;
}

int int_field(const std::string& value, const std::string& where) {
    if (value.empty()) throw config_error(where + ": expected an integer, got an empty value");
    char* end = nullptr;
    const long long v = std::strtoll(value.c_str(), &end, 10);
    if (end != value.c_str() + value.size() || v < -(1LL << 31) || v >= (1LL << 31))
        throw config_error(where + ": expected an integer, got \"" + value + "\"");
    return static_cast<int>(v);
}

std::uint64_t u64_field(const std::string& value, const std::string& where) {
    if (value.empty() || value[0] == '-' || value[0] == '+')
        throw config_error(where + ": expected an unsigned integer, got \"" + value + "\"");
    char* end = nullptr;
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (end != value.c_str() + value.size())
        throw config_error(where + ": expected an unsigned integer, got \"" + value + "\"");
    return v;
}

std::array<int, 3> channels_field(const std::string& value, const std::string& where) {
    std::array<int, 3> out{};
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        const std::size_t comma = value.find(',', pos);
        const bool last = i == 2;
        if (last != (comma == std::string::npos))
            throw config_error(where + ": expected three comma-separated channel counts, got \"" +
                               value + "\"");
        out[i] = int_field(trim(value.substr(pos, comma - pos)), where);
        pos = comma + 1;
    }
    return out;
}

data::Domain domain_field(const std::string& value, const std::string& where) {
    if (value == "vehicle_birdseye") return data::Domain::vehicle_birdseye;
    if (value == "pedestrian_birdseye") return data::Domain::pedestrian_birdseye;
    if (value == "pedestrian_highangle") return data::Domain::pedestrian_highangle;
    throw config_error(where + ": unknown domain \"" + value + "\"");
}

data::Units units_field(const std::string& value, const std::string& where) {
    if (value == "meters") return data::Units::meters;
    if (value == "pixels") return data::Units::pixels;
    throw config_error(where + ": unknown units \"" + value + "\"");
}

}  // namespace

RunConfig parse_run_config(const std::vector<std::pair<std::string, std::string>>& kv,
                           const std::string& origin) {
    RunConfig c;
    for (const auto& [key, value] : kv) {
        const std::string where = origin + " " + key;
        if (key == "preset") {
            data::dataset_preset(value);  // rejects unknown names
            c.preset = value;
        } else if (key == "name") {
            c.dataset_name = value;
        } else if (key == "domain") {
            domain_field(value, where);
            c.domain = value;
        } else if (key == "units") {
            units_field(value, where);
            c.units = value;
        } else if (key == "native_fps") {
            c.native_fps = double_field(value, where);
        } else if (key == "target_fps") {
            c.target_fps = double_field(value, where);
        } else if (key == "t_in") {
            c.t_in = int_field(value, where);
        } else if (key == "t_out") {
            c.t_out = int_field(value, where);
        } else if (key == "features_per_step") {
            c.features_per_step = int_field(value, where);
        } else if (key == "embed_dim") {
            c.embed_dim = int_field(value, where);
        } else if (key == "mlp_hidden") {
            c.mlp_hidden = int_field(value, where);
        } else if (key == "conv_channels") {
            c.conv_channels = channels_field(value, where);
        } else if (key == "cbam_reduction") {
            c.cbam_reduction = int_field(value, where);
        } else if (key == "spatial_kernel") {
            c.spatial_kernel = int_field(value, where);
        } else if (key == "epochs") {
            c.epochs = int_field(value, where);
        } else if (key == "eval_every") {
            c.eval_every = int_field(value, where);
        } else if (key == "learning_rate") {
            c.learning_rate = double_field(value, where);
        } else if (key == "beta1") {
            c.beta1 = double_field(value, where);
        } else if (key == "beta2") {
            c.beta2 = double_field(value, where);
        } else if (key == "epsilon") {
            c.epsilon = double_field(value, where);
        } else if (key == "gradient_clip") {
            c.gradient_clip = double_field(value, where);
        } else if (key == "seed") {
            c.seed = u64_field(value, where);
        } else if (key == "synth_kind") {
            data::scene_kind_from_name(value);  // rejects unknown names
            c.synth_kind = value;
        } else if (key == "synth_subjects") {
            c.synth_subjects = int_field(value, where);
        } else if (key == "synth_frames") {
            c.synth_frames = int_field(value, where);
        } else if (key == "synth_seed") {
            c.synth_seed = u64_field(value, where);
        } else if (key == "synth_noise") {
            c.synth_noise = double_field(value, where);
        } else if (key == "synth_scale") {
            c.synth_scale = double_field(value, where);
        } else if (key == "stride") {
            c.stride = int_field(value, where);
        } else if (key == "split") {
            if (value != "train" && value != "val" && value != "test")
                throw config_error(where + ": expected train, val, or test, got \"" + value + "\"");
            c.split = value;
        } else if (key == "train_frac") {
            c.train_frac = double_field(value, where);
        } else if (key == "val_frac") {
            c.val_frac = double_field(value, where);
        } else if (key == "test_frac") {
            c.test_frac = double_field(value, where);
        } else if (key == "warmup") {
            c.warmup = int_field(value, where);
        } else if (key == "reps") {
            c.reps = int_field(value, where);
        } else if (key == "corpus") {
            c.corpus = value;
        } else if (key == "cache") {
            c.cache = value;
        } else if (key == "val_cache") {
            c.val_cache = value;
        } else if (key == "checkpoint") {
            c.checkpoint = value;
        } else if (key == "log") {
            c.log = value;
        } else if (key == "out") {
            c.out = value;
        } else if (key == "json_out") {
            c.json_out = value;
        } else if (key == "overlay") {
            c.overlay = value;
        } else {
            throw config_error(origin + ": unknown key \"" + key + "\"");
        }
    }
    return c;
}

RunConfig load_run_config(const std::string& path) {
    return parse_run_config(parse_kv_file(path), path);
}

void merge_overrides(RunConfig& base, const RunConfig& overrides) {
    const auto take = [](auto& dst, const auto& src) {
        if (src) dst = src;
    };
    take(base.preset, overrides.preset);
    take(base.dataset_name, overrides.dataset_name);
    take(base.domain, overrides.domain);
    take(base.units, overrides.units);
    take(base.native_fps, overrides.native_fps);
    take(base.target_fps, overrides.target_fps);
    take(base.t_in, overrides.t_in);
    take(base.t_out, overrides.t_out);
    take(base.features_per_step, overrides.features_per_step);
    take(base.embed_dim, overrides.embed_dim);
    take(base.mlp_hidden, overrides.mlp_hidden);
    take(base.conv_channels, overrides.conv_channels);
    take(base.cbam_reduction, overrides.cbam_reduction);
    take(base.spatial_kernel, overrides.spatial_kernel);
    take(base.epochs, overrides.epochs);
    take(base.eval_every, overrides.eval_every);
    take(base.learning_rate, overrides.learning_rate);
    take(base.beta1, overrides.beta1);
    take(base.beta2, overrides.beta2);
    take(base.epsilon, overrides.epsilon);
    take(base.gradient_clip, overrides.gradient_clip);
    take(base.seed, overrides.seed);
    take(base.synth_kind, overrides.synth_kind);
    take(base.synth_subjects, overrides.synth_subjects);
    take(base.synth_frames, overrides.synth_frames);
    take(base.synth_seed, overrides.synth_seed);
    take(base.synth_noise, overrides.synth_noise);
    take(base.synth_scale, overrides.synth_scale);
    take(base.stride, overrides.stride);
    take(base.split, overrides.split);
    take(base.train_frac, overrides.train_frac);
    take(base.val_frac, overrides.val_frac);
    take(base.test_frac, overrides.test_frac);
    take(base.warmup, overrides.warmup);
    take(base.reps, overrides.reps);
    take(base.corpus, overrides.corpus);
    take(base.cache, overrides.cache);
    take(base.val_cache, overrides.val_cache);
    take(base.checkpoint, overrides.checkpoint);
    take(base.log, overrides.log);
    take(base.out, overrides.out);
    take(base.json_out, overrides.json_out);
    take(base.overlay, overrides.overlay);
}

data::DatasetSpec dataset_spec(const RunConfig& config) {
    auto spec = data::dataset_preset(config.preset.value_or("vehicle"));
    if (config.dataset_name) spec.name = *config.dataset_name;
    if (config.domain) spec.domain = domain_field(*config.domain, "dataset domain");
    if (config.units) spec.units = units_field(*config.units, "dataset units");
    if (config.native_fps) spec.native_fps = *config.native_fps;
    if (config.target_fps) spec.target_fps = *config.target_fps;
    if (config.t_in) spec.t_in = *config.t_in;
    if (config.t_out) spec.t_out = *config.t_out;
    return spec;
}

model::ModelConfig model_config(const RunConfig& config, int t_in, int t_out) {
    const int f = config.features_per_step.value_or(8);
    model::ModelConfig m;
    m.t_in = t_in;
    m.t_out = t_out;
    m.features_per_step = f;
    m.embed_dim = config.embed_dim.value_or(f * t_in);
    m.mlp_hidden = config.mlp_hidden.value_or(2 * f * t_in);
    m.conv_channels = config.conv_channels.value_or(std::array<int, 3>{16, 32, 32});
    m.cbam_reduction = config.cbam_reduction.value_or(8);
    m.spatial_kernel = config.spatial_kernel.value_or(7);
    model::validate(m);
    return m;
}

training::TrainConfig train_config(const RunConfig& config, data::Domain domain) {
    auto t = domain == data::Domain::vehicle_birdseye ? training::vehicle_train_config()
                                                      : training::pedestrian_train_config();
    if (config.epochs) t.epochs = *config.epochs;
    if (config.eval_every) t.eval_every = *config.eval_every;
    if (config.learning_rate) t.learning_rate = *config.learning_rate;
    if (config.beta1) t.beta1 = *config.beta1;
    if (config.beta2) t.beta2 = *config.beta2;
    if (config.epsilon) t.epsilon = *config.epsilon;
    if (config.gradient_clip) t.gradient_clip = *config.gradient_clip;
    if (config.seed) t.seed = *config.seed;
    training::validate(t);
    return t;
}

data::SplitRatios split_ratios(const RunConfig& config) {
    data::SplitRatios r;
    if (config.train_frac) r.train = *config.train_frac;
    if (config.val_frac) r.val = *config.val_frac;
    if (config.test_frac) r.test = *config.test_frac;
    return r;
}

}  // namespace trajkit::config
