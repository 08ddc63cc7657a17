#pragma once

// Run configuration shared by the command-line front end: every tunable is a
// `key = value` entry, loadable from a config file and overridable by a
// `--key value` flag. Fields stay unset until given, so command handlers can
// derive defaults from their inputs (preset, cached dataset spec, checkpoint)
// before the overrides land on top.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trajkit/data.hpp"
#include "trajkit/model.hpp"
#include "trajkit/training.hpp"

namespace trajkit::config {

struct RunConfig {
    // dataset
    std::optional<std::string> preset;  // vehicle | pedestrian_birdseye | pedestrian_highangle
    std::optional<std::string> dataset_name;  // key "name"
    std::optional<std::string> domain;
    std::optional<std::string> units;
    std::optional<double> native_fps, target_fps;
    std::optional<int> t_in, t_out;

    // model widths
    std::optional<int> features_per_step, embed_dim, mlp_hidden;
    std::optional<std::array<int, 3>> conv_channels;  // value "c1,c2,c3"
    std::optional<int> cbam_reduction, spatial_kernel;

    // optimizer
    std::optional<int> epochs, eval_every;
    std::optional<double> learning_rate, beta1, beta2, epsilon, gradient_clip;
    std::optional<std::uint64_t> seed;

    // synthetic corpus generator
    std::optional<std::string> synth_kind;
    std::optional<int> synth_subjects, synth_frames;
    std::optional<std::uint64_t> synth_seed;
    std::optional<double> synth_noise, synth_scale;

    // windowing and splits
    std::optional<int> stride;
    std::optional<std::string> split;  // train | val | test
    std::optional<double> train_frac, val_frac, test_frac;

    // latency harness
    std::optional<int> warmup, reps;

    // paths
    std::optional<std::string> corpus, cache, val_cache, checkpoint, log, out,
        json_out, overlay;
};

// Applies entries in order (later wins); the first unknown key or unparseable
// value throws a config error naming `origin` and the key.
RunConfig parse_run_config(const std::vector<std::pair<std::string, std::string>>& kv,
                           const std::string& origin);
RunConfig load_run_config(const std::string& path);

// Every field set in `overrides` replaces the one in `base`.
void merge_overrides(RunConfig& base, const RunConfig& overrides);

// Preset (default "vehicle") plus any per-field overrides.
data::DatasetSpec dataset_spec(const RunConfig& config);

// Width fields derived from the window geometry unless overridden; validated.
model::ModelConfig model_config(const RunConfig& config, int t_in, int t_out);

// Epoch budget keyed off the data domain unless overridden; validated.
training::TrainConfig train_config(const RunConfig& config, data::Domain domain);

data::SplitRatios split_ratios(const RunConfig& config);

}  // namespace trajkit::config
