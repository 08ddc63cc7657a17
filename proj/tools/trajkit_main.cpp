// Command-line front end. Every tunable is a config key: loadable from a
// `key = value` file via --config and overridable by the matching --key flag.
// Exit statuses: 0 ok, 2 missing or unreadable file, 3 bad configuration or
// usage, 4 internal contract violation.

#include <deque>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "trajkit/bench.hpp"
#include "trajkit/config.hpp"
#include "trajkit/data.hpp"
#include "trajkit/metrics.hpp"
#include "trajkit/model.hpp"
#include "trajkit/training.hpp"

using namespace trajkit;

namespace {

const std::map<std::string, std::string>& key_help() {
    static const std::map<std::string, std::string> help = {
        {"preset", "dataset preset: vehicle | pedestrian_birdseye | pedestrian_highangle"},
        {"name", "dataset name stored in the cache"},
        {"domain", "vehicle_birdseye | pedestrian_birdseye | pedestrian_highangle"},
        {"units", "coordinate units: meters | pixels"},
        {"native_fps", "frame rate of the corpus CSV"},
        {"target_fps", "frame rate after downsampling (native must be a multiple)"},
        {"t_in", "observed window length in steps"},
        {"t_out", "predicted window length in steps"},
        {"features_per_step", "aggregated feature count per observed step"},
        {"embed_dim", "embedding width (default features_per_step * t_in)"},
        {"mlp_hidden", "aggregation MLP hidden width (default 2 * features_per_step * t_in)"},
        {"conv_channels", "conv stage widths as c1,c2,c3"},
        {"cbam_reduction", "channel attention bottleneck ratio"},
        {"spatial_kernel", "spatial attention kernel size (must be 7)"},
        {"epochs", "training epochs (default 40 vehicle, 80 pedestrian)"},
        {"eval_every", "epochs between validation passes"},
        {"learning_rate", "Adam step size"},
        {"beta1", "Adam first-moment decay"},
        {"beta2", "Adam second-moment decay"},
        {"epsilon", "Adam denominator floor"},
        {"gradient_clip", "global gradient norm cap, 0 disables"},
        {"seed", "initialization and shuffle seed"},
        {"synth_kind", "scene kind: constant_velocity | turning | crossing"},
        {"synth_subjects", "subjects per synthetic scene"},
        {"synth_frames", "frames per synthetic scene"},
        {"synth_seed", "synthetic scene seed"},
        {"synth_noise", "position jitter std dev"},
        {"synth_scale", "coordinate scale applied to generated tracks"},
        {"stride", "kept positions between window starts"},
        {"split", "keep one chronological split: train | val | test"},
        {"train_frac", "train fraction for --split"},
        {"val_frac", "val fraction for --split"},
        {"test_frac", "test fraction for --split"},
        {"warmup", "untimed passes before measurement (>= 5)"},
        {"reps", "timed passes (>= 30)"},
        {"corpus", "track CSV path"},
        {"cache", "windowed dataset cache path"},
        {"val_cache", "validation dataset cache path"},
        {"checkpoint", "model checkpoint path"},
        {"log", "training log CSV path"},
        {"out", "main output artifact path"},
        {"json_out", "JSON report path"},
        {"overlay", "per-frame trajectory overlay CSV path"},
    };
    return help;
}

struct CommandState {
    CLI::App* cmd = nullptr;
    std::string config_path;
    CLI::Option* config_opt = nullptr;
    std::map<std::string, std::string> raw;
    std::vector<std::pair<std::string, CLI::Option*>> opts;
};

void add_keys(CommandState& st, const std::vector<std::string>& keys) {
    st.config_opt = st.cmd->add_option("--config", st.config_path,
                                       "key = value file applied before flag overrides");
    for (const auto& key : keys) {
        auto* opt = st.cmd->add_option("--" + key, st.raw[key], key_help().at(key));
        opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        st.opts.emplace_back(key, opt);
    }
}

config::RunConfig gather(const CommandState& st) {
    config::RunConfig base;
    if (st.config_opt->count() > 0) base = config::load_run_config(st.config_path);
    std::vector<std::pair<std::string, std::string>> kv;
    for (const auto& [key, opt] : st.opts)
        if (opt->count() > 0) kv.emplace_back(key, st.raw.at(key));
    config::merge_overrides(base, config::parse_run_config(kv, "command line"));
    return base;
}

const std::string& require_key(const std::optional<std::string>& value, const char* cmd,
                               const char* key) {
    if (!value)
        throw config_error(std::string(cmd) + ": missing required key \"" + key + "\"");
    return *value;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw io_error(path + ": cannot open for writing");
    out << content;
    if (!out) throw io_error(path + ": write failed");
}

// Mismatched window geometry between a checkpoint and a cache is a usage
// mistake, caught here so it reports as configuration (3), not contract (4).
void check_geometry(const char* cmd, const model::ModelConfig& config,
                    const data::DatasetSpec& spec) {
    if (config.t_in != spec.t_in)
        throw config_error(std::string(cmd) + ": checkpoint t_in " + std::to_string(config.t_in) +
                           " does not match dataset t_in " + std::to_string(spec.t_in));
    if (config.t_out != spec.t_out)
        throw config_error(std::string(cmd) + ": checkpoint t_out " +
                           std::to_string(config.t_out) + " does not match dataset t_out " +
                           std::to_string(spec.t_out));
}

int run_synth(const config::RunConfig& cfg) {
    const auto& corpus = require_key(cfg.corpus, "synth", "corpus");
    const auto kind = data::scene_kind_from_name(cfg.synth_kind.value_or("crossing"));
    const int subjects = cfg.synth_subjects.value_or(6);
    const int frames = cfg.synth_frames.value_or(96);
    if (subjects < 1)
        throw config_error("synth: synth_subjects must be >= 1, got " + std::to_string(subjects));
    if (frames < 1)
        throw config_error("synth: synth_frames must be >= 1, got " + std::to_string(frames));
    auto tracks =
        data::synth_scene(kind, subjects, frames, cfg.synth_seed.value_or(7),
                          cfg.synth_noise.value_or(0.0));
    const double scale = cfg.synth_scale.value_or(1.0);
    if (scale != 1.0)
        for (auto& p : tracks) {
            p.x *= scale;
            p.y *= scale;
        }
    data::save_tracks_csv(corpus, tracks);
    std::cout << "wrote " << tracks.size() << " track points (" << subjects << " subjects, "
              << frames << " frames) to " << corpus << "\n";
    return 0;
}

int run_prepare(const config::RunConfig& cfg) {
    const auto& corpus = require_key(cfg.corpus, "prepare", "corpus");
    const auto& cache = require_key(cfg.cache, "prepare", "cache");
    const auto spec = config::dataset_spec(cfg);
    const auto tracks = data::load_tracks(corpus);
    const auto kept = data::downsample(tracks, spec.native_fps, spec.target_fps);
    auto frames = data::group_frames(data::build_windows(kept, spec, cfg.stride.value_or(1)));
    if (cfg.split) {
        auto split = data::split_dataset(frames, config::split_ratios(cfg));
        frames = *cfg.split == "train"  ? std::move(split.train)
                 : *cfg.split == "val" ? std::move(split.val)
                                       : std::move(split.test);
    }
    std::int64_t windows = 0;
    for (const auto& f : frames) windows += static_cast<std::int64_t>(f.windows.size());
    data::save_cache(cache, spec, frames);
    std::cout << "wrote " << frames.size() << " frames (" << windows << " windows) to " << cache
              << "\n";
    return 0;
}

int run_train(const config::RunConfig& cfg) {
    const auto& cache = require_key(cfg.cache, "train", "cache");
    const auto& checkpoint = require_key(cfg.checkpoint, "train", "checkpoint");
    auto [spec, frames] = data::load_cache(cache);
    std::vector<data::FrameSample> val;
    if (cfg.val_cache) {
        auto [val_spec, val_frames] = data::load_cache(*cfg.val_cache);
        if (val_spec.t_in != spec.t_in || val_spec.t_out != spec.t_out)
            throw config_error("train: val_cache windows are " + std::to_string(val_spec.t_in) +
                               "+" + std::to_string(val_spec.t_out) + " steps, train cache has " +
                               std::to_string(spec.t_in) + "+" + std::to_string(spec.t_out));
        val = std::move(val_frames);
    }
    const auto model_config = config::model_config(cfg, spec.t_in, spec.t_out);
    const auto train_config = config::train_config(cfg, spec.domain);
    auto result = training::train(frames, val, model_config, train_config);
    model::save_checkpoint(checkpoint, result.params);
    if (cfg.log) write_text_file(*cfg.log, training::training_log_csv(result.history));
    if (!result.history.empty())
        std::cout << "final train loss " << format_double(result.history.back().train_loss)
                  << "\n";
    std::cout << "wrote checkpoint to " << checkpoint << "\n";
    return 0;
}

int run_eval(const config::RunConfig& cfg) {
    const auto& cache = require_key(cfg.cache, "eval", "cache");
    const auto& checkpoint = require_key(cfg.checkpoint, "eval", "checkpoint");
    auto [spec, frames] = data::load_cache(cache);
    const auto params = model::load_checkpoint(checkpoint);
    check_geometry("eval", params.config, spec);
    const auto report = training::evaluate(frames, params, spec);
    const auto text = metrics::report_text(report);
    std::cout << text;
    if (cfg.out) write_text_file(*cfg.out, text);
    if (cfg.json_out) write_text_file(*cfg.json_out, metrics::report_json(report));
    return 0;
}

int run_predict(const config::RunConfig& cfg) {
    const auto& cache = require_key(cfg.cache, "predict", "cache");
    const auto& checkpoint = require_key(cfg.checkpoint, "predict", "checkpoint");
    const auto& out = require_key(cfg.out, "predict", "out");
    auto [spec, frames] = data::load_cache(cache);
    const auto params = model::load_checkpoint(checkpoint);
    check_geometry("predict", params.config, spec);

    // step counts forward from the anchor: step k is k steps into the future
    std::string csv = "window_id,subject_id,step,x,y\n";
    std::string overlay = "anchor_frame,subject_id,series,step,x,y\n";
    const auto row = [](std::initializer_list<std::string> cells) {
        std::string line;
        for (const auto& c : cells) {
            if (!line.empty()) line += ",";
            line += c;
        }
        return line + "\n";
    };
    std::int64_t window_id = 0;
    for (const auto& frame : frames) {
        const auto predictions = model::predict(frame, params);
        for (std::size_t i = 0; i < frame.windows.size(); ++i) {
            const auto& w = frame.windows[i];
            for (std::size_t k = 0; k < predictions[i].size(); ++k) {
                const Vec2 p = data::denormalize(frame, predictions[i][k]);
                csv += row({std::to_string(window_id), std::to_string(w.subject_id),
                            std::to_string(k + 1), format_double(p.x), format_double(p.y)});
            }
            if (cfg.overlay) {
                const auto series = [&](const char* label, const std::vector<Vec2>& points) {
                    for (std::size_t k = 0; k < points.size(); ++k) {
                        const Vec2 p = data::denormalize(frame, points[k]);
                        overlay += row({std::to_string(w.anchor_frame),
                                        std::to_string(w.subject_id), label,
                                        std::to_string(k + 1), format_double(p.x),
                                        format_double(p.y)});
                    }
                };
                series("observed", w.observed);
                series("truth", w.future);
                series("predicted", predictions[i]);
            }
            ++window_id;
        }
    }
    write_text_file(out, csv);
    if (cfg.overlay) write_text_file(*cfg.overlay, overlay);
    std::cout << "wrote predictions for " << window_id << " windows to " << out << "\n";
    return 0;
}

int run_bench(const config::RunConfig& cfg) {
    const auto& cache = require_key(cfg.cache, "bench", "cache");
    const auto& checkpoint = require_key(cfg.checkpoint, "bench", "checkpoint");
    auto [spec, frames] = data::load_cache(cache);
    const auto params = model::load_checkpoint(checkpoint);
    check_geometry("bench", params.config, spec);
    const auto report =
        bench::bench_forward(params, frames, cfg.warmup.value_or(5), cfg.reps.value_or(30));
    const auto text = bench::report_text(report);
    std::cout << text;
    if (cfg.out) write_text_file(*cfg.out, text);
    if (cfg.json_out) write_text_file(*cfg.json_out, bench::report_json(report));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trajectory prediction toolkit: synthetic corpora, windowed caches, "
                 "training, evaluation, prediction, and latency measurement"};
    app.require_subcommand(1);

    struct Command {
        const char* name;
        const char* description;
        std::vector<std::string> keys;
        int (*run)(const config::RunConfig&);
    };
    const std::vector<Command> commands = {
        {"synth", "generate a synthetic track corpus CSV",
         {"corpus", "synth_kind", "synth_subjects", "synth_frames", "synth_seed", "synth_noise",
          "synth_scale"},
         run_synth},
        {"prepare", "window a track corpus into a dataset cache",
         {"corpus", "cache", "preset", "name", "domain", "units", "native_fps", "target_fps",
          "t_in", "t_out", "stride", "split", "train_frac", "val_frac", "test_frac"},
         run_prepare},
        {"train", "train a model on a dataset cache",
         {"cache", "val_cache", "checkpoint", "log", "features_per_step", "embed_dim",
          "mlp_hidden", "conv_channels", "cbam_reduction", "spatial_kernel", "epochs",
          "learning_rate", "beta1", "beta2", "epsilon", "seed", "gradient_clip", "eval_every"},
         run_train},
        {"eval", "report displacement metrics for a checkpoint on a cache",
         {"cache", "checkpoint", "out", "json_out"},
         run_eval},
        {"predict", "write denormalized predictions for every window",
         {"cache", "checkpoint", "out", "overlay"},
         run_predict},
        {"bench", "measure per-sample forward latency and throughput",
         {"cache", "checkpoint", "warmup", "reps", "out", "json_out"},
         run_bench},
    };

    std::deque<CommandState> states;
    for (const auto& command : commands) {
        auto& st = states.emplace_back();
        st.cmd = app.add_subcommand(command.name, command.description);
        add_keys(st, command.keys);
    }

    try {
        app.parse(argc, argv);
        for (std::size_t i = 0; i < commands.size(); ++i)
            if (app.got_subcommand(commands[i].name)) return commands[i].run(gather(states[i]));
        return 3;  // unreachable: a subcommand is required
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const contract_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
