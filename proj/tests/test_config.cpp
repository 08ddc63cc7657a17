#include "trajkit/config.hpp"

#include "test_support.hpp"

#include <fstream>

using namespace trajkit;
using config::RunConfig;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = "/tmp/trajkit_test_" + name;
    std::ofstream out(path);
    out << content;
    return path;
}

using Kv = std::vector<std::pair<std::string, std::string>>;

bool message_contains(const std::function<void()>& fn, const std::string& needle) {
    try {
        fn();
    } catch (const config_error& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
}

void check_parse() {
    const Kv kv = {
        {"preset", "pedestrian_highangle"},
        {"name", "walkway"},
        {"domain", "pedestrian_birdseye"},
        {"units", "pixels"},
        {"native_fps", "30"},
        {"target_fps", "2.5"},
        {"t_in", "8"},
        {"t_out", "12"},
        {"features_per_step", "4"},
        {"conv_channels", "24, 48, 48"},
        {"epochs", "120"},
        {"learning_rate", "0.005"},
        {"seed", "42"},
        {"synth_kind", "turning"},
        {"synth_noise", "0.25"},
        {"stride", "2"},
        {"split", "val"},
        {"warmup", "6"},
        {"reps", "40"},
        {"cache", "a.bin"},
        {"out", "report.txt"},
    };
    const auto c = config::parse_run_config(kv, "test");
    REQUIRE(c.preset && *c.preset == "pedestrian_highangle");
    REQUIRE(c.dataset_name && *c.dataset_name == "walkway");
    REQUIRE(c.domain && *c.domain == "pedestrian_birdseye");
    REQUIRE(c.units && *c.units == "pixels");
    REQUIRE(c.native_fps && *c.native_fps == 30.0);
    REQUIRE(c.target_fps && *c.target_fps == 2.5);
    REQUIRE(c.t_in && *c.t_in == 8);
    REQUIRE(c.t_out && *c.t_out == 12);
    REQUIRE(c.features_per_step && *c.features_per_step == 4);
    REQUIRE(c.conv_channels && (*c.conv_channels == std::array<int, 3>{24, 48, 48}));
    REQUIRE(c.epochs && *c.epochs == 120);
    REQUIRE(c.learning_rate && *c.learning_rate == 0.005);
    REQUIRE(c.seed && *c.seed == 42);
    REQUIRE(c.synth_kind && *c.synth_kind == "turning");
    REQUIRE(c.synth_noise && *c.synth_noise == 0.25);
    REQUIRE(c.stride && *c.stride == 2);
    REQUIRE(c.split && *c.split == "val");
    REQUIRE(c.warmup && *c.warmup == 6);
    REQUIRE(c.reps && *c.reps == 40);
    REQUIRE(c.cache && *c.cache == "a.bin");
    REQUIRE(c.out && *c.out == "report.txt");
    REQUIRE(!c.embed_dim && !c.checkpoint && !c.epsilon);

    // later entry wins
    const auto last = config::parse_run_config({{"epochs", "10"}, {"epochs", "20"}}, "test");
    REQUIRE(last.epochs && *last.epochs == 20);
    test_ok("parse run config");
}

void check_parse_errors() {
    const auto parse_one = [](const std::string& k, const std::string& v) {
        return [k, v] { config::parse_run_config({{k, v}}, "test"); };
    };
    REQUIRE_THROWS_AS(config::parse_run_config({{"epoch", "10"}}, "test"), config_error);
    REQUIRE(message_contains(parse_one("epoch", "10"), "unknown key \"epoch\""));
    REQUIRE(message_contains(parse_one("epochs", "ten"), "epochs"));
    REQUIRE(message_contains(parse_one("native_fps", ""), "native_fps"));
    REQUIRE(message_contains(parse_one("native_fps", "inf"), "native_fps"));
    REQUIRE(message_contains(parse_one("seed", "-1"), "seed"));
    REQUIRE(message_contains(parse_one("conv_channels", "16,32"), "conv_channels"));
    REQUIRE(message_contains(parse_one("conv_channels", "16,32,32,64"), "conv_channels"));
    REQUIRE(message_contains(parse_one("preset", "sedan"), "sedan"));
    REQUIRE(message_contains(parse_one("synth_kind", "spiral"), "spiral"));
    REQUIRE(message_contains(parse_one("split", "half"), "split"));
    REQUIRE(message_contains(parse_one("domain", "aerial"), "domain"));
    REQUIRE(message_contains(parse_one("units", "feet"), "units"));

    // the origin string lands in the message
    REQUIRE(message_contains([] { config::parse_run_config({{"t_in", "x"}}, "run.cfg"); },
                             "run.cfg"));
    test_ok("parse errors name the field");
}

void check_file_and_merge() {
    const auto path = write_temp("run.cfg",
                                 "# training run\n"
                                 "preset = vehicle\n"
                                 "epochs = 25\n"
                                 "seed = 7\n"
                                 "cache = from_file.bin\n");
    auto base = config::load_run_config(path);
    REQUIRE(base.preset && *base.preset == "vehicle");
    REQUIRE(base.epochs && *base.epochs == 25);
    REQUIRE(base.seed && *base.seed == 7);
    REQUIRE(base.cache && *base.cache == "from_file.bin");

    RunConfig cli;
    cli.epochs = 100;
    cli.checkpoint = "m.ckpt";
    config::merge_overrides(base, cli);
    REQUIRE(*base.epochs == 100);          // flag beats file
    REQUIRE(*base.seed == 7);              // untouched fields survive
    REQUIRE(*base.cache == "from_file.bin");
    REQUIRE(base.checkpoint && *base.checkpoint == "m.ckpt");

    REQUIRE_THROWS_AS(config::load_run_config("/tmp/trajkit_no_such_config.cfg"), io_error);
    const auto bad = write_temp("bad.cfg", "epochs 10\n");
    REQUIRE_THROWS_AS(config::load_run_config(bad), config_error);
    test_ok("config file and overrides");
}

void check_dataset_spec() {
    const auto def = config::dataset_spec(RunConfig{});
    const auto vehicle = data::dataset_preset("vehicle");
    REQUIRE(def.name == vehicle.name);
    REQUIRE(def.domain == vehicle.domain);
    REQUIRE(def.units == vehicle.units);
    REQUIRE(def.native_fps == vehicle.native_fps);
    REQUIRE(def.target_fps == vehicle.target_fps);
    REQUIRE(def.t_in == vehicle.t_in && def.t_out == vehicle.t_out);

    RunConfig c;
    c.preset = "pedestrian_highangle";
    c.t_in = 10;
    c.units = "meters";
    const auto spec = config::dataset_spec(c);
    REQUIRE(spec.domain == data::Domain::pedestrian_highangle);
    REQUIRE(spec.t_in == 10);
    REQUIRE(spec.t_out == 12);
    REQUIRE(spec.units == data::Units::meters);
    REQUIRE(spec.native_fps == 30.0);
    test_ok("dataset spec materialization");
}

void check_model_config() {
    const auto def = config::model_config(RunConfig{}, 15, 25);
    const auto ref = model::default_model_config(15, 25);
    REQUIRE(def.t_in == ref.t_in && def.t_out == ref.t_out);
    REQUIRE(def.features_per_step == ref.features_per_step);
    REQUIRE(def.embed_dim == ref.embed_dim);
    REQUIRE(def.mlp_hidden == ref.mlp_hidden);
    REQUIRE(def.conv_channels == ref.conv_channels);
    REQUIRE(def.cbam_reduction == ref.cbam_reduction);
    REQUIRE(def.spatial_kernel == ref.spatial_kernel);

    // widths follow an overridden feature count unless pinned themselves
    RunConfig c;
    c.features_per_step = 2;
    c.cbam_reduction = 2;
    c.conv_channels = std::array<int, 3>{4, 4, 4};
    auto m = config::model_config(c, 4, 3);
    REQUIRE(m.embed_dim == 8);
    REQUIRE(m.mlp_hidden == 16);
    c.embed_dim = 32;
    m = config::model_config(c, 4, 3);
    REQUIRE(m.embed_dim == 32);

    RunConfig bad;
    bad.spatial_kernel = 5;
    REQUIRE_THROWS_AS(config::model_config(bad, 15, 25), config_error);
    test_ok("model config materialization");
}

void check_train_config() {
    const auto v = config::train_config(RunConfig{}, data::Domain::vehicle_birdseye);
    REQUIRE(v.epochs == training::vehicle_train_config().epochs);
    const auto p = config::train_config(RunConfig{}, data::Domain::pedestrian_birdseye);
    REQUIRE(p.epochs == training::pedestrian_train_config().epochs);
    const auto h = config::train_config(RunConfig{}, data::Domain::pedestrian_highangle);
    REQUIRE(h.epochs == p.epochs);

    RunConfig c;
    c.epochs = 3;
    c.gradient_clip = 1.0;
    c.seed = 9;
    const auto t = config::train_config(c, data::Domain::vehicle_birdseye);
    REQUIRE(t.epochs == 3);
    REQUIRE(t.gradient_clip == 1.0);
    REQUIRE(t.seed == 9);
    REQUIRE(t.learning_rate == 0.01);

    RunConfig bad;
    bad.learning_rate = -1.0;
    REQUIRE_THROWS_AS(config::train_config(bad, data::Domain::vehicle_birdseye), config_error);
    test_ok("train config materialization");
}

void check_split_ratios() {
    const auto def = config::split_ratios(RunConfig{});
    REQUIRE(def.train == 0.7 && def.val == 0.1 && def.test == 0.2);
    RunConfig c;
    c.train_frac = 0.5;
    c.val_frac = 0.25;
    c.test_frac = 0.25;
    const auto r = config::split_ratios(c);
    REQUIRE(r.train == 0.5 && r.val == 0.25 && r.test == 0.25);
    test_ok("split ratios");
}

}  // namespace

int main() {
    check_parse();
    check_parse_errors();
    check_file_and_merge();
    check_dataset_spec();
    check_model_config();
    check_train_config();
    check_split_ratios();
    std::cout << "config: all checks passed\n";
    return 0;
}
