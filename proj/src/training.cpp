#include "trajkit/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace trajkit::training {

TrainConfig vehicle_train_config() {
    TrainConfig c;
    c.epochs = 40;
    return c;
}

TrainConfig pedestrian_train_config() {
    TrainConfig c;
    c.epochs = 80;
    return c;
}

void validate(const TrainConfig& c) {
    if (c.epochs < 0) throw config_error("train config: epochs must be >= 0");
    if (!(c.learning_rate > 0.0))
        throw config_error("train config: learning_rate must be positive");
    if (!(c.beta1 >= 0.0 && c.beta1 < 1.0) || !(c.beta2 >= 0.0 && c.beta2 < 1.0))
        throw config_error("train config: betas must lie in [0,1)");
    if (!(c.epsilon > 0.0)) throw config_error("train config: epsilon must be positive");
    if (c.gradient_clip < 0.0)
        throw config_error("train config: gradient_clip must be >= 0");
    if (c.eval_every < 1) throw config_error("train config: eval_every must be >= 1");
}

AdamState make_adam_state(const model::ModelParams& params) {
    AdamState state;
    for (auto& [name, t] : params.named_tensors()) {
        state.m.emplace_back(t->size(), 0.0);
        state.v.emplace_back(t->size(), 0.0);
    }
    return state;
}

nn::TensorPtr mse_loss(nn::Tape* tape, const nn::TensorPtr& pred, const nn::TensorPtr& truth) {
    auto d = nn::sub(tape, pred, truth);
    return nn::scale(tape, nn::sum(tape, nn::mul(tape, d, d)),
                     1.0 / static_cast<double>(pred->size()));
}

nn::TensorPtr future_tensor(const data::FrameSample& frame, const model::ModelConfig& config) {
    const int n = static_cast<int>(frame.windows.size());
    auto out = nn::zeros({n, 2 * config.t_out});
    for (int i = 0; i < n; ++i) {
        const auto& future = frame.windows[i].future;
        if (static_cast<int>(future.size()) != config.t_out)
            throw contract_error("future_tensor: window has " + std::to_string(future.size()) +
                                 " future steps, model expects " + std::to_string(config.t_out));
        for (int t = 0; t < config.t_out; ++t) {
            out->at(i, 2 * t) = future[t].x;
            out->at(i, 2 * t + 1) = future[t].y;
        }
    }
    return out;
}

void adam_step(model::ModelParams& params, AdamState& state, const TrainConfig& config) {
    auto named = params.named_tensors();
    if (named.size() != state.m.size())
        throw contract_error("adam_step: state holds " + std::to_string(state.m.size()) +
                             " tensors, params " + std::to_string(named.size()));
    for (auto& [name, t] : named) {
        t->ensure_grad();
        if (!all_finite(t->grad))
            throw contract_error("adam_step: non-finite gradient in " + name);
    }

    double clip_factor = 1.0;
    if (config.gradient_clip > 0.0) {
        double sq = 0.0;
        for (auto& [name, t] : named)
            for (double g : t->grad) sq += g * g;
        const double norm = std::sqrt(sq);
        if (norm > config.gradient_clip) clip_factor = config.gradient_clip / norm;
    }

    state.t += 1;
    const double mc = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
    const double vc = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < named.size(); ++i) {
        auto& tensor = *named[i].second;
        auto& m = state.m[i];
        auto& v = state.v[i];
        if (m.size() != static_cast<std::size_t>(tensor.size()))
            throw contract_error("adam_step: moment size mismatch for " + named[i].first);
        for (std::size_t k = 0; k < m.size(); ++k) {
            const double g = tensor.grad[k] * clip_factor;
            m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g;
            v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g * g;
            const double mhat = m[k] / mc;
            const double vhat = v[k] / vc;
            tensor.data[k] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
        }
    }
}

namespace {

double frame_loss(const data::FrameSample& frame, const model::ModelParams& params) {
    auto pred = model::forward(nullptr, frame, params);
    auto truth = future_tensor(frame, params.config);
    return mse_loss(nullptr, pred, truth)->data[0];
}

}  // namespace

TrainResult train(const std::vector<data::FrameSample>& train_frames,
                  const std::vector<data::FrameSample>& val_frames,
                  const model::ModelConfig& model_config, const TrainConfig& config) {
    model::validate(model_config);
    validate(config);
    if (train_frames.empty()) throw config_error("train: empty training set");

    TrainResult result{model::init_params(model_config, config.seed), {}};
    auto named = result.params.named_tensors();
    auto state = make_adam_state(result.params);

    std::vector<std::size_t> order(train_frames.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(config.seed);

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double total = 0.0;
        for (std::size_t idx : order) {
            const auto& frame = train_frames[idx];
            nn::Tape tape;
            auto pred = model::forward(&tape, frame, result.params);
            auto truth = future_tensor(frame, model_config);
            auto loss = mse_loss(&tape, pred, truth);
            for (auto& [name, t] : named) {
                t->ensure_grad();
                t->zero_grad();
            }
            tape.backward(loss);
            adam_step(result.params, state, config);
            total += loss->data[0];
        }
        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = total / static_cast<double>(train_frames.size());
        if (!val_frames.empty() && (epoch % config.eval_every == 0 || epoch == config.epochs)) {
            double val = 0.0;
            for (const auto& frame : val_frames) val += frame_loss(frame, result.params);
            stats.val_loss = val / static_cast<double>(val_frames.size());
        }
        result.history.push_back(stats);
    }
    return result;
}

std::string training_log_csv(const std::vector<EpochStats>& history) {
    std::ostringstream out;
    out << "epoch,train_loss,val_loss\n";
    for (const auto& e : history) {
        out << e.epoch << "," << format_double(e.train_loss) << ",";
        if (e.val_loss) out << format_double(*e.val_loss);
        out << "\n";
    }
    return out.str();
}

metrics::MetricReport evaluate(const std::vector<data::FrameSample>& frames,
                               const model::ModelParams& params, const data::DatasetSpec& spec) {
    if (spec.t_out != params.config.t_out || spec.t_in != params.config.t_in)
        throw contract_error("evaluate: dataset windows are " + std::to_string(spec.t_in) + "+" +
                             std::to_string(spec.t_out) + " steps, model expects " +
                             std::to_string(params.config.t_in) + "+" +
                             std::to_string(params.config.t_out));
    metrics::TrajectorySet truth, pred;
    for (const auto& frame : frames) {
        for (const auto& w : frame.windows)
            if (static_cast<int>(w.observed.size()) != spec.t_in ||
                static_cast<int>(w.future.size()) != spec.t_out)
                throw contract_error("evaluate: window has " + std::to_string(w.observed.size()) +
                                     "+" + std::to_string(w.future.size()) + " steps, expected " +
                                     std::to_string(spec.t_in) + "+" + std::to_string(spec.t_out));
        auto p = model::predict(frame, params);
        for (std::size_t i = 0; i < frame.windows.size(); ++i) {
            auto& truth_row = truth.emplace_back();
            auto& pred_row = pred.emplace_back();
            for (int t = 0; t < spec.t_out; ++t) {
                truth_row.push_back(data::denormalize(frame, frame.windows[i].future[t]));
                pred_row.push_back(data::denormalize(frame, p[i][t]));
            }
        }
    }
    metrics::MetricReport report;
    report.n_subjects = static_cast<std::int64_t>(truth.size());
    report.units = spec.units;
    if (!truth.empty()) {
        report.ade = metrics::ade(truth, pred);
        report.fde = metrics::fde(truth, pred);
        const auto fps = static_cast<std::int64_t>(std::llround(spec.target_fps));
        if (fps > 0 && std::fabs(spec.target_fps - static_cast<double>(fps)) <= 1e-9 &&
            spec.t_out % fps == 0)
            report.rmse_per_second = metrics::rmse_curve(truth, pred, spec.target_fps);
    }
    return report;
}

}  // namespace trajkit::training
