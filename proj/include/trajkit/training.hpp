#pragma once

// MSE loss, Adam, the per-frame training loop, and the evaluation driver.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trajkit/metrics.hpp"
#include "trajkit/model.hpp"

namespace trajkit::training {

struct TrainConfig {
    int epochs = 40;
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    double gradient_clip = 0.0;  // global max-norm; 0 disables
    int eval_every = 1;          // epochs between validation passes
};

TrainConfig vehicle_train_config();     // 40 epochs, lr 0.01
TrainConfig pedestrian_train_config();  // 80 epochs, lr 0.01
void validate(const TrainConfig& config);

// First/second moments per named tensor, in named_tensors() order.
struct AdamState {
    std::vector<std::vector<double>> m, v;
    std::int64_t t = 0;
};

AdamState make_adam_state(const model::ModelParams& params);

// Mean squared error over all coordinates of pred vs truth.
nn::TensorPtr mse_loss(nn::Tape* tape, const nn::TensorPtr& pred, const nn::TensorPtr& truth);

// The frame's future positions as an n x (2*t_out) target, row-major (x,y).
nn::TensorPtr future_tensor(const data::FrameSample& frame, const model::ModelConfig& config);

// One Adam update from the gradients currently stored on the parameters.
// Clips by global norm first when configured.
void adam_step(model::ModelParams& params, AdamState& state, const TrainConfig& config);

struct EpochStats {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    std::optional<double> val_loss;
};

struct TrainResult {
    model::ModelParams params;
    std::vector<EpochStats> history;
};

// One optimization step per frame graph, frames shuffled per epoch from the
// config seed; fully deterministic for fixed inputs.
TrainResult train(const std::vector<data::FrameSample>& train_frames,
                  const std::vector<data::FrameSample>& val_frames,
                  const model::ModelConfig& model_config, const TrainConfig& config);

// CSV `epoch,train_loss,val_loss`, empty val cell on epochs without one.
std::string training_log_csv(const std::vector<EpochStats>& history);

// Forward over every frame, denormalized back to dataset units, pooled into
// one report. RMSE horizons are included only when target_fps divides t_out
// into whole seconds.
metrics::MetricReport evaluate(const std::vector<data::FrameSample>& frames,
                               const model::ModelParams& params, const data::DatasetSpec& spec);

}  // namespace trajkit::training
