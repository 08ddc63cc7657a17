#pragma once

// The predictor: per-subject input embedding, one aggregation step over the
// fully connected frame graph, and a three-stage attentive CNN whose head
// emits per-step offsets from the last observed position.

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "trajkit/data.hpp"
#include "trajkit/tensor.hpp"

namespace trajkit::model {

struct ModelConfig {
    int t_in = 15;
    int t_out = 25;
    int features_per_step = 8;  // F; aggregation output is F*t_in per subject
    int embed_dim = 120;
    int mlp_hidden = 240;
    std::array<int, 3> conv_channels{16, 32, 32};
    int cbam_reduction = 8;
    int spatial_kernel = 7;
};

// Fills the width fields from (t_in, t_out): embed_dim = F*t_in,
// mlp_hidden = 2*F*t_in.
ModelConfig default_model_config(int t_in, int t_out);
void validate(const ModelConfig& config);

struct AffineParams {
    nn::TensorPtr w;  // [in x out]
    nn::TensorPtr b;  // [out]
};

struct MlpParams {
    AffineParams l1, l2;  // affine -> relu -> affine
};

struct ConvParams {
    nn::TensorPtr k;  // [co x ci x kh x kw]
    nn::TensorPtr b;  // [co]
};

struct GinParams {
    MlpParams mlp0, mlp1;
    nn::TensorPtr theta;  // scalar
};

struct CbamParams {
    MlpParams channel_mlp;  // C -> C/r -> C, shared by avg and max branches
    ConvParams spatial_conv;  // 1 out, 2 in, 7x7
};

struct ModelParams {
    ModelConfig config;
    AffineParams embed;  // 4*t_in -> embed_dim
    GinParams gin;
    ConvParams conv1, conv2, conv3;
    CbamParams cbam1, cbam2, cbam3;
    AffineParams head;  // C3*t_in -> 2*t_out

    // Fixed enumeration order; init, Adam state, and checkpoints all key off it.
    std::vector<std::pair<std::string, nn::TensorPtr>> named_tensors() const;
};

// Glorot-uniform weights, zero biases, theta 0; deterministic per seed.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

std::int64_t parameter_count(const ModelParams& params);

// One row per subject: absolute observed positions then relative
// displacements, flattened to 4*t_in values, through affine + relu.
nn::TensorPtr embed_inputs(nn::Tape* tape, const data::FrameSample& frame,
                           const ModelParams& params);

// f_i' = MLP0((1+theta) f_i) + MLP1(sum of all other rows).
nn::TensorPtr gin_aggregate(nn::Tape* tape, const nn::TensorPtr& features,
                            const GinParams& gin);

nn::TensorPtr channel_attention(nn::Tape* tape, const nn::TensorPtr& map,
                                const CbamParams& cbam);  // gate [C]
nn::TensorPtr spatial_attention(nn::Tape* tape, const nn::TensorPtr& map,
                                const CbamParams& cbam);  // gate [1xHxW]
// Channel gate first, then the spatial gate of the channel-gated map.
nn::TensorPtr apply_cbam(nn::Tape* tape, const nn::TensorPtr& map, const CbamParams& cbam);

// Per-subject 1 x t_in x (F+2) maps: aggregated features reshaped to
// (t_in, F) with the relative displacements appended as two extra columns.
std::vector<nn::TensorPtr> subject_maps(nn::Tape* tape, const nn::TensorPtr& gin_out,
                                        const data::FrameSample& frame,
                                        const ModelConfig& config);

// conv -> relu -> attention, three times, then mean over the feature axis.
nn::TensorPtr attentive_cnn(nn::Tape* tape, const std::vector<nn::TensorPtr>& maps,
                            const ModelParams& params);

// n x (2*t_out) normalized absolute predictions, row-major (x,y) per step.
nn::TensorPtr forward(nn::Tape* tape, const data::FrameSample& frame,
                      const ModelParams& params);

// Inference convenience: per subject, t_out normalized absolute positions.
std::vector<std::vector<Vec2>> predict(const data::FrameSample& frame,
                                       const ModelParams& params);

// Versioned text container: config fields, then each named tensor with its
// shape and round-trip-exact values. Loading rejects any shape mismatch.
void save_checkpoint(const std::string& path, const ModelParams& params);
ModelParams load_checkpoint(const std::string& path);

}  // namespace trajkit::model
