#include "trajkit/model.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace trajkit::model {

namespace nn = trajkit::nn;
using nn::TensorPtr;

namespace {

TensorPtr mlp_apply(nn::Tape* tape, const TensorPtr& x, const MlpParams& mlp) {
    auto h = nn::relu(tape, nn::affine(tape, x, mlp.l1.w, mlp.l1.b));
    return nn::affine(tape, h, mlp.l2.w, mlp.l2.b);
}

void glorot_fill(std::vector<double>& data, int fan_in, int fan_out, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& v : data) v = dist(rng);
}

AffineParams make_affine(int in, int out, std::mt19937_64& rng) {
    std::vector<double> w(static_cast<std::size_t>(in) * out);
    glorot_fill(w, in, out, rng);
    AffineParams p;
    p.w = nn::make_tensor({in, out}, std::move(w), true);
    p.b = nn::zeros({out}, true);
    return p;
}

MlpParams make_mlp(int in, int hidden, int out, std::mt19937_64& rng) {
    MlpParams m;
    m.l1 = make_affine(in, hidden, rng);
    m.l2 = make_affine(hidden, out, rng);
    return m;
}

ConvParams make_conv(int co, int ci, int kh, int kw, std::mt19937_64& rng) {
    std::vector<double> k(static_cast<std::size_t>(co) * ci * kh * kw);
    glorot_fill(k, ci * kh * kw, co * kh * kw, rng);
    ConvParams p;
    p.k = nn::make_tensor({co, ci, kh, kw}, std::move(k), true);
    p.b = nn::zeros({co}, true);
    return p;
}

CbamParams make_cbam(int channels, const ModelConfig& cfg, std::mt19937_64& rng) {
    CbamParams c;
    c.channel_mlp = make_mlp(channels, channels / cfg.cbam_reduction, channels, rng);
    c.spatial_conv = make_conv(1, 2, cfg.spatial_kernel, cfg.spatial_kernel, rng);
    return c;
}

void collect_mlp(std::vector<std::pair<std::string, TensorPtr>>& out, const std::string& prefix,
                 const MlpParams& mlp) {
    out.emplace_back(prefix + ".w1", mlp.l1.w);
    out.emplace_back(prefix + ".b1", mlp.l1.b);
    out.emplace_back(prefix + ".w2", mlp.l2.w);
    out.emplace_back(prefix + ".b2", mlp.l2.b);
}

void collect_cbam(std::vector<std::pair<std::string, TensorPtr>>& out, const std::string& prefix,
                  const CbamParams& cbam) {
    collect_mlp(out, prefix + ".mlp", cbam.channel_mlp);
    out.emplace_back(prefix + ".spatial.k", cbam.spatial_conv.k);
    out.emplace_back(prefix + ".spatial.b", cbam.spatial_conv.b);
}

}  // namespace

ModelConfig default_model_config(int t_in, int t_out) {
    ModelConfig c;
    c.t_in = t_in;
    c.t_out = t_out;
    c.embed_dim = c.features_per_step * t_in;
    c.mlp_hidden = 2 * c.features_per_step * t_in;
    validate(c);
    return c;
}

void validate(const ModelConfig& c) {
    if (c.t_in < 2) throw config_error("model config: t_in must be >= 2, got " + std::to_string(c.t_in));
    if (c.t_out < 1) throw config_error("model config: t_out must be >= 1, got " + std::to_string(c.t_out));
    if (c.features_per_step < 1)
        throw config_error("model config: features_per_step must be >= 1, got " +
                           std::to_string(c.features_per_step));
    if (c.embed_dim < 1 || c.mlp_hidden < 1)
        throw config_error("model config: widths must be >= 1, got embed_dim=" +
                           std::to_string(c.embed_dim) + " mlp_hidden=" + std::to_string(c.mlp_hidden));
    for (int ch : c.conv_channels) {
        if (ch < 1) throw config_error("model config: conv channel counts must be >= 1");
        if (c.cbam_reduction < 1 || ch % c.cbam_reduction != 0)
            throw config_error("model config: conv channels " + std::to_string(ch) +
                               " not divisible by cbam_reduction " + std::to_string(c.cbam_reduction));
    }
    if (c.spatial_kernel != 7)
        throw config_error("model config: spatial_kernel is fixed at 7, got " +
                           std::to_string(c.spatial_kernel));
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
    validate(config);
    std::mt19937_64 rng(seed);
    const int f_total = config.features_per_step * config.t_in;
    ModelParams p;
    p.config = config;
    p.embed = make_affine(4 * config.t_in, config.embed_dim, rng);
    p.gin.mlp0 = make_mlp(config.embed_dim, config.mlp_hidden, f_total, rng);
    p.gin.mlp1 = make_mlp(config.embed_dim, config.mlp_hidden, f_total, rng);
    p.gin.theta = nn::zeros({1}, true);
    const auto [c1, c2, c3] = config.conv_channels;
    p.conv1 = make_conv(c1, 1, 2, 2, rng);
    p.cbam1 = make_cbam(c1, config, rng);
    p.conv2 = make_conv(c2, c1, 2, 1, rng);
    p.cbam2 = make_cbam(c2, config, rng);
    p.conv3 = make_conv(c3, c2, 2, 1, rng);
    p.cbam3 = make_cbam(c3, config, rng);
    p.head = make_affine(c3 * config.t_in, 2 * config.t_out, rng);
    return p;
}

std::vector<std::pair<std::string, TensorPtr>> ModelParams::named_tensors() const {
    std::vector<std::pair<std::string, TensorPtr>> out;
    out.reserve(37);
    out.emplace_back("embed.w", embed.w);
    out.emplace_back("embed.b", embed.b);
    collect_mlp(out, "gin.mlp0", gin.mlp0);
    collect_mlp(out, "gin.mlp1", gin.mlp1);
    out.emplace_back("gin.theta", gin.theta);
    out.emplace_back("conv1.k", conv1.k);
    out.emplace_back("conv1.b", conv1.b);
    collect_cbam(out, "cbam1", cbam1);
    out.emplace_back("conv2.k", conv2.k);
    out.emplace_back("conv2.b", conv2.b);
    collect_cbam(out, "cbam2", cbam2);
    out.emplace_back("conv3.k", conv3.k);
    out.emplace_back("conv3.b", conv3.b);
    collect_cbam(out, "cbam3", cbam3);
    out.emplace_back("head.w", head.w);
    out.emplace_back("head.b", head.b);
    return out;
}

std::int64_t parameter_count(const ModelParams& params) {
    std::int64_t n = 0;
    for (const auto& [name, t] : params.named_tensors()) n += t->size();
    return n;
}

nn::TensorPtr embed_inputs(nn::Tape* tape, const data::FrameSample& frame,
                           const ModelParams& params) {
    if (frame.windows.empty()) throw contract_error("embed_inputs: empty frame");
    const int t_in = params.config.t_in;
    const int n = static_cast<int>(frame.windows.size());
    std::vector<double> rows;
    rows.reserve(static_cast<std::size_t>(n) * 4 * t_in);
    for (const auto& w : frame.windows) {
        if (static_cast<int>(w.observed.size()) != t_in ||
            static_cast<int>(w.relative.size()) != t_in)
            throw contract_error("embed_inputs: window has " + std::to_string(w.observed.size()) +
                                 " observed steps, expected " + std::to_string(t_in));
        for (Vec2 p : w.observed) {
            rows.push_back(p.x);
            rows.push_back(p.y);
        }
        for (Vec2 p : w.relative) {
            rows.push_back(p.x);
            rows.push_back(p.y);
        }
    }
    auto x = nn::make_tensor({n, 4 * t_in}, std::move(rows));
    return nn::relu(tape, nn::affine(tape, x, params.embed.w, params.embed.b));
}

nn::TensorPtr gin_aggregate(nn::Tape* tape, const nn::TensorPtr& features,
                            const GinParams& gin) {
    if (features->shape.size() != 2 || features->shape[0] < 1)
        throw contract_error("gin_aggregate: empty frame or non-matrix features " +
                             shape_string(features->shape));
    auto self = mlp_apply(tape, nn::scale1p(tape, features, gin.theta), gin.mlp0);
    auto neighbors = mlp_apply(tape, nn::neighbor_sum(tape, features), gin.mlp1);
    return nn::add(tape, self, neighbors);
}

nn::TensorPtr channel_attention(nn::Tape* tape, const nn::TensorPtr& map,
                                const CbamParams& cbam) {
    if (map->shape.size() != 3)
        throw contract_error("channel_attention: expected CxHxW map, got " +
                             shape_string(map->shape));
    const int c = map->shape[0];
    if (cbam.channel_mlp.l1.w->shape[0] != c)
        throw contract_error("channel_attention: map has " + std::to_string(c) +
                             " channels, attention expects " +
                             std::to_string(cbam.channel_mlp.l1.w->shape[0]));
    auto avg = nn::reshape(tape, nn::pool_spatial(tape, map, nn::PoolMode::avg), {1, c});
    auto mx = nn::reshape(tape, nn::pool_spatial(tape, map, nn::PoolMode::max), {1, c});
    auto pre = nn::add(tape, mlp_apply(tape, avg, cbam.channel_mlp),
                       mlp_apply(tape, mx, cbam.channel_mlp));
    return nn::reshape(tape, nn::sigmoid(tape, pre), {c});
}

nn::TensorPtr spatial_attention(nn::Tape* tape, const nn::TensorPtr& map,
                                const CbamParams& cbam) {
    auto avg = nn::pool_channel(tape, map, nn::PoolMode::avg);
    auto mx = nn::pool_channel(tape, map, nn::PoolMode::max);
    auto stacked = nn::concat_channels(tape, avg, mx);
    const int pad = (cbam.spatial_conv.k->shape[2] - 1) / 2;
    auto conv = nn::conv2d(tape, stacked, cbam.spatial_conv.k,
                           nn::Pad{pad, pad, pad, pad}, cbam.spatial_conv.b);
    return nn::sigmoid(tape, conv);
}

nn::TensorPtr apply_cbam(nn::Tape* tape, const nn::TensorPtr& map, const CbamParams& cbam) {
    auto gated = nn::mul_channel_gate(tape, map, channel_attention(tape, map, cbam));
    return nn::mul_spatial_gate(tape, gated, spatial_attention(tape, gated, cbam));
}

std::vector<nn::TensorPtr> subject_maps(nn::Tape* tape, const nn::TensorPtr& gin_out,
                                        const data::FrameSample& frame,
                                        const ModelConfig& config) {
    const int t_in = config.t_in, f = config.features_per_step;
    if (gin_out->shape != std::vector<int>{static_cast<int>(frame.windows.size()), f * t_in})
        throw contract_error("subject_maps: aggregated features " + shape_string(gin_out->shape) +
                             " do not match " + std::to_string(frame.windows.size()) +
                             " windows at " + std::to_string(f * t_in) + " values each");
    std::vector<nn::TensorPtr> maps;
    maps.reserve(frame.windows.size());
    for (int i = 0; i < static_cast<int>(frame.windows.size()); ++i) {
        auto feat = nn::reshape(tape, nn::take_row(tape, gin_out, i), {1, t_in, f});
        std::vector<double> rel;
        rel.reserve(2 * t_in);
        for (Vec2 p : frame.windows[i].relative) {
            rel.push_back(p.x);
            rel.push_back(p.y);
        }
        auto rel_map = nn::make_tensor({1, t_in, 2}, std::move(rel));
        maps.push_back(nn::concat_width(tape, feat, rel_map));
    }
    return maps;
}

nn::TensorPtr attentive_cnn(nn::Tape* tape, const std::vector<nn::TensorPtr>& maps,
                            const ModelParams& params) {
    if (maps.empty()) throw contract_error("attentive_cnn: empty frame");
    std::vector<nn::TensorPtr> rows;
    rows.reserve(maps.size());
    for (const auto& m : maps) {
        auto x1 = nn::relu(tape, nn::conv2d(tape, m, params.conv1.k, nn::Pad{1, 1}, params.conv1.b));
        auto a1 = apply_cbam(tape, x1, params.cbam1);
        auto x2 = nn::relu(tape, nn::conv2d(tape, a1, params.conv2.k, nn::Pad{1, 0}, params.conv2.b));
        auto a2 = apply_cbam(tape, x2, params.cbam2);
        auto x3 = nn::relu(tape, nn::conv2d(tape, a2, params.conv3.k, nn::Pad{1, 0}, params.conv3.b));
        auto a3 = apply_cbam(tape, x3, params.cbam3);
        rows.push_back(nn::mean_over_width(tape, a3));
    }
    return nn::stack_rows(tape, rows);
}

nn::TensorPtr forward(nn::Tape* tape, const data::FrameSample& frame,
                      const ModelParams& params) {
    if (frame.windows.empty()) throw contract_error("forward: empty frame");
    auto emb = embed_inputs(tape, frame, params);
    auto agg = gin_aggregate(tape, emb, params.gin);
    auto maps = subject_maps(tape, agg, frame, params.config);
    auto feats = attentive_cnn(tape, maps, params);
    auto offsets = nn::affine(tape, feats, params.head.w, params.head.b);

    // decode: add the last observed position to every step's offset
    const int n = static_cast<int>(frame.windows.size());
    const int t_out = params.config.t_out;
    std::vector<double> base;
    base.reserve(static_cast<std::size_t>(n) * 2 * t_out);
    for (const auto& w : frame.windows) {
        const Vec2 last = w.observed.back();
        for (int t = 0; t < t_out; ++t) {
            base.push_back(last.x);
            base.push_back(last.y);
        }
    }
    return nn::add(tape, offsets, nn::make_tensor({n, 2 * t_out}, std::move(base)));
}

std::vector<std::vector<Vec2>> predict(const data::FrameSample& frame,
                                       const ModelParams& params) {
    auto out = forward(nullptr, frame, params);
    const int t_out = params.config.t_out;
    std::vector<std::vector<Vec2>> result(frame.windows.size());
    for (int i = 0; i < static_cast<int>(result.size()); ++i) {
        result[i].resize(t_out);
        for (int t = 0; t < t_out; ++t)
            result[i][t] = {out->at(i, 2 * t), out->at(i, 2 * t + 1)};
    }
    return result;
}

void save_checkpoint(const std::string& path, const ModelParams& params) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write checkpoint: " + path);
    const auto& c = params.config;
    out << "trajkit-checkpoint 1\n";
    out << "t_in = " << c.t_in << "\n";
    out << "t_out = " << c.t_out << "\n";
    out << "features_per_step = " << c.features_per_step << "\n";
    out << "embed_dim = " << c.embed_dim << "\n";
    out << "mlp_hidden = " << c.mlp_hidden << "\n";
    out << "conv_channels = " << c.conv_channels[0] << "," << c.conv_channels[1] << ","
        << c.conv_channels[2] << "\n";
    out << "cbam_reduction = " << c.cbam_reduction << "\n";
    out << "spatial_kernel = " << c.spatial_kernel << "\n";
    for (const auto& [name, t] : params.named_tensors()) {
        out << "tensor " << name;
        for (int d : t->shape) out << " " << d;
        out << "\n";
        for (std::size_t i = 0; i < t->data.size(); ++i) {
            if (i) out << " ";
            out << format_double(t->data[i]);
        }
        out << "\n";
    }
    out.flush();
    if (!out) throw io_error("failed writing checkpoint: " + path);
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "trajkit-checkpoint 1")
        throw io_error(path + ": not a version-1 checkpoint (bad header)");

    ModelConfig cfg;
    std::map<std::string, std::string> kv;
    std::streampos tensors_begin = in.tellg();
    while (std::getline(in, line)) {
        if (line.rfind("tensor ", 0) == 0) break;
        tensors_begin = in.tellg();
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto need = [&](const char* key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw io_error(path + ": checkpoint missing field " + key);
        return it->second;
    };
    cfg.t_in = std::atoi(need("t_in").c_str());
    cfg.t_out = std::atoi(need("t_out").c_str());
    cfg.features_per_step = std::atoi(need("features_per_step").c_str());
    cfg.embed_dim = std::atoi(need("embed_dim").c_str());
    cfg.mlp_hidden = std::atoi(need("mlp_hidden").c_str());
    cfg.cbam_reduction = std::atoi(need("cbam_reduction").c_str());
    cfg.spatial_kernel = std::atoi(need("spatial_kernel").c_str());
    {
        std::istringstream ch(need("conv_channels"));
        std::string part;
        for (int i = 0; i < 3; ++i) {
            if (!std::getline(ch, part, ','))
                throw io_error(path + ": conv_channels needs 3 comma-separated values");
            cfg.conv_channels[i] = std::atoi(trim(part).c_str());
        }
    }
    validate(cfg);

    ModelParams params = init_params(cfg, 0);
    std::map<std::string, TensorPtr> by_name;
    for (auto& [name, t] : params.named_tensors()) by_name[name] = t;
    std::map<std::string, bool> filled;

    in.clear();
    in.seekg(tensors_begin);
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line.rfind("tensor ", 0) != 0)
            throw io_error(path + ": expected a tensor header, got \"" + line.substr(0, 40) + "\"");
        std::istringstream hdr(line.substr(7));
        std::string name;
        hdr >> name;
        std::vector<int> shape;
        int d;
        while (hdr >> d) shape.push_back(d);
        auto it = by_name.find(name);
        if (it == by_name.end()) throw io_error(path + ": unknown tensor \"" + name + "\"");
        if (it->second->shape != shape)
            throw io_error(path + ": tensor " + name + " has shape " + shape_string(shape) +
                           ", config requires " + shape_string(it->second->shape));
        if (filled[name]) throw io_error(path + ": tensor " + name + " appears twice");
        if (!std::getline(in, line)) throw io_error(path + ": missing values for tensor " + name);
        const char* p = line.c_str();
        for (auto& v : it->second->data) {
            char* end = nullptr;
            v = std::strtod(p, &end);
            if (end == p)
                throw io_error(path + ": tensor " + name + " has too few values");
            p = end;
        }
        while (*p == ' ') ++p;
        if (*p != '\0') throw io_error(path + ": tensor " + name + " has too many values");
        filled[name] = true;
    }
    for (const auto& [name, t] : by_name) {
        if (!filled[name]) throw io_error(path + ": checkpoint missing tensor " + name);
    }
    return params;
}

}  // namespace trajkit::model
