#pragma once

// Dense float64 tensors with a dynamic reverse-mode tape. The tape is
// rebuilt on every forward pass (frame graphs vary in size) and is confined
// to one thread together with its tensors; gradient-free tensors are plain
// immutable values.

#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "trajkit/common.hpp"
#include "trajkit/kernels.hpp"

namespace trajkit::nn {

struct Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;   // row-major
    std::vector<double> grad;   // empty until a backward pass touches it
    bool tracked = false;

    Tensor(std::vector<int> shape_, std::vector<double> data_, bool tracked_);

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }

    double& at(int i, int j) { return data[static_cast<size_t>(i) * shape[1] + j]; }
    double at(int i, int j) const { return data[static_cast<size_t>(i) * shape[1] + j]; }
    double& at(int c, int h, int w) {
        return data[(static_cast<size_t>(c) * shape[1] + h) * shape[2] + w];
    }
    double at(int c, int h, int w) const {
        return data[(static_cast<size_t>(c) * shape[1] + h) * shape[2] + w];
    }

    void ensure_grad();  // allocate + zero if absent
    void zero_grad();
};

TensorPtr make_tensor(std::vector<int> shape, std::vector<double> data, bool tracked = false);
TensorPtr zeros(std::vector<int> shape, bool tracked = false);
TensorPtr full(std::vector<int> shape, double value, bool tracked = false);
TensorPtr scalar(double value, bool tracked = false);

enum class Act { relu, sigmoid };
enum class PoolMode { avg, max };

using kernels::Pad;

class Tape {
public:
    struct Node {
        std::vector<TensorPtr> inputs;
        TensorPtr output;
        std::function<void()> backward;
    };

    void record(Node node);

    // Seeds d(loss)/d(loss) = 1 and replays backward rules newest-first.
    // Tracked leaves accumulate their gradients in Tensor::grad.
    void backward(const TensorPtr& loss);

    bool produced(const Tensor* t) const { return outputs_.count(t) > 0; }
    std::size_t node_count() const { return nodes_.size(); }

private:
    std::vector<Node> nodes_;
    std::unordered_set<const Tensor*> outputs_;
};

// Every op takes an optional tape; pass nullptr for inference. Outputs are
// tracked (and recorded) iff some input is tracked and a tape is present.

TensorPtr matmul(Tape* tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr conv2d(Tape* tape, const TensorPtr& input, const TensorPtr& kernel,
                 Pad pad, const TensorPtr& bias);
TensorPtr pool_spatial(Tape* tape, const TensorPtr& x, PoolMode mode);  // CxHxW -> C
TensorPtr pool_channel(Tape* tape, const TensorPtr& x, PoolMode mode);  // CxHxW -> 1xHxW
TensorPtr activation(Tape* tape, const TensorPtr& x, Act kind);
TensorPtr relu(Tape* tape, const TensorPtr& x);
TensorPtr sigmoid(Tape* tape, const TensorPtr& x);

TensorPtr add(Tape* tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr sub(Tape* tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(Tape* tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr scale(Tape* tape, const TensorPtr& x, double c);
TensorPtr sum(Tape* tape, const TensorPtr& x);  // -> shape [1]

// y = x*W + b with b broadcast across rows.
TensorPtr affine(Tape* tape, const TensorPtr& x, const TensorPtr& w, const TensorPtr& b);
TensorPtr add_row_broadcast(Tape* tape, const TensorPtr& x, const TensorPtr& bias);

// (1 + theta) * x with a scalar theta tensor.
TensorPtr scale1p(Tape* tape, const TensorPtr& x, const TensorPtr& theta);

// Per-row sum of all *other* rows: out[i] = colsum(x) - x[i]. The column
// totals accumulate in value-sorted order, making the result independent of
// row order bit-for-bit.
TensorPtr neighbor_sum(Tape* tape, const TensorPtr& x);

TensorPtr mul_channel_gate(Tape* tape, const TensorPtr& x, const TensorPtr& gate);  // gate: C
TensorPtr mul_spatial_gate(Tape* tape, const TensorPtr& x, const TensorPtr& gate);  // gate: 1xHxW
TensorPtr concat_channels(Tape* tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr concat_width(Tape* tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr take_row(Tape* tape, const TensorPtr& x, int row);              // nxD -> 1xD
TensorPtr stack_rows(Tape* tape, const std::vector<TensorPtr>& rows);     // k of 1xD -> kxD
TensorPtr reshape(Tape* tape, const TensorPtr& x, std::vector<int> shape);
TensorPtr mean_over_width(Tape* tape, const TensorPtr& x);  // CxHxW -> 1x(C*H)

}  // namespace trajkit::nn
