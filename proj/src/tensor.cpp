#include "trajkit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace trajkit::nn {

namespace {

std::int64_t shape_product(const std::vector<int>& shape) {
    std::int64_t p = 1;
    for (int d : shape) {
        if (d <= 0) throw contract_error("tensor shape has non-positive dimension " + shape_string(shape));
        p *= d;
    }
    return p;
}

bool want_grad(Tape* tape, std::initializer_list<const TensorPtr*> inputs) {
    if (!tape) return false;
    for (const TensorPtr* t : inputs) {
        if (*t && (*t)->tracked) return true;
    }
    return false;
}

void require_matrix(const TensorPtr& t, const char* what) {
    if (t->shape.size() != 2)
        throw contract_error(std::string(what) + ": expected a matrix, got " + shape_string(t->shape));
}

void require_map(const TensorPtr& t, const char* what) {
    if (t->shape.size() != 3)
        throw contract_error(std::string(what) + ": expected a CxHxW map, got " + shape_string(t->shape));
}

void require_same_shape(const TensorPtr& a, const TensorPtr& b, const char* what) {
    if (a->shape != b->shape)
        throw contract_error(std::string(what) + ": shape mismatch " + shape_string(a->shape) +
                             " vs " + shape_string(b->shape));
}

}  // namespace

Tensor::Tensor(std::vector<int> shape_, std::vector<double> data_, bool tracked_)
    : shape(std::move(shape_)), data(std::move(data_)), tracked(tracked_) {
    if (shape_product(shape) != static_cast<std::int64_t>(data.size()))
        throw contract_error("tensor data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_string(shape));
}

void Tensor::ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

void Tensor::zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
}

TensorPtr make_tensor(std::vector<int> shape, std::vector<double> data, bool tracked) {
    return std::make_shared<Tensor>(std::move(shape), std::move(data), tracked);
}

TensorPtr zeros(std::vector<int> shape, bool tracked) {
    const auto n = static_cast<size_t>(shape_product(shape));
    return make_tensor(std::move(shape), std::vector<double>(n, 0.0), tracked);
}

TensorPtr full(std::vector<int> shape, double value, bool tracked) {
    const auto n = static_cast<size_t>(shape_product(shape));
    return make_tensor(std::move(shape), std::vector<double>(n, value), tracked);
}

TensorPtr scalar(double value, bool tracked) {
    return make_tensor({1}, {value}, tracked);
}

void Tape::record(Node node) {
    outputs_.insert(node.output.get());
    nodes_.push_back(std::move(node));
}

void Tape::backward(const TensorPtr& loss) {
    if (loss->size() != 1)
        throw contract_error("backward: loss must be a scalar, got shape " + shape_string(loss->shape));
    if (!produced(loss.get()))
        throw contract_error("backward: loss was not produced on this tape");
    for (auto& node : nodes_) node.output->ensure_grad();
    loss->grad[0] += 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        for (auto& in : it->inputs) {
            if (in->tracked) in->ensure_grad();
        }
        it->backward();
    }
}

TensorPtr matmul(Tape* tape, const TensorPtr& a, const TensorPtr& b) {
    require_matrix(a, "matmul lhs");
    require_matrix(b, "matmul rhs");
    if (a->shape[1] != b->shape[0])
        throw contract_error("matmul: inner dimensions disagree, " + shape_string(a->shape) +
                             " vs " + shape_string(b->shape));
    const int m = a->shape[0], k = a->shape[1], n = b->shape[1];
    auto out = zeros({m, n});
    kernels::matmul_nn(a->data.data(), b->data.data(), out->data.data(), m, k, n);
    if (want_grad(tape, {&a, &b})) {
        out->tracked = true;
        tape->record({{a, b}, out, [a, b, out, m, k, n] {
                          if (a->tracked) {
                              std::vector<double> da(a->data.size());
                              kernels::matmul_nt(out->grad.data(), b->data.data(), da.data(), m, n, k);
                              for (size_t i = 0; i < da.size(); ++i) a->grad[i] += da[i];
                          }
                          if (b->tracked) {
                              std::vector<double> db(b->data.size());
                              kernels::matmul_tn(a->data.data(), out->grad.data(), db.data(), m, k, n);
                              for (size_t i = 0; i < db.size(); ++i) b->grad[i] += db[i];
                          }
                      }});
    }
    return out;
}

TensorPtr conv2d(Tape* tape, const TensorPtr& input, const TensorPtr& kernel,
                 Pad pad, const TensorPtr& bias) {
    require_map(input, "conv2d input");
    if (kernel->shape.size() != 4)
        throw contract_error("conv2d kernel: expected CoxCixKHxKW, got " + shape_string(kernel->shape));
    if (kernel->shape[1] != input->shape[0])
        throw contract_error("conv2d: kernel input channels " + shape_string(kernel->shape) +
                             " do not match input " + shape_string(input->shape));
    if (bias->shape != std::vector<int>{kernel->shape[0]})
        throw contract_error("conv2d: bias shape " + shape_string(bias->shape) +
                             " does not match output channels " + shape_string(kernel->shape));
    kernels::Conv2dShape s;
    s.c_in = input->shape[0];
    s.h = input->shape[1];
    s.w = input->shape[2];
    s.c_out = kernel->shape[0];
    s.kh = kernel->shape[2];
    s.kw = kernel->shape[3];
    s.pad = pad;
    if (s.kh > s.h + pad.top + pad.bottom || s.kw > s.w + pad.left + pad.right)
        throw contract_error("conv2d: kernel " + shape_string(kernel->shape) +
                             " larger than padded input " + shape_string(input->shape));
    auto out = zeros({s.c_out, s.out_h(), s.out_w()});
    kernels::conv2d_forward(input->data.data(), kernel->data.data(), bias->data.data(),
                            out->data.data(), s);
    if (want_grad(tape, {&input, &kernel, &bias})) {
        out->tracked = true;
        tape->record({{input, kernel, bias}, out, [input, kernel, bias, out, s] {
                          if (input->tracked) {
                              std::vector<double> din(input->data.size());
                              kernels::conv2d_dinput(out->grad.data(), kernel->data.data(), din.data(), s);
                              for (size_t i = 0; i < din.size(); ++i) input->grad[i] += din[i];
                          }
                          if (kernel->tracked) {
                              std::vector<double> dk(kernel->data.size());
                              kernels::conv2d_dkernel(out->grad.data(), input->data.data(), dk.data(), s);
                              for (size_t i = 0; i < dk.size(); ++i) kernel->grad[i] += dk[i];
                          }
                          if (bias->tracked) {
                              std::vector<double> db(bias->data.size());
                              kernels::conv2d_dbias(out->grad.data(), db.data(), s);
                              for (size_t i = 0; i < db.size(); ++i) bias->grad[i] += db[i];
                          }
                      }});
    }
    return out;
}

TensorPtr pool_spatial(Tape* tape, const TensorPtr& x, PoolMode mode) {
    require_map(x, "pool_spatial");
    const int c = x->shape[0], plane = x->shape[1] * x->shape[2];
    auto out = zeros({c});
    std::vector<int> argmax(mode == PoolMode::max ? c : 0);
    for (int ci = 0; ci < c; ++ci) {
        const double* p = x->data.data() + static_cast<size_t>(ci) * plane;
        if (mode == PoolMode::avg) {
            double acc = 0.0;
            for (int i = 0; i < plane; ++i) acc += p[i];
            out->data[ci] = acc / plane;
        } else {
            int best = 0;
            for (int i = 1; i < plane; ++i) {
                if (p[i] > p[best]) best = i;  // first max wins ties
            }
            argmax[ci] = best;
            out->data[ci] = p[best];
        }
    }
    if (want_grad(tape, {&x})) {
        out->tracked = true;
        tape->record({{x}, out, [x, out, mode, c, plane, argmax = std::move(argmax)] {
                          for (int ci = 0; ci < c; ++ci) {
                              const double g = out->grad[ci];
                              double* gp = x->grad.data() + static_cast<size_t>(ci) * plane;
                              if (mode == PoolMode::avg) {
                                  for (int i = 0; i < plane; ++i) gp[i] += g / plane;
                              } else {
                                  gp[argmax[ci]] += g;
                              }
                          }
                      }});
    }
    return out;
}

TensorPtr pool_channel(Tape* tape, const TensorPtr& x, PoolMode mode) {
    require_map(x, "pool_channel");
    const int c = x->shape[0], h = x->shape[1], w = x->shape[2];
    const int plane = h * w;
    auto out = zeros({1, h, w});
    std::vector<int> argmax(mode == PoolMode::max ? plane : 0);
    for (int i = 0; i < plane; ++i) {
        if (mode == PoolMode::avg) {
            double acc = 0.0;
            for (int ci = 0; ci < c; ++ci) acc += x->data[static_cast<size_t>(ci) * plane + i];
            out->data[i] = acc / c;
        } else {
            int best = 0;
            for (int ci = 1; ci < c; ++ci) {
                if (x->data[static_cast<size_t>(ci) * plane + i] >
                    x->data[static_cast<size_t>(best) * plane + i])
                    best = ci;
            }
            argmax[i] = best;
            out->data[i] = x->data[static_cast<size_t>(best) * plane + i];
        }
    }
    if (want_grad(tape, {&x})) {
        out->tracked = true;
        tape->record({{x}, out, [x, out, mode, c, plane, argmax = std::move(argmax)] {
                          for (int i = 0; i < plane; ++i) {
                              const double g = out->grad[i];
                              if (mode == PoolMode::avg) {
                                  for (int ci = 0; ci < c; ++ci)
                                      x->grad[static_cast<size_t>(ci) * plane + i] += g / c;
                              } else {
                                  x->grad[static_cast<size_t>(argmax[i]) * plane + i] += g;
                              }
                          }
                      }});
    }
    return out;
}

TensorPtr activation(Tape* tape, const TensorPtr& x, Act kind) {
    auto out = zeros(x->shape);
    if (kind == Act::relu) {
        for (size_t i = 0; i < x->data.size(); ++i)
            out->data[i] = x->data[i] > 0.0 ? x->data[i] : 0.0;
    } else {
        for (size_t i = 0; i < x->data.size(); ++i) {
            const double v = x->data[i];
            // split by sign so exp never overflows
            out->data[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                                    : std::exp(v) / (1.0 + std::exp(v));
        }
    }
    if (want_grad(tape, {&x})) {
        out->tracked = true;
        tape->record({{x}, out, [x, out, kind] {
                          for (size_t i = 0; i < x->data.size(); ++i) {
                              if (kind == Act::relu) {
                                  if (x->data[i] > 0.0) x->grad[i] += out->grad[i];
                              } else {
                                  const double y = out->data[i];
                                  x->grad[i] += out->grad[i] * y * (1.0 - y);
                              }
                          }
                      }});
    }
    return out;
}

TensorPtr relu(Tape* tape, const TensorPtr& x) { return activation(tape, x, Act::relu); }
TensorPtr sigmoid(Tape* tape, const TensorPtr& x) { return activation(tape, x, Act::sigmoid); }

TensorPtr add(Tape* tape, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "add");
    auto out = zeros(a->shape);
    for (size_t i = 0; i < out->data.size(); ++i) out->data[i] = a->data[i] + b->data[i];
    if (want_grad(tape, {&a, &b})) {
        out->tracked = true;
        tape->record({{a, b}, out, [a, b, out] {
                          for (size_t i = 0; i < out->grad.size(); ++i) {
                              if (a->tracked) a->grad[i] += out->grad[i];
                              if (b->tracked) b->grad[i] += out->grad[i];
                          }
                      }});
    }
    return out;
}

TensorPtr sub(Tape* tape, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "sub");
    auto out = zeros(a->shape);
    for (size_t i = 0; i < out->data.size(); ++i) out->data[i] = a->data[i] - b->data[i];
    if (want_grad(tape, {&a, &b})) {
        out->tracked = true;
        tape->record({{a, b}, out, [a, b, out] {
                          for (size_t i = 0; i < out->grad.size(); ++i) {
                              if (a->tracked) a->grad[i] += out->grad[i];
                              if (b->tracked) b->grad[i] -= out->grad[i];
                          }
                      }});
    }
    return out;
}

TensorPtr mul(Tape* tape, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "mul");
    auto out = zeros(a->shape);
    for (size_t i = 0; i < out->data.size(); ++i) out->data[i] = a->data[i] * b->data[i];
    if (want_grad(tape, {&a, &b})) {
        out->tracked = true;
        tape->record({{a, b}, out, [a, b, out] {
                          for (size_t i = 0; i < out->grad.size(); ++i) {
                              if (a->tracked) a->grad[i] += out->grad[i] * b->data[i];
                              if (b->tracked) b->grad[i] += out->grad[i] * a->data[i];
                          }
                      }});
    }
    return out;
}

TensorPtr scale(Tape* tape, const TensorPtr& x, double c) {
    auto out = zeros(x->shape);
    for (size_t i = 0; i < out->data.size(); ++i) out->data[i] = c * x->data[i];
    if (want_grad(tape, {&x})) {
        out->tracked = true;
        tape->record({{x}, out, [x, out, c] {
                          for (size_t i = 0; i < out->grad.size(); ++i) x->grad[i] += c * out->grad[i];
                      }});
    }
    return out;
}

TensorPtr sum(Tape* tape, const TensorPtr& x) {
    double acc = 0.0;
    for (double v : x->data) acc += v;
    auto out = scalar(acc);
    if (want_grad(tape, {&x})) {
        out->tracked = true;
        tape->record({{x}, out, [x, out] {
                          for (size_t i = 0; i < x->grad.size(); ++i) x->grad[i] += out->grad[0];
                      }});
    }
    return out;
}

TensorPtr add_row_broadcast(Tape* tape, const TensorPtr& x, const TensorPtr& bias) {
    require_matrix(x, "add_row_broadcast");
    if (bias->shape != std::vector<int>{x->shape[1]})
        throw contract_error("add_row_broadcast: bias " + shape_string(bias->shape) +
                             " does not match columns of " + shape_string(x->shape));
    const int m = x->shape[0], n = x->shape[1];
    auto out = zeros(x->shape);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out->at(i, j) = x->at(i, j) + bias->data[j];
    if (want_grad(tape, {&x, &bias})) {
        out->tracked = true;
        tape->record({{x, bias}, out, [x, bias, out, m, n] {
                          for (int i = 0; i < m; ++i) {
                              for (int j = 0; j < n; ++j) {
                                  const double g = out->grad[static_cast<size_t>(i) * n + j];
                                  if (x->tracked) x->grad[static_cast<size_t>(i) * n + j] += g;
                                  if (bias->tracked) bias->grad[j] += g;
                              }
                          }
                      }});
    }
    return out;
}

TensorPtr affine(Tape* tape, const TensorPtr& x, const TensorPtr& w, const TensorPtr& b) {
    return add_row_broadcast(tape, matmul(tape, x, w), b);
}

TensorPtr scale1p(Tape* tape, const TensorPtr& x, const TensorPtr& theta) {
    if (theta->size() != 1)
        throw contract_error("scale1p: theta must be a scalar, got " + shape_string(theta->shape));
    const double f = 1.0 + theta->data[0];
    auto out = zeros(x->shape);
    for (size_t i = 0; i < x->data.size(); ++i) out->data[i] = f * x->data[i];
    if (want_grad(tape, {&x, &theta})) {
        out->tracked = true;
        tape->record({{x, theta}, out, [x, theta, out, f] {
                          double dtheta = 0.0;
                          for (size_t i = 0; i < out->grad.size(); ++i) {
                              if (x->tracked) x->grad[i] += f * out->grad[i];
                              dtheta += out->grad[i] * x->data[i];
                          }
                          if (theta->tracked) theta->grad[0] += dtheta;
                      }});
    }
    return out;
}

TensorPtr neighbor_sum(Tape* tape, const TensorPtr& x) {
    require_matrix(x, "neighbor_sum");
    const int n = x->shape[0], d = x->shape[1];
    auto out = zeros(x->shape);
    std::vector<double> column(n);
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < n; ++i) column[i] = x->at(i, j);
        const double total = multiset_sum(column);
        for (int i = 0; i < n; ++i) out->at(i, j) = total - x->at(i, j);
    }
    if (want_grad(tape, {&x})) {
        out->tracked = true;
        tape->record({{x}, out, [x, out, n, d] {
                          for (int j = 0; j < d; ++j) {
                              double colsum = 0.0;
                              for (int i = 0; i < n; ++i)
                                  colsum += out->grad[static_cast<size_t>(i) * d + j];
                              for (int i = 0; i < n; ++i)
                                  x->grad[static_cast<size_t>(i) * d + j] +=
                                      colsum - out->grad[static_cast<size_t>(i) * d + j];
                          }
                      }});
    }
    return out;
}

TensorPtr mul_channel_gate(Tape* tape, const TensorPtr& x, const TensorPtr& gate) {
    require_map(x, "mul_channel_gate");
    if (gate->shape != std::vector<int>{x->shape[0]})
        throw contract_error("mul_channel_gate: gate " + shape_string(gate->shape) +
                             " does not match channels of " + shape_string(x->shape));
    const int c = x->shape[0], plane = x->shape[1] * x->shape[2];
    auto out = zeros(x->shape);
    for (int ci = 0; ci < c; ++ci)
        for (int i = 0; i < plane; ++i)
            out->data[static_cast<size_t>(ci) * plane + i] =
                x->data[static_cast<size_t>(ci) * plane + i] * gate->data[ci];
    if (want_grad(tape, {&x, &gate})) {
        out->tracked = true;
        tape->record({{x, gate}, out, [x, gate, out, c, plane] {
                          for (int ci = 0; ci < c; ++ci) {
                              double dg = 0.0;
                              for (int i = 0; i < plane; ++i) {
                                  const size_t k = static_cast<size_t>(ci) * plane + i;
                                  if (x->tracked) x->grad[k] += out->grad[k] * gate->data[ci];
                                  dg += out->grad[k] * x->data[k];
                              }
                              if (gate->tracked) gate->grad[ci] += dg;
                          }
                      }});
    }
    return out;
}

TensorPtr mul_spatial_gate(Tape* tape, const TensorPtr& x, const TensorPtr& gate) {
    require_map(x, "mul_spatial_gate");
    if (gate->shape != std::vector<int>{1, x->shape[1], x->shape[2]})
        throw contract_error("mul_spatial_gate: gate " + shape_string(gate->shape) +
                             " does not match map " + shape_string(x->shape));
    const int c = x->shape[0], plane = x->shape[1] * x->shape[2];
    auto out = zeros(x->shape);
    for (int ci = 0; ci < c; ++ci)
        for (int i = 0; i < plane; ++i)
            out->data[static_cast<size_t>(ci) * plane + i] =
                x->data[static_cast<size_t>(ci) * plane + i] * gate->data[i];
    if (want_grad(tape, {&x, &gate})) {
        out->tracked = true;
        tape->record({{x, gate}, out, [x, gate, out, c, plane] {
                          for (int i = 0; i < plane; ++i) {
                              double dg = 0.0;
                              for (int ci = 0; ci < c; ++ci) {
                                  const size_t k = static_cast<size_t>(ci) * plane + i;
                                  if (x->tracked) x->grad[k] += out->grad[k] * gate->data[i];
                                  dg += out->grad[k] * x->data[k];
                              }
                              if (gate->tracked) gate->grad[i] += dg;
                          }
                      }});
    }
    return out;
}

TensorPtr concat_channels(Tape* tape, const TensorPtr& a, const TensorPtr& b) {
    require_map(a, "concat_channels");
    require_map(b, "concat_channels");
    if (a->shape[1] != b->shape[1] || a->shape[2] != b->shape[2])
        throw contract_error("concat_channels: spatial sizes differ, " + shape_string(a->shape) +
                             " vs " + shape_string(b->shape));
    auto out = zeros({a->shape[0] + b->shape[0], a->shape[1], a->shape[2]});
    std::copy(a->data.begin(), a->data.end(), out->data.begin());
    std::copy(b->data.begin(), b->data.end(), out->data.begin() + a->data.size());
    if (want_grad(tape, {&a, &b})) {
        out->tracked = true;
        tape->record({{a, b}, out, [a, b, out] {
                          const size_t na = a->data.size();
                          if (a->tracked)
                              for (size_t i = 0; i < na; ++i) a->grad[i] += out->grad[i];
                          if (b->tracked)
                              for (size_t i = 0; i < b->data.size(); ++i)
                                  b->grad[i] += out->grad[na + i];
                      }});
    }
    return out;
}

TensorPtr concat_width(Tape* tape, const TensorPtr& a, const TensorPtr& b) {
    require_map(a, "concat_width");
    require_map(b, "concat_width");
    if (a->shape[0] != b->shape[0] || a->shape[1] != b->shape[1])
        throw contract_error("concat_width: channel/height sizes differ, " + shape_string(a->shape) +
                             " vs " + shape_string(b->shape));
    const int c = a->shape[0], h = a->shape[1], wa = a->shape[2], wb = b->shape[2];
    auto out = zeros({c, h, wa + wb});
    for (int ci = 0; ci < c; ++ci) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < wa; ++x) out->at(ci, y, x) = a->at(ci, y, x);
            for (int x = 0; x < wb; ++x) out->at(ci, y, wa + x) = b->at(ci, y, x);
        }
    }
    if (want_grad(tape, {&a, &b})) {
        out->tracked = true;
        tape->record({{a, b}, out, [a, b, out, c, h, wa, wb] {
                          for (int ci = 0; ci < c; ++ci) {
                              for (int y = 0; y < h; ++y) {
                                  for (int x = 0; x < wa; ++x) {
                                      if (a->tracked)
                                          a->grad[(static_cast<size_t>(ci) * h + y) * wa + x] +=
                                              out->grad[(static_cast<size_t>(ci) * h + y) * (wa + wb) + x];
                                  }
                                  for (int x = 0; x < wb; ++x) {
                                      if (b->tracked)
                                          b->grad[(static_cast<size_t>(ci) * h + y) * wb + x] +=
                                              out->grad[(static_cast<size_t>(ci) * h + y) * (wa + wb) + wa + x];
                                  }
                              }
                          }
                      }});
    }
    return out;
}

TensorPtr take_row(Tape* tape, const TensorPtr& x, int row) {
    require_matrix(x, "take_row");
    if (row < 0 || row >= x->shape[0])
        throw contract_error("take_row: row " + std::to_string(row) + " out of range for " +
                             shape_string(x->shape));
    const int d = x->shape[1];
    auto out = zeros({1, d});
    for (int j = 0; j < d; ++j) out->data[j] = x->at(row, j);
    if (want_grad(tape, {&x})) {
        out->tracked = true;
        tape->record({{x}, out, [x, out, row, d] {
                          for (int j = 0; j < d; ++j)
                              x->grad[static_cast<size_t>(row) * d + j] += out->grad[j];
                      }});
    }
    return out;
}

TensorPtr stack_rows(Tape* tape, const std::vector<TensorPtr>& rows) {
    if (rows.empty()) throw contract_error("stack_rows: no rows");
    const int d = rows[0]->shape.back();
    for (const auto& r : rows) {
        if (r->shape != std::vector<int>{1, d})
            throw contract_error("stack_rows: expected 1x" + std::to_string(d) + " rows, got " +
                                 shape_string(r->shape));
    }
    const int n = static_cast<int>(rows.size());
    auto out = zeros({n, d});
    for (int i = 0; i < n; ++i)
        std::copy(rows[i]->data.begin(), rows[i]->data.end(),
                  out->data.begin() + static_cast<size_t>(i) * d);
    bool any_tracked = false;
    for (const auto& r : rows) any_tracked |= r->tracked;
    if (tape && any_tracked) {
        out->tracked = true;
        tape->record({rows, out, [rows, out, d] {
                          for (size_t i = 0; i < rows.size(); ++i) {
                              if (!rows[i]->tracked) continue;
                              for (int j = 0; j < d; ++j)
                                  rows[i]->grad[j] += out->grad[i * d + j];
                          }
                      }});
    }
    return out;
}

TensorPtr reshape(Tape* tape, const TensorPtr& x, std::vector<int> shape) {
    if (shape_product(shape) != x->size())
        throw contract_error("reshape: cannot view " + shape_string(x->shape) + " as " +
                             shape_string(shape));
    auto out = make_tensor(std::move(shape), x->data);
    if (want_grad(tape, {&x})) {
        out->tracked = true;
        tape->record({{x}, out, [x, out] {
                          for (size_t i = 0; i < x->grad.size(); ++i) x->grad[i] += out->grad[i];
                      }});
    }
    return out;
}

TensorPtr mean_over_width(Tape* tape, const TensorPtr& x) {
    require_map(x, "mean_over_width");
    const int c = x->shape[0], h = x->shape[1], w = x->shape[2];
    auto out = zeros({1, c * h});
    for (int ci = 0; ci < c; ++ci) {
        for (int y = 0; y < h; ++y) {
            double acc = 0.0;
            for (int xw = 0; xw < w; ++xw) acc += x->at(ci, y, xw);
            out->data[static_cast<size_t>(ci) * h + y] = acc / w;
        }
    }
    if (want_grad(tape, {&x})) {
        out->tracked = true;
        tape->record({{x}, out, [x, out, c, h, w] {
                          for (int ci = 0; ci < c; ++ci)
                              for (int y = 0; y < h; ++y) {
                                  const double g = out->grad[static_cast<size_t>(ci) * h + y] / w;
                                  for (int xw = 0; xw < w; ++xw)
                                      x->grad[(static_cast<size_t>(ci) * h + y) * w + xw] += g;
                              }
                      }});
    }
    return out;
}

}  // namespace trajkit::nn
