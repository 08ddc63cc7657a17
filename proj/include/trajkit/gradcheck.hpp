#pragma once

// Central-difference oracle for backward rules. The function under test
// rebuilds its forward pass from the captured input tensors each call, so
// perturbing an input coordinate in place re-evaluates the whole graph.

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "trajkit/tensor.hpp"

namespace trajkit::nn {

struct GradCheckResult {
    double max_rel_err = 0.0;
    bool ok = true;       // false when some evaluation came back non-finite
    std::string detail;   // worst coordinate, or what went non-finite
};

// Builds a scalar loss on the given tape from tensors captured by the closure.
using ScalarFn = std::function<TensorPtr(Tape&)>;

// Sweeps every coordinate of every input. Relative error uses denominator
// max(|analytic|, |numeric|, 1e-8).
GradCheckResult grad_check(const ScalarFn& fn, const std::vector<TensorPtr>& inputs,
                           double step);

// Same check restricted to (input index, flat coordinate) pairs; used to
// sample a handful of parameters of the full model.
GradCheckResult grad_check_coords(const ScalarFn& fn, const std::vector<TensorPtr>& inputs,
                                  const std::vector<std::pair<int, int>>& coords,
                                  double step);

}  // namespace trajkit::nn
