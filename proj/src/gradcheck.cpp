#include "trajkit/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace trajkit::nn {

namespace {

double eval_scalar(const ScalarFn& fn) {
    Tape tape;
    TensorPtr out = fn(tape);
    if (out->size() != 1)
        throw contract_error("grad_check: fn must return a scalar, got " + shape_string(out->shape));
    return out->data[0];
}

GradCheckResult run_check(const ScalarFn& fn, const std::vector<TensorPtr>& inputs,
                          const std::vector<std::pair<int, int>>& coords, double step) {
    if (!(step > 0.0)) throw contract_error("grad_check: step must be positive");
    for (int i = 0; i < static_cast<int>(inputs.size()); ++i) {
        if (!all_finite(inputs[i]->data))
            throw contract_error("grad_check: input " + std::to_string(i) + " is not finite");
    }

    std::vector<bool> was_tracked(inputs.size());
    for (size_t i = 0; i < inputs.size(); ++i) {
        was_tracked[i] = inputs[i]->tracked;
        inputs[i]->tracked = true;
        inputs[i]->ensure_grad();
        inputs[i]->zero_grad();
    }

    GradCheckResult result;
    {
        Tape tape;
        TensorPtr loss = fn(tape);
        if (loss->size() != 1)
            throw contract_error("grad_check: fn must return a scalar, got " + shape_string(loss->shape));
        if (!std::isfinite(loss->data[0])) {
            result.ok = false;
            result.detail = "non-finite loss at the unperturbed point";
        } else {
            tape.backward(loss);
        }
    }

    if (result.ok) {
        char buf[160];
        for (const auto& [ti, ci] : coords) {
            TensorPtr t = inputs[ti];
            const double saved = t->data[ci];
            t->data[ci] = saved + step;
            const double f_plus = eval_scalar(fn);
            t->data[ci] = saved - step;
            const double f_minus = eval_scalar(fn);
            t->data[ci] = saved;
            if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
                result.ok = false;
                std::snprintf(buf, sizeof buf, "non-finite output perturbing input %d coord %d", ti, ci);
                result.detail = buf;
                break;
            }
            const double numeric = (f_plus - f_minus) / (2.0 * step);
            const double analytic = t->grad[ci];
            const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
            const double rel = std::fabs(analytic - numeric) / denom;
            if (rel >= result.max_rel_err) {
                result.max_rel_err = rel;
                std::snprintf(buf, sizeof buf,
                              "worst: input %d coord %d analytic %.9g numeric %.9g rel %.3g",
                              ti, ci, analytic, numeric, rel);
                result.detail = buf;
            }
        }
    }

    for (size_t i = 0; i < inputs.size(); ++i) inputs[i]->tracked = was_tracked[i];
    return result;
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& fn, const std::vector<TensorPtr>& inputs,
                           double step) {
    std::vector<std::pair<int, int>> coords;
    for (int ti = 0; ti < static_cast<int>(inputs.size()); ++ti)
        for (int ci = 0; ci < inputs[ti]->size(); ++ci) coords.emplace_back(ti, ci);
    return run_check(fn, inputs, coords, step);
}

GradCheckResult grad_check_coords(const ScalarFn& fn, const std::vector<TensorPtr>& inputs,
                                  const std::vector<std::pair<int, int>>& coords,
                                  double step) {
    for (const auto& [ti, ci] : coords) {
        if (ti < 0 || ti >= static_cast<int>(inputs.size()))
            throw contract_error("grad_check: coordinate names input " + std::to_string(ti) +
                                 " of " + std::to_string(inputs.size()));
        if (ci < 0 || ci >= inputs[ti]->size())
            throw contract_error("grad_check: coord " + std::to_string(ci) + " out of range for " +
                                 shape_string(inputs[ti]->shape));
    }
    return run_check(fn, inputs, coords, step);
}

}  // namespace trajkit::nn
