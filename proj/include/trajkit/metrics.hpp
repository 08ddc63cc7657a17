#pragma once

// Displacement-error metrics over predicted trajectories, plus the two
// closed-form baselines used for sanity comparison.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "trajkit/data.hpp"

namespace trajkit::metrics {

// n subjects x t_out steps of absolute positions.
using TrajectorySet = std::vector<std::vector<Vec2>>;

// Mean L2 distance over all subjects and steps.
double ade(const TrajectorySet& truth, const TrajectorySet& pred);

// Mean L2 distance at the final step only.
double fde(const TrajectorySet& truth, const TrajectorySet& pred);

// RMSE at whole-second horizons t = fps, 2*fps, ..., t_out; the squared term
// is the squared Euclidean norm of the 2-vector error. fps must divide t_out
// into whole seconds.
std::vector<std::pair<int, double>> rmse_curve(const TrajectorySet& truth,
                                               const TrajectorySet& pred, double fps);

struct MetricReport {
    double ade = 0.0;
    double fde = 0.0;
    std::vector<std::pair<int, double>> rmse_per_second;  // strictly increasing horizons
    std::int64_t n_subjects = 0;
    data::Units units = data::Units::meters;
};

// `name = value` lines and a JSON document with identical content.
std::string report_text(const MetricReport& report);
std::string report_json(const MetricReport& report);

// Last observed velocity continued for future.size() steps.
std::vector<Vec2> constant_velocity_predict(const data::TrajectoryWindow& window);

// Independent least-squares lines x(t), y(t) over the observed steps,
// extrapolated future.size() steps.
std::vector<Vec2> linear_fit_predict(const data::TrajectoryWindow& window);

}  // namespace trajkit::metrics
