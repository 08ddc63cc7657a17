#include "trajkit/metrics.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace trajkit::metrics {

namespace {

// Both sets must be n x t_out with one shared t_out; returns (n, t_out).
std::pair<std::size_t, std::size_t> check_shapes(const TrajectorySet& truth,
                                                 const TrajectorySet& pred) {
    if (truth.empty())
        throw contract_error("metrics: empty trajectory set");
    if (truth.size() != pred.size())
        throw contract_error("metrics: subject counts disagree, " +
                             std::to_string(truth.size()) + " vs " + std::to_string(pred.size()));
    const std::size_t t_out = truth[0].size();
    if (t_out == 0)
        throw contract_error("metrics: zero prediction steps");
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i].size() != t_out || pred[i].size() != t_out)
            throw contract_error("metrics: subject " + std::to_string(i) + " has " +
                                 std::to_string(truth[i].size()) + "/" +
                                 std::to_string(pred[i].size()) + " steps, expected " +
                                 std::to_string(t_out));
    }
    return {truth.size(), t_out};
}

}  // namespace

double ade(const TrajectorySet& truth, const TrajectorySet& pred) {
    const auto [n, t_out] = check_shapes(truth, pred);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < t_out; ++t) acc += norm2(truth[i][t] - pred[i][t]);
    return acc / (static_cast<double>(n) * static_cast<double>(t_out));
}

double fde(const TrajectorySet& truth, const TrajectorySet& pred) {
    const auto [n, t_out] = check_shapes(truth, pred);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += norm2(truth[i][t_out - 1] - pred[i][t_out - 1]);
    return acc / static_cast<double>(n);
}

std::vector<std::pair<int, double>> rmse_curve(const TrajectorySet& truth,
                                               const TrajectorySet& pred, double fps) {
    const auto [n, t_out] = check_shapes(truth, pred);
    const auto steps_per_second = static_cast<std::int64_t>(std::llround(fps));
    if (fps <= 0.0 || std::fabs(fps - static_cast<double>(steps_per_second)) > 1e-9 ||
        t_out % static_cast<std::size_t>(steps_per_second) != 0)
        throw config_error("rmse_curve: " + std::to_string(t_out) + " steps at " +
                           format_double(fps) + " fps do not divide into whole seconds");
    std::vector<std::pair<int, double>> out;
    const int seconds = static_cast<int>(t_out / static_cast<std::size_t>(steps_per_second));
    for (int s = 1; s <= seconds; ++s) {
        const std::size_t t = static_cast<std::size_t>(s) * steps_per_second - 1;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 d = truth[i][t] - pred[i][t];
            acc += d.x * d.x + d.y * d.y;
        }
        out.emplace_back(s, std::sqrt(acc / static_cast<double>(n)));
    }
    return out;
}

std::string report_text(const MetricReport& report) {
    std::ostringstream out;
    out << "ade = " << format_double(report.ade) << "\n";
    out << "fde = " << format_double(report.fde) << "\n";
    out << "n_subjects = " << report.n_subjects << "\n";
    out << "units = " << data::units_name(report.units) << "\n";
    for (auto [second, rmse] : report.rmse_per_second)
        out << "rmse_" << second << "s = " << format_double(rmse) << "\n";
    return out.str();
}

std::string report_json(const MetricReport& report) {
    nlohmann::json j;
    j["ade"] = report.ade;
    j["fde"] = report.fde;
    j["n_subjects"] = report.n_subjects;
    j["units"] = data::units_name(report.units);
    auto& curve = j["rmse_per_second"] = nlohmann::json::array();
    for (auto [second, rmse] : report.rmse_per_second)
        curve.push_back({{"second", second}, {"rmse", rmse}});
    return j.dump(2) + "\n";
}

std::vector<Vec2> constant_velocity_predict(const data::TrajectoryWindow& window) {
    if (window.observed.size() < 2)
        throw contract_error("constant_velocity_predict: needs at least 2 observed steps, got " +
                             std::to_string(window.observed.size()));
    const Vec2 last = window.observed.back();
    const Vec2 v = last - window.observed[window.observed.size() - 2];
    std::vector<Vec2> out(window.future.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double step = static_cast<double>(k + 1);
        out[k] = {last.x + step * v.x, last.y + step * v.y};
    }
    return out;
}

std::vector<Vec2> linear_fit_predict(const data::TrajectoryWindow& window) {
    const std::size_t t_in = window.observed.size();
    if (t_in < 2)
        throw contract_error("linear_fit_predict: needs at least 2 observed steps, got " +
                             std::to_string(t_in));
    double st = 0.0, stt = 0.0, sx = 0.0, sy = 0.0, stx = 0.0, sty = 0.0;
    for (std::size_t k = 0; k < t_in; ++k) {
        const double t = static_cast<double>(k);
        st += t;
        stt += t * t;
        sx += window.observed[k].x;
        sy += window.observed[k].y;
        stx += t * window.observed[k].x;
        sty += t * window.observed[k].y;
    }
    const double count = static_cast<double>(t_in);
    const double denom = count * stt - st * st;  // positive for t_in >= 2
    const double bx = (count * stx - st * sx) / denom;
    const double by = (count * sty - st * sy) / denom;
    const double ax = (sx - bx * st) / count;
    const double ay = (sy - by * st) / count;
    std::vector<Vec2> out(window.future.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double t = static_cast<double>(t_in - 1 + (k + 1));
        out[k] = {ax + bx * t, ay + by * t};
    }
    return out;
}

}  // namespace trajkit::metrics
