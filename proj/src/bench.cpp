#include "trajkit/bench.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "trajkit/kernels.hpp"

namespace trajkit::bench {

double samples_per_frame(const std::vector<data::FrameSample>& frames) {
    if (frames.empty()) throw contract_error("samples_per_frame: empty frame list");
    std::size_t total = 0;
    for (const auto& f : frames) total += f.windows.size();
    return static_cast<double>(total) / static_cast<double>(frames.size());
}

double fps_from(double latency_ms_per_sample, double samples_per_frame) {
    return 1000.0 / (latency_ms_per_sample * samples_per_frame);
}

BenchReport bench_run(const std::function<void(const data::FrameSample&)>& fn,
                      const std::vector<data::FrameSample>& frames, int warmup, int reps) {
    if (frames.empty()) throw config_error("bench: empty frame list");
    if (warmup < 5) throw config_error("bench: need at least 5 warmup passes, got " +
                                       std::to_string(warmup));
    if (reps < 30) throw config_error("bench: need at least 30 measured repetitions, got " +
                                      std::to_string(reps));
    std::size_t subjects = 0;
    for (const auto& f : frames) subjects += f.windows.size();
    if (subjects == 0) throw config_error("bench: frames contain no subjects");

    // batch size one, strictly single-threaded inside the measured region
    kernels::ScopedSerial serial_lane;
    for (int r = 0; r < warmup; ++r)
        for (const auto& f : frames) fn(f);

    std::vector<double> latency_ms(reps);
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        for (const auto& f : frames) fn(f);
        const auto t1 = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        latency_ms[r] = ms / static_cast<double>(subjects);
    }

    BenchReport report;
    report.warmup_reps = warmup;
    report.measured_reps = reps;
    report.samples_per_frame = samples_per_frame(frames);
    double mean = 0.0;
    for (double v : latency_ms) mean += v;
    mean /= static_cast<double>(reps);
    double var = 0.0;
    for (double v : latency_ms) var += (v - mean) * (v - mean);
    report.latency_ms_mean = mean;
    report.latency_ms_stddev = std::sqrt(var / static_cast<double>(reps - 1));
    report.fps = fps_from(mean, report.samples_per_frame);
    return report;
}

BenchReport bench_forward(const model::ModelParams& params,
                          const std::vector<data::FrameSample>& frames, int warmup, int reps) {
    return bench_run([&params](const data::FrameSample& f) { model::forward(nullptr, f, params); },
                     frames, warmup, reps);
}

std::string report_text(const BenchReport& report) {
    std::ostringstream out;
    out << "latency_ms_mean = " << format_double(report.latency_ms_mean) << "\n";
    out << "latency_ms_stddev = " << format_double(report.latency_ms_stddev) << "\n";
    out << "samples_per_frame = " << format_double(report.samples_per_frame) << "\n";
    out << "fps = " << format_double(report.fps) << "\n";
    out << "warmup_reps = " << report.warmup_reps << "\n";
    out << "measured_reps = " << report.measured_reps << "\n";
    return out.str();
}

std::string report_json(const BenchReport& report) {
    nlohmann::json j;
    j["latency_ms_mean"] = report.latency_ms_mean;
    j["latency_ms_stddev"] = report.latency_ms_stddev;
    j["samples_per_frame"] = report.samples_per_frame;
    j["fps"] = report.fps;
    j["warmup_reps"] = report.warmup_reps;
    j["measured_reps"] = report.measured_reps;
    return j.dump(2) + "\n";
}

}  // namespace trajkit::bench
