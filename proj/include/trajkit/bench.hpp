#pragma once

// Latency and throughput measurement: per-sample forward latency over a
// frame corpus and the samples-per-frame FPS accounting.

#include <functional>
#include <string>
#include <vector>

#include "trajkit/data.hpp"
#include "trajkit/model.hpp"

namespace trajkit::bench {

struct BenchReport {
    double latency_ms_mean = 0.0;    // per sample
    double latency_ms_stddev = 0.0;  // across repetitions
    double samples_per_frame = 0.0;  // mean subjects per frame
    double fps = 0.0;                // 1000 / (latency_ms_mean * samples_per_frame)
    int warmup_reps = 0;
    int measured_reps = 0;
};

// Mean window count per frame.
double samples_per_frame(const std::vector<data::FrameSample>& frames);

// Frame throughput from per-sample latency and frame density.
double fps_from(double latency_ms_per_sample, double samples_per_frame);

// Timing core: `warmup` untimed passes then `reps` timed passes of fn over
// the frame list, single-threaded inside the timed region, monotonic clock.
// Per-sample latency = wall time / subjects processed. warmup >= 5, reps >= 30.
BenchReport bench_run(const std::function<void(const data::FrameSample&)>& fn,
                      const std::vector<data::FrameSample>& frames, int warmup, int reps);

// bench_run over the model forward pass with gradient tracking off.
BenchReport bench_forward(const model::ModelParams& params,
                          const std::vector<data::FrameSample>& frames, int warmup, int reps);

// `key = value` lines and a JSON document with identical content.
std::string report_text(const BenchReport& report);
std::string report_json(const BenchReport& report);

}  // namespace trajkit::bench
