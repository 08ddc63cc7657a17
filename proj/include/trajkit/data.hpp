#pragma once

// Trajectory ingestion and windowing: CSV tracks -> downsampled tracks ->
// sliding windows -> per-frame graphs with centroid normalization -> splits.
// Also the synthetic scene generator used by tests and the CLI.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "trajkit/common.hpp"

namespace trajkit::data {

struct TrackPoint {
    std::int64_t frame_id = 0;
    std::int64_t subject_id = 0;
    double x = 0.0;
    double y = 0.0;
};

struct TrajectoryWindow {
    std::int64_t subject_id = 0;
    std::int64_t anchor_frame = 0;  // frame id of the last observed step
    std::vector<Vec2> observed;     // T_in absolute positions
    std::vector<Vec2> relative;     // observed[k] - observed[0]; relative[0] == (0,0)
    std::vector<Vec2> future;       // T_out absolute positions
};

struct FrameSample {
    std::int64_t anchor_frame = 0;
    std::vector<TrajectoryWindow> windows;  // absolute coordinates already normalized
    Vec2 normalization_offset;              // subtracted from every absolute coordinate
};

enum class Domain { vehicle_birdseye, pedestrian_birdseye, pedestrian_highangle };
enum class Units { meters, pixels };

struct DatasetSpec {
    std::string name;
    Domain domain = Domain::vehicle_birdseye;
    Units units = Units::meters;
    double native_fps = 0.0;
    double target_fps = 0.0;
    int t_in = 0;
    int t_out = 0;
};

// Built-in presets: vehicle | pedestrian_birdseye | pedestrian_highangle.
DatasetSpec dataset_preset(const std::string& name);
DatasetSpec dataset_spec_from_kv(const std::vector<std::pair<std::string, std::string>>& kv,
                                 const std::string& origin);
DatasetSpec load_dataset_spec(const std::string& path);

std::string domain_name(Domain d);
std::string units_name(Units u);

struct Scene {
    std::string name;
    std::vector<FrameSample> frames;
};

// CSV with header frame_id,subject_id,x,y; extra columns are ignored with a
// warning. Output sorted by (subject_id, frame_id).
std::vector<TrackPoint> load_tracks(const std::string& path);
void save_tracks_csv(const std::string& path, const std::vector<TrackPoint>& tracks);

// Keeps frames whose id is a multiple of native_fps/target_fps.
std::vector<TrackPoint> downsample(const std::vector<TrackPoint>& tracks,
                                   double native_fps, double target_fps);

// Emits one window per run of t_in+t_out strictly consecutive frames,
// advancing the start by `stride` kept positions each time.
std::vector<TrajectoryWindow> build_windows(const std::vector<TrackPoint>& tracks,
                                            const DatasetSpec& spec, int stride = 1);

// Buckets windows by anchor frame and normalizes each bucket by the centroid
// of last observed positions (translation only, relative coords untouched).
std::vector<FrameSample> group_frames(std::vector<TrajectoryWindow> windows);

// Undo the per-frame translation on one predicted point.
inline Vec2 denormalize(const FrameSample& frame, Vec2 p) {
    return p + frame.normalization_offset;
}

struct SplitRatios {
    double train = 0.7;
    double val = 0.1;
    double test = 0.2;
};

struct SplitResult {
    std::vector<FrameSample> train, val, test;
};

// Chronological split by anchor frame; fractions must sum to 1.
SplitResult split_dataset(const std::vector<FrameSample>& samples, SplitRatios ratios);
// Held-out scene becomes the test set, the rest the train set; val is empty.
SplitResult split_leave_one_out(const std::vector<Scene>& scenes, const std::string& held_out);

enum class SceneKind { constant_velocity, turning, crossing };
SceneKind scene_kind_from_name(const std::string& name);

// Exact line p(k) = start + k * velocity, frames first_frame + k * frame_gap.
std::vector<TrackPoint> straight_track(std::int64_t subject_id, Vec2 start, Vec2 velocity,
                                       int n_frames, std::int64_t first_frame = 0,
                                       std::int64_t frame_gap = 1);

// Deterministic for a fixed seed. `noise` adds independent Gaussian jitter
// (std dev in position units) to every coordinate; 0 keeps paths exact.
std::vector<TrackPoint> synth_scene(SceneKind kind, int n_subjects, int n_frames,
                                    std::uint64_t seed, double noise = 0.0);

// Version-guarded binary cache of a windowed dataset.
void save_cache(const std::string& path, const DatasetSpec& spec,
                const std::vector<FrameSample>& samples);
std::pair<DatasetSpec, std::vector<FrameSample>> load_cache(const std::string& path);

}  // namespace trajkit::data
