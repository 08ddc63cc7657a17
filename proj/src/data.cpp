#include "trajkit/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

namespace trajkit::data {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

std::int64_t parse_int_field(const std::string& s, const std::string& where) {
    if (s.empty()) throw io_error(where + ": empty integer field");
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size())
        throw io_error(where + ": expected an integer, got \"" + s + "\"");
    return v;
}

double parse_double_field(const std::string& s, const std::string& where) {
    if (s.empty()) throw io_error(where + ": empty coordinate field");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v))
        throw io_error(where + ": expected a finite number, got \"" + s + "\"");
    return v;
}

// native_fps must be an integer multiple of target_fps.
std::int64_t frame_stride(double native_fps, double target_fps) {
    if (!(native_fps > 0.0) || !(target_fps > 0.0))
        throw config_error("frame rates must be positive, got native_fps=" +
                           format_double(native_fps) + " target_fps=" + format_double(target_fps));
    const double ratio = native_fps / target_fps;
    const auto s = static_cast<std::int64_t>(std::llround(ratio));
    if (s < 1 || std::fabs(ratio - static_cast<double>(s)) > 1e-9)
        throw config_error("native_fps " + format_double(native_fps) +
                           " is not an integer multiple of target_fps " +
                           format_double(target_fps));
    return s;
}

Vec2 rotate(Vec2 v, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

struct CacheWriter {
    std::ofstream out;
    explicit CacheWriter(const std::string& path) : out(path, std::ios::binary) {
        if (!out) throw io_error("cannot write cache file: " + path);
    }
    void bytes(const void* p, std::size_t n) { out.write(static_cast<const char*>(p), n); }
    void u32(std::uint32_t v) { bytes(&v, sizeof v); }
    void u64(std::uint64_t v) { bytes(&v, sizeof v); }
    void i64(std::int64_t v) { bytes(&v, sizeof v); }
    void f64(double v) { bytes(&v, sizeof v); }
    void str(const std::string& s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }
};

struct CacheReader {
    std::ifstream in;
    std::string path;
    explicit CacheReader(const std::string& p) : in(p, std::ios::binary), path(p) {
        if (!in) throw io_error("cannot open cache file: " + p);
    }
    void bytes(void* p, std::size_t n) {
        in.read(static_cast<char*>(p), n);
        if (static_cast<std::size_t>(in.gcount()) != n)
            throw io_error(path + ": truncated cache file");
    }
    std::uint32_t u32() { std::uint32_t v; bytes(&v, sizeof v); return v; }
    std::uint64_t u64() { std::uint64_t v; bytes(&v, sizeof v); return v; }
    std::int64_t i64() { std::int64_t v; bytes(&v, sizeof v); return v; }
    double f64() { double v; bytes(&v, sizeof v); return v; }
    std::string str() {
        const auto n = u64();
        if (n > (1u << 20)) throw io_error(path + ": implausible string length in cache");
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }
};

constexpr char kCacheMagic[4] = {'T', 'K', 'D', 'S'};
constexpr std::uint32_t kCacheVersion = 1;

void recompute_relative(TrajectoryWindow& w) {
    w.relative.resize(w.observed.size());
    for (std::size_t k = 0; k < w.observed.size(); ++k)
        w.relative[k] = w.observed[k] - w.observed[0];
}

}  // namespace

DatasetSpec dataset_preset(const std::string& name) {
    DatasetSpec s;
    s.name = name;
    if (name == "vehicle") {
        s.domain = Domain::vehicle_birdseye;
        s.units = Units::meters;
        s.native_fps = 10.0;
        s.target_fps = 5.0;
        s.t_in = 15;
        s.t_out = 25;
    } else if (name == "pedestrian_birdseye") {
        s.domain = Domain::pedestrian_birdseye;
        s.units = Units::meters;
        s.native_fps = 2.5;
        s.target_fps = 2.5;
        s.t_in = 8;
        s.t_out = 12;
    } else if (name == "pedestrian_highangle") {
        s.domain = Domain::pedestrian_highangle;
        s.units = Units::pixels;
        s.native_fps = 30.0;
        s.target_fps = 2.5;
        s.t_in = 8;
        s.t_out = 12;
    } else {
        throw config_error("unknown dataset preset: " + name +
                           " (expected vehicle, pedestrian_birdseye, or pedestrian_highangle)");
    }
    return s;
}

std::string domain_name(Domain d) {
    switch (d) {
        case Domain::vehicle_birdseye: return "vehicle_birdseye";
        case Domain::pedestrian_birdseye: return "pedestrian_birdseye";
        case Domain::pedestrian_highangle: return "pedestrian_highangle";
    }
    return "?";
}

std::string units_name(Units u) { return u == Units::meters ? "meters" : "pixels"; }

DatasetSpec dataset_spec_from_kv(const std::vector<std::pair<std::string, std::string>>& kv,
                                 const std::string& origin) {
    DatasetSpec s;
    bool have[7] = {};
    for (const auto& [key, value] : kv) {
        if (key == "name") {
            s.name = value;
            have[0] = true;
        } else if (key == "domain") {
            if (value == "vehicle_birdseye") s.domain = Domain::vehicle_birdseye;
            else if (value == "pedestrian_birdseye") s.domain = Domain::pedestrian_birdseye;
            else if (value == "pedestrian_highangle") s.domain = Domain::pedestrian_highangle;
            else throw config_error(origin + ": unknown domain \"" + value + "\"");
            have[1] = true;
        } else if (key == "units") {
            if (value == "meters") s.units = Units::meters;
            else if (value == "pixels") s.units = Units::pixels;
            else throw config_error(origin + ": unknown units \"" + value + "\"");
            have[2] = true;
        } else if (key == "native_fps") {
            s.native_fps = parse_double_field(value, origin + " native_fps");
            have[3] = true;
        } else if (key == "target_fps") {
            s.target_fps = parse_double_field(value, origin + " target_fps");
            have[4] = true;
        } else if (key == "t_in") {
            s.t_in = static_cast<int>(parse_int_field(value, origin + " t_in"));
            have[5] = true;
        } else if (key == "t_out") {
            s.t_out = static_cast<int>(parse_int_field(value, origin + " t_out"));
            have[6] = true;
        } else {
            throw config_error(origin + ": unknown dataset field \"" + key + "\"");
        }
    }
    static const char* names[7] = {"name",       "domain",     "units", "native_fps",
                                   "target_fps", "t_in",       "t_out"};
    for (int i = 0; i < 7; ++i) {
        if (!have[i]) throw config_error(origin + ": missing dataset field \"" + names[i] + "\"");
    }
    if (s.t_in < 2) throw config_error(origin + ": t_in must be >= 2, got " + std::to_string(s.t_in));
    if (s.t_out < 1) throw config_error(origin + ": t_out must be >= 1, got " + std::to_string(s.t_out));
    frame_stride(s.native_fps, s.target_fps);
    return s;
}

DatasetSpec load_dataset_spec(const std::string& path) {
    return dataset_spec_from_kv(parse_kv_file(path), path);
}

std::vector<TrackPoint> load_tracks(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open track file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw io_error(path + ": empty file, expected a CSV header");
    auto header = split_csv_line(line);
    int col_frame = -1, col_subject = -1, col_x = -1, col_y = -1;
    for (int i = 0; i < static_cast<int>(header.size()); ++i) {
        if (header[i] == "frame_id") col_frame = i;
        else if (header[i] == "subject_id") col_subject = i;
        else if (header[i] == "x") col_x = i;
        else if (header[i] == "y") col_y = i;
        else std::cerr << "warning: " << path << ": ignoring column \"" << header[i] << "\"\n";
    }
    if (col_frame < 0) throw io_error(path + ": missing column \"frame_id\"");
    if (col_subject < 0) throw io_error(path + ": missing column \"subject_id\"");
    if (col_x < 0) throw io_error(path + ": missing column \"x\"");
    if (col_y < 0) throw io_error(path + ": missing column \"y\"");
    const int need = std::max({col_frame, col_subject, col_x, col_y}) + 1;

    std::vector<TrackPoint> points;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        const std::string where = path + ":" + std::to_string(line_no);
        if (static_cast<int>(fields.size()) < need)
            throw io_error(where + ": expected at least " + std::to_string(need) +
                           " fields, got " + std::to_string(fields.size()));
        TrackPoint p;
        p.frame_id = parse_int_field(fields[col_frame], where + " frame_id");
        if (p.frame_id < 0) throw io_error(where + ": frame_id must be non-negative");
        p.subject_id = parse_int_field(fields[col_subject], where + " subject_id");
        p.x = parse_double_field(fields[col_x], where + " x");
        p.y = parse_double_field(fields[col_y], where + " y");
        points.push_back(p);
    }
    std::sort(points.begin(), points.end(), [](const TrackPoint& a, const TrackPoint& b) {
        if (a.subject_id != b.subject_id) return a.subject_id < b.subject_id;
        return a.frame_id < b.frame_id;
    });
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].subject_id == points[i - 1].subject_id &&
            points[i].frame_id == points[i - 1].frame_id)
            throw io_error(path + ": duplicate row for (frame " + std::to_string(points[i].frame_id) +
                           ", subject " + std::to_string(points[i].subject_id) + ")");
    }
    return points;
}

void save_tracks_csv(const std::string& path, const std::vector<TrackPoint>& tracks) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write track file: " + path);
    out << "frame_id,subject_id,x,y\n";
    for (const auto& p : tracks)
        out << p.frame_id << "," << p.subject_id << "," << format_double(p.x) << ","
            << format_double(p.y) << "\n";
    if (!out) throw io_error("failed writing track file: " + path);
}

std::vector<TrackPoint> downsample(const std::vector<TrackPoint>& tracks,
                                   double native_fps, double target_fps) {
    const std::int64_t stride = frame_stride(native_fps, target_fps);
    if (stride == 1) return tracks;
    std::vector<TrackPoint> kept;
    kept.reserve(tracks.size() / stride + 1);
    for (const auto& p : tracks) {
        if (p.frame_id % stride == 0) kept.push_back(p);
    }
    return kept;
}

std::vector<TrajectoryWindow> build_windows(const std::vector<TrackPoint>& tracks,
                                            const DatasetSpec& spec, int stride) {
    if (stride < 1) throw config_error("window stride must be >= 1, got " + std::to_string(stride));
    if (spec.t_in < 2 || spec.t_out < 1)
        throw config_error("dataset spec needs t_in >= 2 and t_out >= 1, got t_in=" +
                           std::to_string(spec.t_in) + " t_out=" + std::to_string(spec.t_out));
    const std::int64_t gap = frame_stride(spec.native_fps, spec.target_fps);
    const int span = spec.t_in + spec.t_out;

    std::vector<TrackPoint> sorted = tracks;
    std::sort(sorted.begin(), sorted.end(), [](const TrackPoint& a, const TrackPoint& b) {
        if (a.subject_id != b.subject_id) return a.subject_id < b.subject_id;
        return a.frame_id < b.frame_id;
    });

    std::vector<TrajectoryWindow> windows;
    std::size_t seg_begin = 0;
    while (seg_begin < sorted.size()) {
        std::size_t seg_end = seg_begin;
        while (seg_end < sorted.size() &&
               sorted[seg_end].subject_id == sorted[seg_begin].subject_id)
            ++seg_end;
        const std::size_t len = seg_end - seg_begin;
        for (std::size_t start = 0; len >= static_cast<std::size_t>(span) &&
                                    start + span <= len; start += stride) {
            bool consecutive = true;
            for (int k = 1; k < span; ++k) {
                if (sorted[seg_begin + start + k].frame_id -
                        sorted[seg_begin + start + k - 1].frame_id != gap) {
                    consecutive = false;
                    break;
                }
            }
            if (!consecutive) continue;
            TrajectoryWindow w;
            w.subject_id = sorted[seg_begin].subject_id;
            w.anchor_frame = sorted[seg_begin + start + spec.t_in - 1].frame_id;
            w.observed.reserve(spec.t_in);
            for (int k = 0; k < spec.t_in; ++k) {
                const auto& p = sorted[seg_begin + start + k];
                w.observed.push_back({p.x, p.y});
            }
            w.future.reserve(spec.t_out);
            for (int k = 0; k < spec.t_out; ++k) {
                const auto& p = sorted[seg_begin + start + spec.t_in + k];
                w.future.push_back({p.x, p.y});
            }
            recompute_relative(w);
            windows.push_back(std::move(w));
        }
        seg_begin = seg_end;
    }
    return windows;
}

std::vector<FrameSample> group_frames(std::vector<TrajectoryWindow> windows) {
    std::map<std::int64_t, std::vector<TrajectoryWindow>> buckets;
    for (auto& w : windows) buckets[w.anchor_frame].push_back(std::move(w));

    std::vector<FrameSample> frames;
    frames.reserve(buckets.size());
    for (auto& [anchor, bucket] : buckets) {
        std::sort(bucket.begin(), bucket.end(),
                  [](const TrajectoryWindow& a, const TrajectoryWindow& b) {
                      return a.subject_id < b.subject_id;
                  });
        // Centroid of last observed positions, summed in value order so the
        // offset is identical for any subject ordering.
        std::vector<double> xs(bucket.size()), ys(bucket.size());
        for (std::size_t i = 0; i < bucket.size(); ++i) {
            xs[i] = bucket[i].observed.back().x;
            ys[i] = bucket[i].observed.back().y;
        }
        const auto n = static_cast<double>(bucket.size());
        const Vec2 offset{multiset_sum(xs) / n, multiset_sum(ys) / n};
        for (auto& w : bucket) {
            for (auto& p : w.observed) p = p - offset;
            for (auto& p : w.future) p = p - offset;
            recompute_relative(w);
        }
        FrameSample f;
        f.anchor_frame = anchor;
        f.windows = std::move(bucket);
        f.normalization_offset = offset;
        frames.push_back(std::move(f));
    }
    return frames;
}

SplitResult split_dataset(const std::vector<FrameSample>& samples, SplitRatios ratios) {
    for (double r : {ratios.train, ratios.val, ratios.test}) {
        if (!(r >= 0.0 && r <= 1.0))
            throw config_error("split fraction out of [0,1]: " + format_double(r));
    }
    const double total = ratios.train + ratios.val + ratios.test;
    if (std::fabs(total - 1.0) > 1e-9)
        throw config_error("split fractions " + format_double(ratios.train) + "/" +
                           format_double(ratios.val) + "/" + format_double(ratios.test) +
                           " sum to " + format_double(total) + ", expected 1");
    std::vector<FrameSample> ordered = samples;
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const FrameSample& a, const FrameSample& b) {
                         return a.anchor_frame < b.anchor_frame;
                     });
    const auto n = static_cast<std::int64_t>(ordered.size());
    auto n_train = std::llround(static_cast<double>(n) * ratios.train);
    auto n_train_val = std::llround(static_cast<double>(n) * (ratios.train + ratios.val));
    n_train = std::clamp<std::int64_t>(n_train, 0, n);
    n_train_val = std::clamp<std::int64_t>(n_train_val, n_train, n);
    SplitResult out;
    out.train.assign(ordered.begin(), ordered.begin() + n_train);
    out.val.assign(ordered.begin() + n_train, ordered.begin() + n_train_val);
    out.test.assign(ordered.begin() + n_train_val, ordered.end());
    return out;
}

SplitResult split_leave_one_out(const std::vector<Scene>& scenes, const std::string& held_out) {
    const Scene* held = nullptr;
    for (const auto& s : scenes) {
        if (s.name == held_out) held = &s;
    }
    if (!held) {
        std::string names;
        for (const auto& s : scenes) {
            if (!names.empty()) names += ", ";
            names += s.name;
        }
        throw config_error("unknown scene \"" + held_out + "\" (have: " + names + ")");
    }
    SplitResult out;
    for (const auto& s : scenes) {
        if (&s == held) continue;
        out.train.insert(out.train.end(), s.frames.begin(), s.frames.end());
    }
    out.test = held->frames;
    return out;
}

SceneKind scene_kind_from_name(const std::string& name) {
    if (name == "constant_velocity") return SceneKind::constant_velocity;
    if (name == "turning") return SceneKind::turning;
    if (name == "crossing") return SceneKind::crossing;
    throw config_error("unknown scene kind: " + name +
                       " (expected constant_velocity, turning, or crossing)");
}

std::vector<TrackPoint> straight_track(std::int64_t subject_id, Vec2 start, Vec2 velocity,
                                       int n_frames, std::int64_t first_frame,
                                       std::int64_t frame_gap) {
    std::vector<TrackPoint> t;
    t.reserve(n_frames);
    for (int k = 0; k < n_frames; ++k)
        t.push_back({first_frame + k * frame_gap, subject_id,
                     start.x + k * velocity.x, start.y + k * velocity.y});
    return t;
}

std::vector<TrackPoint> synth_scene(SceneKind kind, int n_subjects, int n_frames,
                                    std::uint64_t seed, double noise) {
    if (n_subjects < 1)
        throw config_error("synth_scene needs n_subjects >= 1, got " + std::to_string(n_subjects));
    if (n_frames < 1)
        throw config_error("synth_scene needs n_frames >= 1, got " + std::to_string(n_frames));
    if (noise < 0.0) throw config_error("synth_scene noise must be >= 0");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(-20.0, 20.0);
    std::uniform_real_distribution<double> speed(0.5, 2.0);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.14159265358979323846);
    std::uniform_real_distribution<double> turn(0.05, 0.25);
    std::uniform_real_distribution<double> cross_jitter(-0.3, 0.3);
    std::normal_distribution<double> jitter(0.0, noise > 0.0 ? noise : 1.0);

    std::vector<TrackPoint> tracks;
    tracks.reserve(static_cast<std::size_t>(n_subjects) * n_frames);
    auto emit = [&](std::int64_t subject, int frame, Vec2 p) {
        if (noise > 0.0) {
            p.x += jitter(rng);
            p.y += jitter(rng);
        }
        tracks.push_back({frame, subject, p.x, p.y});
    };

    if (kind == SceneKind::constant_velocity) {
        for (int s = 0; s < n_subjects; ++s) {
            const Vec2 start{pos(rng), pos(rng)};
            const double sp = speed(rng), h = angle(rng);
            const Vec2 v{sp * std::cos(h), sp * std::sin(h)};
            for (int k = 0; k < n_frames; ++k)
                emit(s, k, {start.x + k * v.x, start.y + k * v.y});
        }
    } else if (kind == SceneKind::turning) {
        for (int s = 0; s < n_subjects; ++s) {
            Vec2 p{pos(rng), pos(rng)};
            const double sp = speed(rng), h = angle(rng);
            const double omega = (rng() % 2 == 0 ? 1.0 : -1.0) * turn(rng);
            Vec2 v{sp * std::cos(h), sp * std::sin(h)};
            for (int k = 0; k < n_frames; ++k) {
                emit(s, k, p);
                p = p + v;
                v = rotate(v, omega);
            }
        }
    } else {  // crossing
        const int kc = n_frames / 2;
        for (int s = 0; s < n_subjects; s += 2) {
            const Vec2 c{pos(rng) * 0.5, pos(rng) * 0.5};
            const double ha = angle(rng);
            const double hb = ha + 3.14159265358979323846 / 2.0 + cross_jitter(rng);
            const double sa = speed(rng), sb = speed(rng);
            const Vec2 va{sa * std::cos(ha), sa * std::sin(ha)};
            const Vec2 vb{sb * std::cos(hb), sb * std::sin(hb)};
            for (int k = 0; k < n_frames; ++k)
                emit(s, k, {c.x + (k - kc) * va.x, c.y + (k - kc) * va.y});
            if (s + 1 < n_subjects) {
                for (int k = 0; k < n_frames; ++k)
                    emit(s + 1, k, {c.x + (k - kc) * vb.x, c.y + (k - kc) * vb.y});
            }
        }
    }
    std::sort(tracks.begin(), tracks.end(), [](const TrackPoint& a, const TrackPoint& b) {
        if (a.subject_id != b.subject_id) return a.subject_id < b.subject_id;
        return a.frame_id < b.frame_id;
    });
    return tracks;
}

void save_cache(const std::string& path, const DatasetSpec& spec,
                const std::vector<FrameSample>& samples) {
    CacheWriter w(path);
    w.bytes(kCacheMagic, 4);
    w.u32(kCacheVersion);
    w.str(spec.name);
    w.u32(static_cast<std::uint32_t>(spec.domain));
    w.u32(static_cast<std::uint32_t>(spec.units));
    w.f64(spec.native_fps);
    w.f64(spec.target_fps);
    w.u32(static_cast<std::uint32_t>(spec.t_in));
    w.u32(static_cast<std::uint32_t>(spec.t_out));
    w.u64(samples.size());
    for (const auto& f : samples) {
        w.i64(f.anchor_frame);
        w.f64(f.normalization_offset.x);
        w.f64(f.normalization_offset.y);
        w.u64(f.windows.size());
        for (const auto& win : f.windows) {
            w.i64(win.subject_id);
            w.i64(win.anchor_frame);
            w.u64(win.observed.size());
            for (Vec2 p : win.observed) {
                w.f64(p.x);
                w.f64(p.y);
            }
            w.u64(win.future.size());
            for (Vec2 p : win.future) {
                w.f64(p.x);
                w.f64(p.y);
            }
        }
    }
    w.out.flush();
    if (!w.out) throw io_error("failed writing cache file: " + path);
}

std::pair<DatasetSpec, std::vector<FrameSample>> load_cache(const std::string& path) {
    CacheReader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::string(magic, 4) != std::string(kCacheMagic, 4))
        throw io_error(path + ": not a dataset cache file");
    const auto version = r.u32();
    if (version != kCacheVersion)
        throw io_error(path + ": cache format version " + std::to_string(version) +
                       ", expected " + std::to_string(kCacheVersion));
    DatasetSpec spec;
    spec.name = r.str();
    spec.domain = static_cast<Domain>(r.u32());
    spec.units = static_cast<Units>(r.u32());
    spec.native_fps = r.f64();
    spec.target_fps = r.f64();
    spec.t_in = static_cast<int>(r.u32());
    spec.t_out = static_cast<int>(r.u32());
    const auto n_frames = r.u64();
    std::vector<FrameSample> samples;
    samples.reserve(n_frames);
    for (std::uint64_t i = 0; i < n_frames; ++i) {
        FrameSample f;
        f.anchor_frame = r.i64();
        f.normalization_offset.x = r.f64();
        f.normalization_offset.y = r.f64();
        const auto n_windows = r.u64();
        f.windows.reserve(n_windows);
        for (std::uint64_t j = 0; j < n_windows; ++j) {
            TrajectoryWindow win;
            win.subject_id = r.i64();
            win.anchor_frame = r.i64();
            const auto n_obs = r.u64();
            win.observed.resize(n_obs);
            for (auto& p : win.observed) {
                p.x = r.f64();
                p.y = r.f64();
            }
            const auto n_fut = r.u64();
            win.future.resize(n_fut);
            for (auto& p : win.future) {
                p.x = r.f64();
                p.y = r.f64();
            }
            recompute_relative(win);
            f.windows.push_back(std::move(win));
        }
        samples.push_back(std::move(f));
    }
    return {spec, samples};
}

}  // namespace trajkit::data
