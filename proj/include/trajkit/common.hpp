#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace trajkit {

// Error taxonomy, mapped to CLI exit statuses: io_error -> 2,
// config_error -> 3, contract_error -> 4.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct contract_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
};

inline double norm2(Vec2 v) { return std::hypot(v.x, v.y); }

// Order-independent sum: accumulates the values in ascending order, so the
// result is a function of the multiset only. Used where node-permutation
// invariance must hold bit-for-bit (GIN totals, frame centroids).
inline double multiset_sum(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    double acc = 0.0;
    for (double v : sorted) acc += v;
    return acc;
}

inline bool all_finite(std::span<const double> values) {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

// Shortest round-trip-exact decimal form for doubles in text artifacts.
std::string format_double(double v);

std::string shape_string(const std::vector<int>& shape);

std::string trim(const std::string& s);

// `key = value` lines, `#` comments, blank lines skipped. Order preserved;
// a line without `=` is a config error naming the line number.
std::vector<std::pair<std::string, std::string>> parse_kv_text(const std::string& text,
                                                               const std::string& origin);
std::vector<std::pair<std::string, std::string>> parse_kv_file(const std::string& path);

}  // namespace trajkit
