#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace evspec {

// Serial path is the reference implementation; openmp must match it bit-exactly.
enum class ExecutionPolicy { serial, openmp };

// Timestamps are integer microseconds throughout.
using TimestampUs = std::int64_t;

struct Event {
    TimestampUs t = 0;
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    std::int8_t p = 1;  // +1 or -1

    friend bool operator==(const Event&, const Event&) = default;
};

// Canonical order: (t, y, x, p) ascending.
inline bool event_order(const Event& a, const Event& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.y != b.y) return a.y < b.y;
    if (a.x != b.x) return a.x < b.x;
    return a.p < b.p;
}

struct SensorGeometry {
    int width = 640;
    int height = 480;
    friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;
};

struct EventStream {
    SensorGeometry geometry;
    std::vector<Event> events;

    bool sorted() const {
        for (std::size_t i = 1; i < events.size(); ++i)
            if (event_order(events[i], events[i - 1])) return false;
        return true;
    }
    friend bool operator==(const EventStream&, const EventStream&) = default;
};

template <typename T>
struct Image {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Image() = default;
    Image(int w, int h, T fill = T{}) : width(w), height(h), data(std::size_t(w) * h, fill) {
        if (w <= 0 || h <= 0) throw std::invalid_argument("image dimensions must be positive");
    }

    T& at(int x, int y) { return data[std::size_t(y) * width + x]; }
    const T& at(int x, int y) const { return data[std::size_t(y) * width + x]; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    std::size_t size() const { return data.size(); }
    friend bool operator==(const Image&, const Image&) = default;
};

struct Rgb8 {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb8&, const Rgb8&) = default;
};

using ImageGray = Image<std::uint8_t>;
using ImageFloat = Image<float>;
using ImageRGB = Image<Rgb8>;
using LabelMap = Image<std::uint8_t>;  // 0 background, 1 leaves, 2 branches

// Metric depth in meters; mask nonzero where depth is valid.
struct DepthMap {
    ImageFloat values;
    Image<std::uint8_t> mask;

    DepthMap() = default;
    DepthMap(int w, int h) : values(w, h, 0.0f), mask(w, h, 0) {}

    int width() const { return values.width; }
    int height() const { return values.height; }
    bool valid(int x, int y) const { return mask.at(x, y) != 0; }
    void set(int x, int y, float z) {
        values.at(x, y) = z;
        mask.at(x, y) = 1;
    }
    friend bool operator==(const DepthMap&, const DepthMap&) = default;
};

struct Vec3 {
    double x = 0, y = 0, z = 0;
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

using PointCloud = std::vector<Vec3>;

}  // namespace evspec
