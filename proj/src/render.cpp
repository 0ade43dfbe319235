#include "evspec/render.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evspec {

namespace {

// Polynomial fit of the Turbo colormap (Google AI blog, 2019).
Rgb8 turbo(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const double r = 34.61 + t * (1172.33 + t * (-10793.56 + t * (33300.12 + t * (-38394.49 + t * 14825.05))));
    const double g = 23.31 + t * (557.33 + t * (1225.33 + t * (-3574.96 + t * (1073.77 + t * 707.56))));
    const double b = 27.2 + t * (3211.1 + t * (-15327.97 + t * (27814.0 + t * (-22569.18 + t * 6838.66))));
    auto q = [](double v) { return std::uint8_t(std::lround(std::clamp(v, 0.0, 255.0))); };
    return {q(r), q(g), q(b)};
}

}  // namespace

ImageRGB render_depth_colormap(const DepthMap& depth) {
    ImageRGB out(depth.width(), depth.height(), {0, 0, 0});
    float lo = std::numeric_limits<float>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < depth.values.size(); ++i)
        if (depth.mask.data[i]) {
            lo = std::min(lo, depth.values.data[i]);
            hi = std::max(hi, depth.values.data[i]);
        }
    if (!(lo <= hi)) return out;  // all invalid
    const double range = hi > lo ? double(hi) - lo : 1.0;
    for (std::size_t i = 0; i < depth.values.size(); ++i)
        if (depth.mask.data[i]) out.data[i] = turbo((depth.values.data[i] - lo) / range);
    return out;
}

ImageRGB render_overlay(const ImageRGB& rgb, const LabelMap& labels) {
    if (rgb.width != labels.width || rgb.height != labels.height)
        throw std::invalid_argument("overlay dimension mismatch");
    ImageRGB out = rgb;
    for (std::size_t i = 0; i < out.size(); ++i) {
        Rgb8 tint;
        if (labels.data[i] == 1)
            tint = {0, 0, 255};  // foliage blue
        else if (labels.data[i] == 2)
            tint = {255, 0, 0};  // branches red
        else
            continue;
        out.data[i].r = std::uint8_t((out.data[i].r + tint.r) / 2);
        out.data[i].g = std::uint8_t((out.data[i].g + tint.g) / 2);
        out.data[i].b = std::uint8_t((out.data[i].b + tint.b) / 2);
    }
    return out;
}

}  // namespace evspec
