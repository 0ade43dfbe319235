#include "evspec/depth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evspec {

std::vector<Correspondence> match_events(const EventStream& stream, const ScanSchedule& schedule,
                                         int polarity_filter) {
    if (!stream.sorted()) throw std::invalid_argument("event stream not sorted");
    std::vector<Correspondence> out;
    // Frame index of the last accepted correspondence per camera pixel.
    std::vector<long> last_frame(std::size_t(stream.geometry.width) * stream.geometry.height, -1);

    for (const Event& e : stream.events) {
        if (e.p != polarity_filter) continue;
        const double t_s = double(e.t) * 1e-6;
        if (t_s < schedule.start_s) throw std::invalid_argument("event before schedule start");
        int col, row;
        long frame;
        schedule.scan_position_at(t_s, col, row, frame);
        const std::size_t idx = std::size_t(e.y) * stream.geometry.width + e.x;
        if (last_frame[idx] == frame) continue;  // first event wins within a frame
        last_frame[idx] = frame;
        out.push_back({e.x, e.y, col, row, e.t});
    }
    return out;
}

std::optional<double> triangulate(const Correspondence& corr, const RigGeometry& rig) {
    if (!rig.rectified) throw std::invalid_argument("triangulation requires a rectified rig");
    // Projector column converted to camera-equivalent pixels.
    const double x_proj_ce =
        (corr.proj_col - rig.projector.cx) * rig.camera.focal_px / rig.projector.focal_px;
    const double x_cam = corr.cam_x - rig.camera.cx;
    const double disparity = x_cam - x_proj_ce;
    if (disparity <= 0) return std::nullopt;
    return rig.camera.focal_px * rig.baseline_m / disparity;
}

DepthMap reconstruct_depth(const EventStream& stream, const RigGeometry& rig,
                           const ScanSchedule& schedule, const ReconstructionOptions& opts) {
    DepthMap depth(stream.geometry.width, stream.geometry.height);
    for (const Correspondence& corr : match_events(stream, schedule, opts.polarity_filter)) {
        if (depth.valid(corr.cam_x, corr.cam_y)) continue;  // first frame's value kept
        if (auto z = triangulate(corr, rig); z && std::isfinite(*z) && *z > 0)
            depth.set(corr.cam_x, corr.cam_y, float(*z));
    }
    return median_filter(depth, opts.median_radius);
}

DepthMap median_filter(const DepthMap& depth, int radius, ExecutionPolicy policy) {
    if (radius < 0) throw std::invalid_argument("radius must be >= 0");
    if (radius == 0) return depth;
    const int w = depth.width(), h = depth.height();
    DepthMap out = depth;

    auto filter_row = [&](int y) {
        std::vector<float> window;
        window.reserve(std::size_t(2 * radius + 1) * (2 * radius + 1));
        for (int x = 0; x < w; ++x) {
            window.clear();
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    if (depth.valid(nx, ny)) window.push_back(depth.values.at(nx, ny));
                }
            if (window.size() < 3) continue;
            auto mid = window.begin() + window.size() / 2;
            std::nth_element(window.begin(), mid, window.end());
            float med = *mid;
            if (window.size() % 2 == 0) {
                // Even window: mean of the two middle elements.
                const float lo = *std::max_element(window.begin(), mid);
                med = (lo + med) / 2.0f;
            }
            if (depth.valid(x, y)) out.values.at(x, y) = med;
        }
    };

    if (policy == ExecutionPolicy::serial) {
        for (int y = 0; y < h; ++y) filter_row(y);
    } else {
#pragma omp parallel for schedule(static)
        for (int y = 0; y < h; ++y) filter_row(y);
    }
    return out;
}

}  // namespace evspec
