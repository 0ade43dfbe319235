#pragma once

#include <optional>
#include <vector>

#include "evspec/projector.hpp"
#include "evspec/scene.hpp"
#include "evspec/types.hpp"

namespace evspec {

struct Correspondence {
    std::uint16_t cam_x = 0, cam_y = 0;
    int proj_col = 0, proj_row = 0;
    TimestampUs t = 0;
};

// Maps each kept event to the projector pixel lit at its timestamp. Only
// events matching polarity_filter are kept; at most one correspondence per
// camera pixel per frame (first event wins).
std::vector<Correspondence> match_events(const EventStream& stream, const ScanSchedule& schedule,
                                         int polarity_filter = +1);

// Z = f_cam * baseline / disparity, disparity in camera-equivalent pixels.
// Returns nullopt for non-positive disparity.
std::optional<double> triangulate(const Correspondence& corr, const RigGeometry& rig);

struct ReconstructionOptions {
    int polarity_filter = +1;
    int median_radius = 1;
};

DepthMap reconstruct_depth(const EventStream& stream, const RigGeometry& rig,
                           const ScanSchedule& schedule,
                           const ReconstructionOptions& opts = {});

// Median over valid neighbors in a (2r+1)^2 window; pixels with fewer than
// 3 valid neighbors are left unchanged. radius 0 is the identity.
DepthMap median_filter(const DepthMap& depth, int radius,
                       ExecutionPolicy policy = ExecutionPolicy::openmp);

}  // namespace evspec
