#pragma once

#include "evspec/types.hpp"

namespace evspec {

// Turbo-style colormap over the valid depth range; invalid pixels black.
ImageRGB render_depth_colormap(const DepthMap& depth);

// Branches red, foliage blue, 50% alpha over the RGB image.
ImageRGB render_overlay(const ImageRGB& rgb, const LabelMap& labels);

}  // namespace evspec
