#pragma once

#include <array>

#include "evspec/types.hpp"

namespace evspec {

// IEC 61966-2-1 transfer function.
double srgb_to_linear(std::uint8_t v);
std::uint8_t linear_to_srgb(double v);  // clamps to [0,1], rounds to nearest

struct Lab {
    double L = 0, a = 0, b = 0;
};

// sRGB (8-bit) -> linear -> XYZ (D65) -> CIE 1976 L*a*b* (D65 white).
Lab srgb_to_lab(Rgb8 c);

// Euclidean distance in L*a*b*.
double delta_e76(Rgb8 a, Rgb8 b);
double delta_e76(const Lab& a, const Lab& b);

}  // namespace evspec
