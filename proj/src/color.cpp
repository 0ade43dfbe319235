#include "evspec/color.hpp"

#include <algorithm>
#include <cmath>

namespace evspec {

double srgb_to_linear(std::uint8_t v) {
    const double c = v / 255.0;
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

std::uint8_t linear_to_srgb(double v) {
    v = std::clamp(v, 0.0, 1.0);
    const double c = v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
    return std::uint8_t(std::lround(c * 255.0));
}

namespace {

// sRGB D65 primaries.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};
// Reference white: the matrix image of RGB (1,1,1), i.e. D65 to the
// matrix's own precision, so pure white maps to L*=100, a*=b*=0 exactly.
constexpr double kWhite[3] = {
    kRgbToXyz[0][0] + kRgbToXyz[0][1] + kRgbToXyz[0][2],
    kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2],
    kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2],
};

double lab_f(double t) {
    constexpr double d = 6.0 / 29.0;
    return t > d * d * d ? std::cbrt(t) : t / (3 * d * d) + 4.0 / 29.0;
}

}  // namespace

Lab srgb_to_lab(Rgb8 c) {
    const double rgb[3] = {srgb_to_linear(c.r), srgb_to_linear(c.g), srgb_to_linear(c.b)};
    double xyz[3];
    for (int i = 0; i < 3; ++i)
        xyz[i] = kRgbToXyz[i][0] * rgb[0] + kRgbToXyz[i][1] * rgb[1] + kRgbToXyz[i][2] * rgb[2];
    const double fx = lab_f(xyz[0] / kWhite[0]);
    const double fy = lab_f(xyz[1] / kWhite[1]);
    const double fz = lab_f(xyz[2] / kWhite[2]);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

double delta_e76(const Lab& a, const Lab& b) {
    const double dL = a.L - b.L, da = a.a - b.a, db = a.b - b.b;
    return std::sqrt(dL * dL + da * da + db * db);
}

double delta_e76(Rgb8 a, Rgb8 b) { return delta_e76(srgb_to_lab(a), srgb_to_lab(b)); }

}  // namespace evspec
