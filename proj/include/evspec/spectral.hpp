#pragma once

#include <vector>

#include "evspec/color.hpp"
#include "evspec/scene.hpp"
#include "evspec/sensor.hpp"
#include "evspec/types.hpp"

namespace evspec {

enum class SweepParameter { diff_on_bias, pr_bias };

// Levels run from least to most strict: diff_on_bias strictly increasing,
// pr_bias strictly decreasing.
struct SweepPlan {
    SweepParameter parameter = SweepParameter::diff_on_bias;
    std::vector<double> levels;
    double duration_s = 0.5;  // capture time per level
    double wavelength_nm = kBandRedNm;

    void validate() const;
};

// Nonzero where the pixel emitted at least one ON event during a level.
using FiredMap = Image<std::uint8_t>;

SensorConfig apply_sweep_level(const SensorConfig& cfg, const SweepPlan& plan, std::size_t k);

std::vector<FiredMap> run_sweep(const SceneModel& scene, const RigGeometry& rig,
                                const ProjectorConfig& proj, const SensorConfig& cfg,
                                const SweepPlan& plan,
                                ExecutionPolicy policy = ExecutionPolicy::openmp);

// Per-level reflectance lookup: the dimmest calibration gray that still
// fires at each level, measured by sweeping a gray wedge under identical
// capture conditions.
std::vector<double> calibrate_sweep(const SweepPlan& plan, const ProjectorConfig& proj,
                                    const SensorConfig& cfg, double ambient_intensity,
                                    const std::vector<double>& gray_reflectances);

// Lower-bound reflectance: value of the strictest level at which the pixel
// still fired; 0 where it never fired.
ImageFloat reflectance_from_sweep(const std::vector<FiredMap>& fired_maps, const SweepPlan& plan,
                                  const std::vector<double>& calibration);

// Baseline: per-pixel ON-event count normalized by the mean count over the
// panel region (pixel indices into the image).
ImageFloat event_count_reflectance(const SimOutput& sim, const std::vector<int>& panel_region);

struct SpectralBand {
    double wavelength_nm;
    ImageFloat image;
};

struct SpectralCube {
    std::vector<SpectralBand> bands;
};

SpectralCube normalize_to_reference(const SpectralCube& cube, const std::vector<int>& panel_region,
                                    double panel_reflectance = 0.99);

std::vector<std::pair<double, double>> spectral_signature(const SpectralCube& cube,
                                                          const std::vector<int>& region);

// Stack three aligned linear band images, clamp to [0,1], quantize.
ImageRGB reconstruct_rgb(const ImageFloat& red, const ImageFloat& green, const ImageFloat& blue);

struct ColorCalibration {
    double gains[3] = {1, 1, 1};
    // Monotone piecewise-linear response knots per channel, (measured, truth)
    // on the 8-bit scale; linear interpolation, constant extrapolation.
    std::vector<std::pair<double, double>> curves[3];
};

// Mean color of a pixel rectangle, 8-bit scale.
std::array<double, 3> region_mean_color(const ImageRGB& image, const ChartLayout::Block& block);

// Per-channel gains from gray patches: mean over patches of truth/measured.
ImageRGB white_balance(const ImageRGB& image, const std::vector<ChartLayout::Block>& gray_patches,
                       const std::vector<double>& gray_truths, double gains_out[3]);

// Fits the per-channel monotone response curve from gray patches and
// applies it. Throws on non-monotone measured means.
ImageRGB linearize_curve(const ImageRGB& image, const std::vector<ChartLayout::Block>& gray_patches,
                         const std::vector<double>& gray_truths, ColorCalibration& calib_out);

enum class CorrectionStage { raw, wb, curve };

struct ChartErrorReport {
    CorrectionStage stage;
    double mean_delta_e = 0;       // mean Delta-E76 over chromatic blocks
    double rmse_mean = 0;          // RMSE over block-mean channel values
    double rmse_per_channel[3] = {0, 0, 0};
};

// Applies corrections up to `stage` (using the chart's gray strip) and
// scores the 16 chromatic blocks against their configured colors.
ChartErrorReport chart_error(const ImageRGB& reconstructed, const ChartLayout& layout,
                             CorrectionStage stage);

// Cube on disk: manifest JSON plus one PFM per band.
void save_cube(const SpectralCube& cube, const std::filesystem::path& dir,
               const std::string& stem);
SpectralCube load_cube(const std::filesystem::path& manifest_path);

}  // namespace evspec
