#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "evspec/config.hpp"

namespace evspec {

struct PipelineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MetricRow {
    std::string scene;
    std::string method;
    std::string metric;
    double value;
};

// Executes the configured pipeline, writing all artifacts under
// cfg.out_dir. Partial outputs are removed when the run fails.
void run_pipeline(const RunConfig& cfg);

// Sweep whose threshold levels interleave the analytic response amplitudes
// of the calibration grays, so each gray stops firing at a distinct level.
SweepPlan design_sweep(const std::vector<double>& gray_reflectances, double ambient,
                       double band_intensity, double chopper_rate_hz, const SensorConfig& cfg,
                       double wavelength_nm, double duration_s = 0.5);

// Default calibration gray ladder for sweep captures.
std::vector<double> default_calibration_grays();

// Deterministic noisy renders used by the segmentation pipeline.
ImageRGB render_scene_rgb(const SceneModel& scene, double noise_sigma, std::uint64_t seed);
DepthMap noisy_depth(const DepthMap& depth, double rel_sigma, std::uint64_t seed);

}  // namespace evspec
