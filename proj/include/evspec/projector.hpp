#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "evspec/scene.hpp"
#include "evspec/types.hpp"

namespace evspec {

enum class ProjectorMode { scanning, chopped };

struct ProjectorConfig {
    ProjectorMode mode = ProjectorMode::scanning;
    int width = 1920;
    int height = 720;
    double frame_rate_hz = 60.0;
    std::vector<double> wavelengths_nm = {kBandRedNm, kBandGreenNm, kBandBlueNm};
    double band_intensity = 1.0;  // I_p
    double chopper_rate_hz = 100.0;

    void validate() const;
    bool has_wavelength(double nm) const;
};

// Row-major point scan; one projector pixel lit per dwell interval.
struct ScanSchedule {
    double start_s = 0.0;
    int width = 1920;
    int height = 720;
    double dwell_s = 0.0;

    static ScanSchedule from_config(const ProjectorConfig& cfg, double start_s = 0.0);

    double frame_time_s() const { return dwell_s * width * height; }
    double time_of_pixel(int col, int row, long frame_index) const;
    // Inverse of time_of_pixel; wraps across frames.
    void scan_position_at(double t_s, int& col, int& row, long& frame_index) const;
};

// Camera-pixel -> projector-pixel correspondence for a heightfield scene,
// with projector-side z-buffer occlusion. Index -1 where unlit.
struct CorrespondenceMap {
    int cam_width = 0, cam_height = 0;
    std::vector<std::int32_t> proj_index;  // row * proj_width + col, or -1

    std::int32_t at(int x, int y) const { return proj_index[std::size_t(y) * cam_width + x]; }
};

CorrespondenceMap build_correspondence(const SceneModel& scene, const RigGeometry& rig,
                                       const ProjectorConfig& cfg);

// Projects a camera pixel with known depth into the projector image; no
// occlusion test. Returns false when outside the projector frustum.
bool project_to_projector(const RigGeometry& rig, double cam_x, double cam_y, double depth_m,
                          double& proj_col, double& proj_row);

// Pre-reflectance irradiance per camera pixel at time t.
ImageFloat irradiance(const SceneModel& scene, const RigGeometry& rig, const ProjectorConfig& cfg,
                      double t_s, double wavelength_nm);

// 50% duty square wave in {0,1}; on at the start of each period.
inline int chopper_state(double chopper_rate_hz, double t_s) {
    double phase = t_s * chopper_rate_hz;
    phase -= std::floor(phase);
    return phase < 0.5 ? 1 : 0;
}

}  // namespace evspec
