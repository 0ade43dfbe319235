#include "evspec/projector.hpp"

#include <limits>
#include <stdexcept>

namespace evspec {

void ProjectorConfig::validate() const {
    if (band_intensity < 0) throw std::invalid_argument("projector band_intensity must be >= 0");
    if (wavelengths_nm.empty()) throw std::invalid_argument("projector needs >= 1 wavelength");
    if (mode == ProjectorMode::scanning) {
        if (width <= 0 || height <= 0)
            throw std::invalid_argument("scanning mode requires a resolution");
        if (frame_rate_hz <= 0) throw std::invalid_argument("frame_rate must be > 0");
    } else {
        if (chopper_rate_hz <= 0) throw std::invalid_argument("chopped mode requires chopper_rate");
    }
}

bool ProjectorConfig::has_wavelength(double nm) const {
    for (double w : wavelengths_nm)
        if (w == nm) return true;
    return false;
}

ScanSchedule ScanSchedule::from_config(const ProjectorConfig& cfg, double start_s) {
    cfg.validate();
    ScanSchedule s;
    s.start_s = start_s;
    s.width = cfg.width;
    s.height = cfg.height;
    s.dwell_s = 1.0 / (cfg.frame_rate_hz * cfg.width * cfg.height);
    return s;
}

double ScanSchedule::time_of_pixel(int col, int row, long frame_index) const {
    if (col < 0 || col >= width || row < 0 || row >= height || frame_index < 0)
        throw std::out_of_range("scan schedule index out of range");
    return start_s + double(frame_index) * frame_time_s() + (double(row) * width + col) * dwell_s;
}

void ScanSchedule::scan_position_at(double t_s, int& col, int& row, long& frame_index) const {
    if (t_s < start_s) throw std::out_of_range("time before scan start");
    const double rel = (t_s - start_s) / dwell_s;
    const long long idx = (long long)(rel);
    const long long per_frame = (long long)(width)*height;
    frame_index = long(idx / per_frame);
    const long long in_frame = idx % per_frame;
    row = int(in_frame / width);
    col = int(in_frame % width);
}

bool project_to_projector(const RigGeometry& rig, double cam_x, double cam_y, double depth_m,
                          double& proj_col, double& proj_row) {
    // Rectified rig, projector displaced +x by the baseline.
    const double X = (cam_x - rig.camera.cx) * depth_m / rig.camera.focal_px;
    const double Y = (cam_y - rig.camera.cy) * depth_m / rig.camera.focal_px;
    proj_col = rig.projector.focal_px * (X - rig.baseline_m) / depth_m + rig.projector.cx;
    proj_row = rig.projector.focal_px * Y / depth_m + rig.projector.cy;
    return proj_col >= 0 && proj_col < rig.projector.width && proj_row >= 0 &&
           proj_row < rig.projector.height;
}

CorrespondenceMap build_correspondence(const SceneModel& scene, const RigGeometry& rig,
                                       const ProjectorConfig& cfg) {
    if (!rig.rectified) throw std::invalid_argument("correspondence requires a rectified rig");
    const int cw = scene.depth_gt.width(), ch = scene.depth_gt.height();
    CorrespondenceMap map;
    map.cam_width = cw;
    map.cam_height = ch;
    map.proj_index.assign(std::size_t(cw) * ch, -1);

    // Projector-side z-buffer. Camera pixels are splatted over their full
    // projector-space footprint (the projector may out-resolve the camera)
    // so a near surface shadows everything behind it, then each pixel's
    // center sample competes for its own projector pixel.
    std::vector<float> zbuf(std::size_t(cfg.width) * cfg.height,
                            std::numeric_limits<float>::infinity());
    std::vector<std::int32_t> winner(zbuf.size(), -1);

    const double scale_x = rig.projector.focal_px / rig.camera.focal_px;
    const double scale_y = scale_x;
    for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x) {
            if (!scene.depth_gt.valid(x, y)) continue;
            const float z = scene.depth_gt.values.at(x, y);
            double pc, pr;
            if (!project_to_projector(rig, x, y, z, pc, pr)) continue;
            const int c0 = std::max(0, int(std::lround(pc - 0.5 * scale_x)));
            const int c1 = std::min(cfg.width - 1, int(std::lround(pc + 0.5 * scale_x)));
            const int r0 = std::max(0, int(std::lround(pr - 0.5 * scale_y)));
            const int r1 = std::min(cfg.height - 1, int(std::lround(pr + 0.5 * scale_y)));
            for (int row = r0; row <= r1; ++row)
                for (int col = c0; col <= c1; ++col) {
                    const std::size_t pidx = std::size_t(row) * cfg.width + col;
                    if (z < zbuf[pidx]) zbuf[pidx] = z;
                }
        }

    std::vector<float> winner_z(zbuf.size(), std::numeric_limits<float>::infinity());
    for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x) {
            if (!scene.depth_gt.valid(x, y)) continue;
            const float z = scene.depth_gt.values.at(x, y);
            double pc, pr;
            if (!project_to_projector(rig, x, y, z, pc, pr)) continue;
            const int col = int(std::lround(pc)), row = int(std::lround(pr));
            if (col < 0 || col >= cfg.width || row < 0 || row >= cfg.height) continue;
            const std::size_t pidx = std::size_t(row) * cfg.width + col;
            if (z > zbuf[pidx] * (1.0f + 1e-3f)) continue;  // shadowed by a nearer surface
            if (z < winner_z[pidx]) {
                winner_z[pidx] = z;
                winner[pidx] = std::int32_t(y) * cw + x;
            }
        }

    for (std::size_t pidx = 0; pidx < winner.size(); ++pidx)
        if (winner[pidx] >= 0) map.proj_index[std::size_t(winner[pidx])] = std::int32_t(pidx);
    return map;
}

ImageFloat irradiance(const SceneModel& scene, const RigGeometry& rig, const ProjectorConfig& cfg,
                      double t_s, double wavelength_nm) {
    cfg.validate();
    if (!cfg.has_wavelength(wavelength_nm))
        throw std::invalid_argument("wavelength not configured on projector");
    const int cw = scene.depth_gt.width(), ch = scene.depth_gt.height();
    const float ambient = float(scene.ambient_intensity);
    ImageFloat out(cw, ch, ambient);

    if (cfg.mode == ProjectorMode::chopped) {
        if (chopper_state(cfg.chopper_rate_hz, t_s))
            for (float& v : out.data) v += float(cfg.band_intensity);
        return out;
    }

    const ScanSchedule sched = ScanSchedule::from_config(cfg);
    int col, row;
    long frame;
    sched.scan_position_at(t_s, col, row, frame);
    const std::int32_t lit = std::int32_t(row) * cfg.width + col;
    const CorrespondenceMap map = build_correspondence(scene, rig, cfg);
    for (std::size_t i = 0; i < map.proj_index.size(); ++i)
        if (map.proj_index[i] == lit) out.data[i] += float(cfg.band_intensity);
    return out;
}

}  // namespace evspec
