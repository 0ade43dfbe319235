// Benchmark: serial reference vs OpenMP simulator on the chopped plane scene.
#include <chrono>
#include <cstdio>

#include "evspec/sensor.hpp"

using namespace evspec;

namespace {

double run_once(const SceneModel& scene, const RigGeometry& rig, const ProjectorConfig& proj,
                const SensorConfig& cfg, double duration, ExecutionPolicy policy,
                SimOutput& out) {
    const auto t0 = std::chrono::steady_clock::now();
    out = simulate(scene, rig, proj, cfg, duration, proj.wavelengths_nm.front(), policy);
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main() {
    const SceneModel scene = make_plane_scene(1.0);
    const RigGeometry rig = default_rig();
    ProjectorConfig proj;
    proj.mode = ProjectorMode::chopped;
    proj.chopper_rate_hz = 100.0;
    SensorConfig cfg;
    cfg.kappa = 30.0;
    cfg.f_dark = 2.0;
    const double duration = 0.5;

    SimOutput serial_out, omp_out;
    const double t_serial =
        run_once(scene, rig, proj, cfg, duration, ExecutionPolicy::serial, serial_out);
    const double t_omp = run_once(scene, rig, proj, cfg, duration, ExecutionPolicy::openmp, omp_out);

    const bool identical = serial_out.stream == omp_out.stream;
    std::printf("pixel updates        : %llu\n",
                (unsigned long long)serial_out.pixel_updates);
    std::printf("events               : %zu\n", serial_out.stream.events.size());
    std::printf("serial               : %.3f s  (%.2f Mupdates/s)\n", t_serial,
                serial_out.pixel_updates / t_serial / 1e6);
    std::printf("openmp (%2d threads)  : %.3f s  (%.2f Mupdates/s)\n", max_threads(), t_omp,
                omp_out.pixel_updates / t_omp / 1e6);
    std::printf("speedup              : %.2fx\n", t_serial / t_omp);
    std::printf("streams identical    : %s\n", identical ? "yes" : "NO");
    return identical ? 0 : 1;
}
