#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "evspec/projector.hpp"
#include "evspec/scene.hpp"
#include "evspec/sensor.hpp"
#include "evspec/spectral.hpp"

namespace evspec {

// Config validation failure; message carries the offending field path.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Pipeline { depth, rgb, spectral, segment, all };

struct SceneSpec {
    std::string builtin;                       // plane | step | chart | wedge | forest | board
    std::optional<std::filesystem::path> file; // alternative: scene manifest on disk
    double depth_m = 1.0;
    double depth_far_m = 1.5;
    int width = 640;
    int height = 480;
    std::vector<double> reflectances;          // wedge steps
};

struct RunConfig {
    int schema = 1;
    Pipeline pipeline = Pipeline::depth;
    std::uint64_t seed = 0;
    SceneSpec scene;
    RigGeometry rig;
    ProjectorConfig projector;
    SensorConfig sensor;
    SweepPlan sweep;
    double duration_s = 0.0;  // 0 = pipeline default
    std::filesystem::path out_dir = "out";
    int forest_train_scenes = 6;
    int forest_test_scenes = 3;
};

RunConfig parse_run_config(const std::filesystem::path& path);

// Cross-field checks beyond parsing; throws ConfigError naming the field.
void validate_run_config(const RunConfig& cfg);

SceneModel build_scene(const RunConfig& cfg);

}  // namespace evspec
