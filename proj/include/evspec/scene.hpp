#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evspec/types.hpp"

namespace evspec {

// Piecewise-linear reflectance curve over wavelength; constant extrapolation
// within +-kExtrapolationNm of the knot range.
class SpectralReflectance {
public:
    static constexpr double kExtrapolationNm = 50.0;

    SpectralReflectance(std::vector<std::pair<double, double>> samples);

    double sample(double wavelength_nm) const;
    const std::vector<std::pair<double, double>>& samples() const { return samples_; }

private:
    std::vector<std::pair<double, double>> samples_;  // (nm, reflectance)
};

struct Material {
    std::string name;
    SpectralReflectance reflectance;
};

struct PinholeModel {
    double focal_px = 500.0;
    double cx = 320.0;
    double cy = 240.0;
    int width = 640;
    int height = 480;
};

struct RigGeometry {
    PinholeModel camera;
    PinholeModel projector;
    double baseline_m = 0.1;  // projector displaced along +x
    bool rectified = true;
};

RigGeometry default_rig();

struct SceneModel {
    DepthMap depth_gt;                     // camera-aligned heightfield
    Image<std::uint8_t> material_map;      // index into materials
    std::vector<Material> materials;
    double ambient_intensity = 0.05;       // I_a, radiometric units, per band
    LabelMap labels;                       // ground-truth classes (may be empty)

    const Material& material_at(int x, int y) const {
        return materials[material_map.at(x, y)];
    }
};

double sample_reflectance(const Material& material, double wavelength_nm);

// Per-pixel T(lambda) via material lookup.
ImageFloat reflectance_image(const SceneModel& scene, double wavelength_nm);

// One point per valid pixel: X=(x-cx)Z/f, Y=(y-cy)Z/f, Z=depth.
PointCloud depth_to_pointcloud(const DepthMap& depth, const PinholeModel& pinhole);

// Chart layout: 4x4 chromatic blocks above a 6-patch gray strip, on a plane.
struct ChartLayout {
    struct Block {
        int x0, y0, x1, y1;  // half-open pixel rectangle
        Rgb8 srgb;           // configured target color
    };
    std::vector<Block> chromatic;  // 16 blocks
    std::vector<Block> grays;      // 6 patches, dark to bright
};

struct ChartScene {
    SceneModel scene;
    ChartLayout layout;
};

// Wavelengths used when turning chart colors into reflectance curves.
constexpr double kBandBlueNm = 450.0;
constexpr double kBandGreenNm = 520.0;
constexpr double kBandRedNm = 638.0;

ChartScene make_chart_scene(double depth_m = 1.0, int width = 640, int height = 480);

SceneModel make_plane_scene(double depth_m, int width = 640, int height = 480,
                            double reflectance = 0.7);

// Left half at depth_near, right half at depth_far (step edge at width/2).
SceneModel make_step_scene(double depth_near, double depth_far, int width = 640,
                           int height = 480);

// N-step reflectance wedge (vertical bands, dark to bright) on a plane.
SceneModel make_wedge_scene(const std::vector<double>& reflectances, double depth_m = 1.0,
                            int width = 640, int height = 480);

// Lab material board: reference panel plus sample swatches with full
// spectral curves over 650-850 nm; panel is the left strip.
struct MaterialBoard {
    SceneModel scene;
    std::vector<std::pair<std::string, std::vector<int>>> regions;  // name -> pixel indices
    std::vector<int> panel_region;
};
MaterialBoard make_material_board(int width = 640, int height = 480);

// Randomized leaf blobs and branch segments over background, with ground
// truth labels. Deterministic for a fixed seed.
SceneModel make_forest_scene(std::uint64_t seed, int width = 320, int height = 240);

// Scene file: JSON manifest referencing PFM depth + PGM material/label maps.
void save_scene(const SceneModel& scene, const std::filesystem::path& dir,
                const std::string& stem);
SceneModel load_scene(const std::filesystem::path& manifest_path);

}  // namespace evspec
