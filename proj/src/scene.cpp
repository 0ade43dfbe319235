#include "evspec/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "evspec/color.hpp"
#include "evspec/io.hpp"

namespace evspec {

SpectralReflectance::SpectralReflectance(std::vector<std::pair<double, double>> samples)
    : samples_(std::move(samples)) {
    if (samples_.empty()) throw std::invalid_argument("reflectance curve needs >= 1 sample");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (samples_[i].second < 0 || samples_[i].second > 1)
            throw std::invalid_argument("reflectance outside [0,1]");
        if (i > 0 && samples_[i].first <= samples_[i - 1].first)
            throw std::invalid_argument("wavelengths must be strictly increasing");
    }
}

double SpectralReflectance::sample(double wavelength_nm) const {
    const double lo = samples_.front().first, hi = samples_.back().first;
    if (wavelength_nm < lo - kExtrapolationNm || wavelength_nm > hi + kExtrapolationNm)
        throw std::out_of_range("wavelength outside curve range");
    if (wavelength_nm <= lo) return samples_.front().second;
    if (wavelength_nm >= hi) return samples_.back().second;
    auto it = std::upper_bound(samples_.begin(), samples_.end(), wavelength_nm,
                               [](double w, const auto& s) { return w < s.first; });
    const auto& [w1, r1] = *it;
    const auto& [w0, r0] = *(it - 1);
    const double u = (wavelength_nm - w0) / (w1 - w0);
    return r0 + u * (r1 - r0);
}

double sample_reflectance(const Material& material, double wavelength_nm) {
    return material.reflectance.sample(wavelength_nm);
}

RigGeometry default_rig() {
    RigGeometry rig;
    rig.camera = {500.0, 320.0, 240.0, 640, 480};
    rig.projector = {1000.0, 960.0, 360.0, 1920, 720};
    rig.baseline_m = 0.1;
    rig.rectified = true;
    return rig;
}

ImageFloat reflectance_image(const SceneModel& scene, double wavelength_nm) {
    ImageFloat out(scene.material_map.width, scene.material_map.height);
    // One lookup per material, not per pixel.
    std::vector<float> table(scene.materials.size());
    for (std::size_t i = 0; i < scene.materials.size(); ++i)
        table[i] = float(scene.materials[i].reflectance.sample(wavelength_nm));
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = table[scene.material_map.data[i]];
    return out;
}

PointCloud depth_to_pointcloud(const DepthMap& depth, const PinholeModel& pinhole) {
    PointCloud cloud;
    for (int y = 0; y < depth.height(); ++y)
        for (int x = 0; x < depth.width(); ++x) {
            if (!depth.valid(x, y)) continue;
            const double z = depth.values.at(x, y);
            cloud.push_back({(x - pinhole.cx) * z / pinhole.focal_px,
                             (y - pinhole.cy) * z / pinhole.focal_px, z});
        }
    return cloud;
}

namespace {

SpectralReflectance flat_curve(double r) {
    return SpectralReflectance({{400.0, r}, {900.0, r}});
}

// Visible knots from an sRGB color plus a flat near-infrared tail.
SpectralReflectance rgb_curve(Rgb8 c, double nir = -1.0) {
    const double r = srgb_to_linear(c.r), g = srgb_to_linear(c.g), b = srgb_to_linear(c.b);
    if (nir < 0) nir = r;
    return SpectralReflectance(
        {{kBandBlueNm, b}, {kBandGreenNm, g}, {kBandRedNm, r}, {700.0, nir}, {900.0, nir}});
}

void fill_rect(SceneModel& scene, int x0, int y0, int x1, int y1, std::uint8_t mat) {
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) scene.material_map.at(x, y) = mat;
}

SceneModel blank_scene(int width, int height, double depth_m, Material base) {
    SceneModel scene;
    scene.depth_gt = DepthMap(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) scene.depth_gt.set(x, y, float(depth_m));
    scene.material_map = Image<std::uint8_t>(width, height, 0);
    scene.materials.push_back(std::move(base));
    return scene;
}

}  // namespace

SceneModel make_plane_scene(double depth_m, int width, int height, double reflectance) {
    return blank_scene(width, height, depth_m, {"plane", flat_curve(reflectance)});
}

SceneModel make_step_scene(double depth_near, double depth_far, int width, int height) {
    SceneModel scene = blank_scene(width, height, depth_near, {"near", flat_curve(0.7)});
    scene.materials.push_back({"far", flat_curve(0.7)});
    for (int y = 0; y < height; ++y)
        for (int x = width / 2; x < width; ++x) {
            scene.depth_gt.set(x, y, float(depth_far));
            scene.material_map.at(x, y) = 1;
        }
    return scene;
}

SceneModel make_wedge_scene(const std::vector<double>& reflectances, double depth_m, int width,
                            int height) {
    if (reflectances.empty()) throw std::invalid_argument("wedge needs >= 1 step");
    SceneModel scene = blank_scene(width, height, depth_m, {"step0", flat_curve(reflectances[0])});
    for (std::size_t i = 1; i < reflectances.size(); ++i)
        scene.materials.push_back({"step" + std::to_string(i), flat_curve(reflectances[i])});
    const int band = width / int(reflectances.size());
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            int i = std::min(int(reflectances.size()) - 1, x / band);
            scene.material_map.at(x, y) = std::uint8_t(i);
        }
    return scene;
}

ChartScene make_chart_scene(double depth_m, int width, int height) {
    // 16 colors distributed over the sRGB gamut (Macbeth-like selection).
    const Rgb8 colors[16] = {
        {115, 82, 68},  {194, 150, 130}, {98, 122, 157},  {87, 108, 67},
        {133, 128, 177}, {103, 189, 170}, {214, 126, 44},  {80, 91, 166},
        {193, 90, 99},  {94, 60, 108},   {157, 188, 64},  {224, 163, 46},
        {56, 61, 150},  {70, 148, 73},   {175, 54, 60},   {231, 199, 31},
    };
    const std::uint8_t gray_levels[6] = {52, 85, 122, 160, 200, 243};

    ChartScene chart;
    chart.scene = blank_scene(width, height, depth_m, {"border", flat_curve(0.2)});

    const int margin_x = width / 10, margin_y = height / 12;
    const int grid_w = width - 2 * margin_x;
    const int block_w = grid_w / 4;
    const int block_h = (height * 2 / 3 - margin_y) / 4;
    const int pad = 4;

    for (int i = 0; i < 16; ++i) {
        const int gx = i % 4, gy = i / 4;
        ChartLayout::Block b;
        b.x0 = margin_x + gx * block_w + pad;
        b.y0 = margin_y + gy * block_h + pad;
        b.x1 = margin_x + (gx + 1) * block_w - pad;
        b.y1 = margin_y + (gy + 1) * block_h - pad;
        b.srgb = colors[i];
        chart.scene.materials.push_back({"block" + std::to_string(i), rgb_curve(colors[i])});
        fill_rect(chart.scene, b.x0, b.y0, b.x1, b.y1,
                  std::uint8_t(chart.scene.materials.size() - 1));
        chart.layout.chromatic.push_back(b);
    }

    const int strip_y0 = margin_y + 4 * block_h + margin_y / 2;
    const int strip_h = height - strip_y0 - margin_y;
    const int patch_w = grid_w / 6;
    for (int i = 0; i < 6; ++i) {
        ChartLayout::Block b;
        b.x0 = margin_x + i * patch_w + pad;
        b.y0 = strip_y0 + pad;
        b.x1 = margin_x + (i + 1) * patch_w - pad;
        b.y1 = strip_y0 + strip_h - pad;
        const std::uint8_t g = gray_levels[i];
        b.srgb = {g, g, g};
        chart.scene.materials.push_back(
            {"gray" + std::to_string(i), flat_curve(srgb_to_linear(g))});
        fill_rect(chart.scene, b.x0, b.y0, b.x1, b.y1,
                  std::uint8_t(chart.scene.materials.size() - 1));
        chart.layout.grays.push_back(b);
    }
    return chart;
}

MaterialBoard make_material_board(int width, int height) {
    using S = std::vector<std::pair<double, double>>;
    // Curves sampled at the six 650-850 nm band centers.
    const std::vector<std::pair<std::string, S>> samples = {
        {"panel", {{650, 0.99}, {690, 0.99}, {730, 0.99}, {770, 0.99}, {810, 0.99}, {850, 0.99}}},
        {"branch", {{650, 0.28}, {690, 0.31}, {730, 0.35}, {770, 0.38}, {810, 0.40}, {850, 0.42}}},
        {"leaf", {{650, 0.08}, {690, 0.12}, {730, 0.42}, {770, 0.47}, {810, 0.49}, {850, 0.50}}},
        {"foam", {{650, 0.82}, {690, 0.83}, {730, 0.84}, {770, 0.84}, {810, 0.85}, {850, 0.85}}},
        {"plaster", {{650, 0.70}, {690, 0.71}, {730, 0.72}, {770, 0.72}, {810, 0.73}, {850, 0.73}}},
        {"wood", {{650, 0.45}, {690, 0.48}, {730, 0.52}, {770, 0.55}, {810, 0.58}, {850, 0.60}}},
        {"cork", {{650, 0.50}, {690, 0.51}, {730, 0.52}, {770, 0.53}, {810, 0.53}, {850, 0.54}}},
        {"plastic", {{650, 0.33}, {690, 0.32}, {730, 0.32}, {770, 0.31}, {810, 0.31}, {850, 0.30}}},
    };

    MaterialBoard board;
    board.scene = blank_scene(width, height, 1.0,
                              {"backdrop", SpectralReflectance({{650, 0.02}, {850, 0.02}})});
    const int n = int(samples.size());
    const int col_w = width / n;
    for (int i = 0; i < n; ++i) {
        board.scene.materials.push_back({samples[i].first, SpectralReflectance(samples[i].second)});
        const std::uint8_t mat = std::uint8_t(board.scene.materials.size() - 1);
        const int x0 = i * col_w + 8, x1 = (i + 1) * col_w - 8;
        fill_rect(board.scene, x0, height / 4, x1, height * 3 / 4, mat);
        std::vector<int> region;
        for (int y = height / 4 + 4; y < height * 3 / 4 - 4; ++y)
            for (int x = x0 + 4; x < x1 - 4; ++x) region.push_back(y * width + x);
        if (i == 0)
            board.panel_region = std::move(region);
        else
            board.regions.emplace_back(samples[i].first, std::move(region));
    }
    return board;
}

SceneModel make_forest_scene(std::uint64_t seed, int width, int height) {
    std::mt19937_64 rng(seed);
    auto uni = [&](double a, double b) {
        return a + (b - a) * (double(rng() >> 11) * 0x1.0p-53);
    };

    SceneModel scene = blank_scene(width, height, 3.0,
                                   {"background", rgb_curve({18, 22, 26}, 0.03)});
    scene.materials.push_back({"leaf_green", rgb_curve({52, 120, 40}, 0.45)});
    scene.materials.push_back({"leaf_brown", rgb_curve({118, 82, 46}, 0.44)});
    scene.materials.push_back({"bark", rgb_curve({120, 84, 48}, 0.40)});
    const std::uint8_t kGreen = 1, kBrown = 2, kBark = 3;

    scene.labels = LabelMap(width, height, 0);

    // Undulating background depth that overlaps the leaf range, so absolute
    // depth alone is a weak class cue.
    {
        const double kx = uni(0.02, 0.06), ky = uni(0.02, 0.06), phi = uni(0.0, 6.28);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                scene.depth_gt.set(x, y,
                                   float(2.2 + 0.5 * (1.0 + std::sin(kx * x + ky * y + phi))));
    }

    // Branches: thin oriented bars in the near range.
    const int n_branches = 6 + int(rng() % 4);
    for (int i = 0; i < n_branches; ++i) {
        const double cx = uni(0.1, 0.9) * width, cy = uni(0.1, 0.9) * height;
        const double angle = uni(0, 3.14159), len = uni(0.25, 0.6) * width;
        const double half_t = uni(1.2, 2.6);
        const double z = uni(1.4, 1.9);
        const double dx = std::cos(angle), dy = std::sin(angle);
        for (double s = -len / 2; s <= len / 2; s += 0.5) {
            const int px = int(cx + s * dx), py = int(cy + s * dy);
            for (int oy = -int(half_t) - 1; oy <= int(half_t) + 1; ++oy)
                for (int ox = -int(half_t) - 1; ox <= int(half_t) + 1; ++ox) {
                    const int x = px + ox, y = py + oy;
                    if (!scene.material_map.in_bounds(x, y)) continue;
                    if (ox * ox + oy * oy > half_t * half_t + 1) continue;
                    scene.material_map.at(x, y) = kBark;
                    scene.depth_gt.set(x, y, float(z));
                    scene.labels.at(x, y) = 2;
                }
        }
    }

    // Leaves: elliptical blobs further back; some brown (RGB-confusable with bark).
    const int n_leaves = 35 + int(rng() % 10);
    for (int i = 0; i < n_leaves; ++i) {
        const double cx = uni(0.05, 0.95) * width, cy = uni(0.05, 0.95) * height;
        const double rx = uni(5, 14), ry = uni(4, 10);
        const double angle = uni(0, 3.14159);
        const double z = uni(1.9, 2.4);
        const bool brown = uni(0, 1) < 0.3;
        const double ca = std::cos(angle), sa = std::sin(angle);
        for (int y = int(cy - rx - ry); y <= int(cy + rx + ry); ++y)
            for (int x = int(cx - rx - ry); x <= int(cx + rx + ry); ++x) {
                if (!scene.material_map.in_bounds(x, y)) continue;
                const double u = (x - cx) * ca + (y - cy) * sa;
                const double v = -(x - cx) * sa + (y - cy) * ca;
                if ((u * u) / (rx * rx) + (v * v) / (ry * ry) > 1.0) continue;
                scene.material_map.at(x, y) = brown ? kBrown : kGreen;
                scene.depth_gt.set(x, y, float(z + 0.05 * std::sin(0.3 * u)));
                scene.labels.at(x, y) = 1;
            }
    }
    return scene;
}

void save_scene(const SceneModel& scene, const std::filesystem::path& dir,
                const std::string& stem) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    write_pfm(scene.depth_gt.values, dir / (stem + "_depth.pfm"));
    write_pgm(scene.depth_gt.mask, dir / (stem + "_depth_mask.pgm"));
    write_pgm(scene.material_map, dir / (stem + "_materials.pgm"));
    const bool has_labels = scene.labels.width > 0;
    if (has_labels) write_pgm(scene.labels, dir / (stem + "_labels.pgm"));

    nlohmann::json j;
    j["schema"] = 1;
    j["depth"] = stem + "_depth.pfm";
    j["depth_mask"] = stem + "_depth_mask.pgm";
    j["material_map"] = stem + "_materials.pgm";
    if (has_labels) j["labels"] = stem + "_labels.pgm";
    j["ambient_intensity"] = scene.ambient_intensity;
    for (const Material& m : scene.materials) {
        nlohmann::json jm;
        jm["name"] = m.name;
        for (auto [w, r] : m.reflectance.samples()) jm["samples"].push_back({w, r});
        j["materials"].push_back(jm);
    }
    std::ofstream f(dir / (stem + ".scene.json"));
    f << j.dump(2) << '\n';
    if (!f) throw IoError("write failed: " + (dir / (stem + ".scene.json")).string());
}

SceneModel load_scene(const std::filesystem::path& manifest_path) {
    std::ifstream f(manifest_path);
    if (!f) throw IoError("cannot open scene manifest: " + manifest_path.string());
    nlohmann::json j = nlohmann::json::parse(f);
    const auto dir = manifest_path.parent_path();

    SceneModel scene;
    scene.depth_gt = read_depthmap(dir / j.at("depth").get<std::string>(),
                                   dir / j.at("depth_mask").get<std::string>());
    scene.material_map = read_pgm(dir / j.at("material_map").get<std::string>());
    if (j.contains("labels")) scene.labels = read_pgm(dir / j.at("labels").get<std::string>());
    scene.ambient_intensity = j.at("ambient_intensity").get<double>();
    for (const auto& jm : j.at("materials")) {
        std::vector<std::pair<double, double>> samples;
        for (const auto& s : jm.at("samples")) samples.emplace_back(s[0], s[1]);
        scene.materials.push_back({jm.at("name").get<std::string>(),
                                   SpectralReflectance(std::move(samples))});
    }
    if (scene.material_map.width != scene.depth_gt.width() ||
        scene.material_map.height != scene.depth_gt.height())
        throw IoError("scene material map / depth dimension mismatch");
    for (auto idx : scene.material_map.data)
        if (idx >= scene.materials.size()) throw IoError("material index out of range");
    return scene;
}

}  // namespace evspec
