#include "evspec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "evspec/io.hpp"

namespace evspec {

void SweepPlan::validate() const {
    if (levels.size() < 2) throw std::invalid_argument("sweep needs >= 2 levels");
    if (duration_s <= 0) throw std::invalid_argument("sweep duration must be > 0");
    for (std::size_t i = 1; i < levels.size(); ++i) {
        const bool ok = parameter == SweepParameter::diff_on_bias ? levels[i] > levels[i - 1]
                                                                  : levels[i] < levels[i - 1];
        if (!ok) throw std::invalid_argument("sweep levels must run least to most strict");
    }
}

SensorConfig apply_sweep_level(const SensorConfig& cfg, const SweepPlan& plan, std::size_t k) {
    SensorConfig out = cfg;
    if (plan.parameter == SweepParameter::diff_on_bias)
        out.diff_on_bias = plan.levels.at(k);
    else
        out.pr_bias = plan.levels.at(k);
    return out;
}

std::vector<FiredMap> run_sweep(const SceneModel& scene, const RigGeometry& rig,
                                const ProjectorConfig& proj, const SensorConfig& cfg,
                                const SweepPlan& plan, ExecutionPolicy policy) {
    plan.validate();
    std::vector<FiredMap> maps;
    maps.reserve(plan.levels.size());
    for (std::size_t k = 0; k < plan.levels.size(); ++k) {
        const SensorConfig level_cfg = apply_sweep_level(cfg, plan, k);
        const SimOutput sim =
            simulate(scene, rig, proj, level_cfg, plan.duration_s, plan.wavelength_nm, policy);
        FiredMap fired(cfg.width, cfg.height, 0);
        for (const Event& e : sim.stream.events)
            if (e.p == +1) fired.at(e.x, e.y) = 1;
        maps.push_back(std::move(fired));
    }
    return maps;
}

std::vector<double> calibrate_sweep(const SweepPlan& plan, const ProjectorConfig& proj,
                                    const SensorConfig& cfg, double ambient_intensity,
                                    const std::vector<double>& gray_reflectances) {
    plan.validate();
    if (gray_reflectances.empty()) throw std::invalid_argument("calibration needs >= 1 gray");
    std::vector<double> grays = gray_reflectances;
    std::sort(grays.begin(), grays.end());

    // Tiny wedge capture under the same illumination and sweep.
    const int cols_per_gray = 2, rows = 2;
    const int width = cols_per_gray * int(grays.size());
    SceneModel wedge = make_wedge_scene(grays, 1.0, width, rows);
    wedge.ambient_intensity = ambient_intensity;
    SensorConfig wedge_cfg = cfg;
    wedge_cfg.width = width;
    wedge_cfg.height = rows;
    wedge_cfg.threshold_sigma = 0;  // calibration uses nominal thresholds

    RigGeometry rig = default_rig();
    const auto maps = run_sweep(wedge, rig, proj, wedge_cfg, plan, ExecutionPolicy::serial);

    std::vector<double> calibration(plan.levels.size());
    for (std::size_t k = 0; k < maps.size(); ++k) {
        double dimmest = grays.back();
        bool any = false;
        for (std::size_t g = 0; g < grays.size(); ++g) {
            if (maps[k].at(int(g) * cols_per_gray, 0)) {
                dimmest = grays[g];
                any = true;
                break;
            }
        }
        calibration[k] = any ? dimmest : grays.back();
    }
    return calibration;
}

ImageFloat reflectance_from_sweep(const std::vector<FiredMap>& fired_maps, const SweepPlan& plan,
                                  const std::vector<double>& calibration) {
    if (fired_maps.size() != plan.levels.size() || calibration.size() != plan.levels.size())
        throw std::invalid_argument("fired map / plan level count mismatch");
    const int w = fired_maps.front().width, h = fired_maps.front().height;
    ImageFloat out(w, h, 0.0f);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int k_star = -1;
        for (int k = int(fired_maps.size()) - 1; k >= 0; --k)
            if (fired_maps[std::size_t(k)].data[i]) {
                k_star = k;
                break;
            }
        if (k_star >= 0) out.data[i] = float(calibration[std::size_t(k_star)]);
    }
    return out;
}

ImageFloat event_count_reflectance(const SimOutput& sim, const std::vector<int>& panel_region) {
    if (panel_region.empty()) throw std::invalid_argument("empty panel region");
    const int w = sim.stream.geometry.width, h = sim.stream.geometry.height;
    ImageFloat counts(w, h, 0.0f);
    for (const Event& e : sim.stream.events)
        if (e.p == +1) counts.at(e.x, e.y) += 1.0f;
    double panel_sum = 0;
    for (int idx : panel_region) panel_sum += counts.data[std::size_t(idx)];
    const double panel_mean = panel_sum / double(panel_region.size());
    if (panel_mean <= 0) throw std::invalid_argument("panel region emitted no events");
    for (float& v : counts.data) v = float(v / panel_mean);
    return counts;
}

SpectralCube normalize_to_reference(const SpectralCube& cube, const std::vector<int>& panel_region,
                                    double panel_reflectance) {
    if (panel_region.empty()) throw std::invalid_argument("empty panel region");
    SpectralCube out;
    for (const SpectralBand& band : cube.bands) {
        double sum = 0;
        for (int idx : panel_region) sum += band.image.data[std::size_t(idx)];
        const double mean = sum / double(panel_region.size());
        if (mean <= 0) throw std::invalid_argument("zero panel mean in band");
        const double scale = panel_reflectance / mean;
        SpectralBand nb{band.wavelength_nm, band.image};
        for (float& v : nb.image.data) v = float(v * scale);
        out.bands.push_back(std::move(nb));
    }
    return out;
}

std::vector<std::pair<double, double>> spectral_signature(const SpectralCube& cube,
                                                          const std::vector<int>& region) {
    if (region.empty()) throw std::invalid_argument("empty region");
    std::vector<std::pair<double, double>> sig;
    for (const SpectralBand& band : cube.bands) {
        double sum = 0;
        for (int idx : region) sum += band.image.data[std::size_t(idx)];
        sig.emplace_back(band.wavelength_nm, sum / double(region.size()));
    }
    return sig;
}

ImageRGB reconstruct_rgb(const ImageFloat& red, const ImageFloat& green, const ImageFloat& blue) {
    if (red.width != green.width || red.width != blue.width || red.height != green.height ||
        red.height != blue.height)
        throw std::invalid_argument("band dimension mismatch");
    ImageRGB out(red.width, red.height);
    auto q = [](float v) {
        return std::uint8_t(std::lround(std::clamp(double(v), 0.0, 1.0) * 255.0));
    };
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data[i] = {q(red.data[i]), q(green.data[i]), q(blue.data[i])};
    return out;
}

std::array<double, 3> region_mean_color(const ImageRGB& image, const ChartLayout::Block& block) {
    if (block.x0 < 0 || block.y0 < 0 || block.x1 > image.width || block.y1 > image.height ||
        block.x0 >= block.x1 || block.y0 >= block.y1)
        throw std::invalid_argument("block region outside image");
    double sum[3] = {0, 0, 0};
    std::size_t n = 0;
    for (int y = block.y0; y < block.y1; ++y)
        for (int x = block.x0; x < block.x1; ++x) {
            const Rgb8 c = image.at(x, y);
            sum[0] += c.r;
            sum[1] += c.g;
            sum[2] += c.b;
            ++n;
        }
    return {sum[0] / double(n), sum[1] / double(n), sum[2] / double(n)};
}

ImageRGB white_balance(const ImageRGB& image, const std::vector<ChartLayout::Block>& gray_patches,
                       const std::vector<double>& gray_truths, double gains_out[3]) {
    if (gray_patches.empty() || gray_patches.size() != gray_truths.size())
        throw std::invalid_argument("need matching gray patches and truths");
    double gain_sum[3] = {0, 0, 0};
    for (std::size_t i = 0; i < gray_patches.size(); ++i) {
        const auto m = region_mean_color(image, gray_patches[i]);
        for (int c = 0; c < 3; ++c) {
            if (m[c] <= 0) throw std::invalid_argument("zero measured mean in gray patch");
            gain_sum[c] += gray_truths[i] / m[c];
        }
    }
    double gains[3];
    for (int c = 0; c < 3; ++c) gains[c] = gain_sum[c] / double(gray_patches.size());
    if (gains_out)
        for (int c = 0; c < 3; ++c) gains_out[c] = gains[c];

    ImageRGB out(image.width, image.height);
    auto q = [](double v) { return std::uint8_t(std::lround(std::clamp(v, 0.0, 255.0))); };
    for (std::size_t i = 0; i < image.size(); ++i)
        out.data[i] = {q(image.data[i].r * gains[0]), q(image.data[i].g * gains[1]),
                       q(image.data[i].b * gains[2])};
    return out;
}

namespace {

double eval_curve(const std::vector<std::pair<double, double>>& knots, double v) {
    if (v <= knots.front().first) return knots.front().second;
    if (v >= knots.back().first) return knots.back().second;
    auto it = std::upper_bound(knots.begin(), knots.end(), v,
                               [](double x, const auto& k) { return x < k.first; });
    const auto& [x1, y1] = *it;
    const auto& [x0, y0] = *(it - 1);
    return y0 + (v - x0) / (x1 - x0) * (y1 - y0);
}

}  // namespace

ImageRGB linearize_curve(const ImageRGB& image, const std::vector<ChartLayout::Block>& gray_patches,
                         const std::vector<double>& gray_truths, ColorCalibration& calib_out) {
    if (gray_patches.size() < 3 || gray_patches.size() != gray_truths.size())
        throw std::invalid_argument("need >= 3 gray patches spanning the range");

    for (int c = 0; c < 3; ++c) {
        std::vector<std::pair<double, double>> knots;
        for (std::size_t i = 0; i < gray_patches.size(); ++i)
            knots.emplace_back(region_mean_color(image, gray_patches[i])[c], gray_truths[i]);
        std::sort(knots.begin(), knots.end(),
                  [](const auto& a, const auto& b) { return a.second < b.second; });
        // Quantized captures can measure the same mean for adjacent patches;
        // merge such ties (averaging their truths) and reject only genuine
        // reversals of the measured ordering.
        std::vector<std::pair<double, double>> merged;
        std::size_t i = 0;
        while (i < knots.size()) {
            std::size_t j = i;
            double truth_sum = 0;
            while (j < knots.size() && knots[j].first == knots[i].first)
                truth_sum += knots[j++].second;
            merged.emplace_back(knots[i].first, truth_sum / double(j - i));
            i = j;
        }
        for (std::size_t k = 1; k < merged.size(); ++k)
            if (merged[k].first < merged[k - 1].first)
                throw std::runtime_error("non-monotone measured gray means; curve fit failed");
        if (merged.size() < 2)
            throw std::runtime_error("gray measurements collapsed to one level; curve fit failed");
        calib_out.curves[c] = std::move(merged);
    }

    ImageRGB out(image.width, image.height);
    auto q = [](double v) { return std::uint8_t(std::lround(std::clamp(v, 0.0, 255.0))); };
    for (std::size_t i = 0; i < image.size(); ++i)
        out.data[i] = {q(eval_curve(calib_out.curves[0], image.data[i].r)),
                       q(eval_curve(calib_out.curves[1], image.data[i].g)),
                       q(eval_curve(calib_out.curves[2], image.data[i].b))};
    return out;
}

ChartErrorReport chart_error(const ImageRGB& reconstructed, const ChartLayout& layout,
                             CorrectionStage stage) {
    if (layout.chromatic.size() != 16) throw std::invalid_argument("chart needs 16 blocks");
    std::vector<double> gray_truths;
    for (const auto& g : layout.grays) gray_truths.push_back(double(g.srgb.r));

    ImageRGB image = reconstructed;
    ColorCalibration calib;
    if (stage == CorrectionStage::wb || stage == CorrectionStage::curve) {
        // Rescale the gray truths to the image's overall level first: white
        // balance should correct channel imbalance at the capture's own
        // exposure, while the global transfer (e.g. a linear-coded
        // reconstruction) is left to the curve stage. Without this, a large
        // uniform gain saturates bright pixels before the curve fit sees them.
        double measured_sum = 0, truth_sum = 0;
        for (std::size_t i = 0; i < layout.grays.size(); ++i) {
            const auto m = region_mean_color(image, layout.grays[i]);
            measured_sum += m[0] + m[1] + m[2];
            truth_sum += 3.0 * gray_truths[i];
        }
        if (truth_sum <= 0) throw std::runtime_error("gray truths must have positive mean");
        std::vector<double> wb_truths = gray_truths;
        for (double& t : wb_truths) t *= measured_sum / truth_sum;
        image = white_balance(image, layout.grays, wb_truths, calib.gains);
    }
    if (stage == CorrectionStage::curve)
        image = linearize_curve(image, layout.grays, gray_truths, calib);

    ChartErrorReport report;
    report.stage = stage;
    double sq[3] = {0, 0, 0};
    for (const auto& block : layout.chromatic) {
        const auto m = region_mean_color(image, block);
        const Rgb8 mean_c{std::uint8_t(std::lround(std::clamp(m[0], 0.0, 255.0))),
                          std::uint8_t(std::lround(std::clamp(m[1], 0.0, 255.0))),
                          std::uint8_t(std::lround(std::clamp(m[2], 0.0, 255.0)))};
        report.mean_delta_e += delta_e76(mean_c, block.srgb);
        const double d[3] = {m[0] - block.srgb.r, m[1] - block.srgb.g, m[2] - block.srgb.b};
        for (int c = 0; c < 3; ++c) sq[c] += d[c] * d[c];
    }
    report.mean_delta_e /= double(layout.chromatic.size());
    double total = 0;
    for (int c = 0; c < 3; ++c) {
        report.rmse_per_channel[c] = std::sqrt(sq[c] / double(layout.chromatic.size()));
        total += sq[c];
    }
    report.rmse_mean = std::sqrt(total / (3.0 * double(layout.chromatic.size())));
    return report;
}

void save_cube(const SpectralCube& cube, const std::filesystem::path& dir,
               const std::string& stem) {
    std::filesystem::create_directories(dir);
    nlohmann::json j;
    j["schema"] = 1;
    for (std::size_t i = 0; i < cube.bands.size(); ++i) {
        const std::string name = stem + "_band" + std::to_string(i) + ".pfm";
        write_pfm(cube.bands[i].image, dir / name);
        j["bands"].push_back({{"wavelength_nm", cube.bands[i].wavelength_nm}, {"file", name}});
    }
    std::ofstream f(dir / (stem + ".cube.json"));
    f << j.dump(2) << '\n';
    if (!f) throw IoError("write failed: cube manifest");
}

SpectralCube load_cube(const std::filesystem::path& manifest_path) {
    std::ifstream f(manifest_path);
    if (!f) throw IoError("cannot open cube manifest: " + manifest_path.string());
    nlohmann::json j = nlohmann::json::parse(f);
    SpectralCube cube;
    for (const auto& jb : j.at("bands"))
        cube.bands.push_back({jb.at("wavelength_nm").get<double>(),
                              read_pfm(manifest_path.parent_path() /
                                       jb.at("file").get<std::string>())});
    for (std::size_t i = 1; i < cube.bands.size(); ++i)
        if (cube.bands[i].wavelength_nm <= cube.bands[i - 1].wavelength_nm)
            throw IoError("cube wavelengths must be strictly increasing");
    return cube;
}

}  // namespace evspec
