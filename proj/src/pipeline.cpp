#include "evspec/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "evspec/color.hpp"
#include "evspec/depth.hpp"
#include "evspec/io.hpp"
#include "evspec/metrics.hpp"
#include "evspec/render.hpp"
#include "evspec/segment.hpp"

namespace evspec {

namespace {

namespace fs = std::filesystem;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double hash_normal(std::uint64_t seed, std::uint64_t n) {
    const double u1 =
        std::max(double(splitmix64(seed ^ (2 * n + 1)) >> 11) * 0x1.0p-53, 1e-300);
    const double u2 = double(splitmix64(seed ^ (2 * n + 2)) >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Tracks artifacts so a failed run leaves no partial outputs behind.
class ArtifactSet {
public:
    explicit ArtifactSet(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    fs::path path(const std::string& name) {
        const fs::path p = dir_ / name;
        written_.push_back(p);
        return p;
    }
    void cleanup() {
        for (const fs::path& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }
    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
};

void write_metrics(const std::vector<MetricRow>& rows, ArtifactSet& art) {
    std::ofstream csv(art.path("metrics.csv"));
    csv << "scene,method,metric,value\n";
    csv.precision(6);
    csv << std::fixed;
    for (const MetricRow& r : rows)
        csv << r.scene << ',' << r.method << ',' << r.metric << ',' << r.value << '\n';

    std::ofstream md(art.path("report.md"));
    md.precision(4);
    md << std::fixed;
    md << "# Run report\n\n";
    md << "| scene | method | metric | value |\n|---|---|---|---|\n";
    for (const MetricRow& r : rows)
        md << "| " << r.scene << " | " << r.method << " | " << r.metric << " | " << r.value
           << " |\n";
    if (!csv || !md) throw PipelineError("failed to write metrics");
}

struct LabCapture {
    double ambient = 0.05;
    double band_intensity = 1.0;
    double chopper_rate_hz = 100.0;
};

SensorConfig finite_bandwidth_sensor(const RunConfig& cfg, int width, int height) {
    SensorConfig s = cfg.sensor;
    s.width = width;
    s.height = height;
    return s;
}

ProjectorConfig chopped_projector(const RunConfig& cfg, const LabCapture& lab, double wavelength) {
    ProjectorConfig p = cfg.projector;
    p.mode = ProjectorMode::chopped;
    p.chopper_rate_hz = lab.chopper_rate_hz;
    p.band_intensity = lab.band_intensity;
    if (!p.has_wavelength(wavelength)) p.wavelengths_nm.push_back(wavelength);
    return p;
}

// ---- depth pipeline ----

void run_depth(const RunConfig& cfg, ArtifactSet& art, std::vector<MetricRow>& rows) {
    RunConfig scfg = cfg;
    if (scfg.scene.builtin.empty() && !scfg.scene.file) scfg.scene.builtin = "plane";
    SceneModel scene = build_scene(scfg);

    ProjectorConfig proj = cfg.projector;
    proj.mode = ProjectorMode::scanning;
    SensorConfig sensor = finite_bandwidth_sensor(cfg, scene.depth_gt.width(), scene.depth_gt.height());
    const ScanSchedule sched = ScanSchedule::from_config(proj);
    const double duration = cfg.duration_s > 0 ? cfg.duration_s : sched.frame_time_s();

    const double wavelength = proj.wavelengths_nm.front();
    const SimOutput sim = simulate(scene, cfg.rig, proj, sensor, duration, wavelength);
    write_events(sim.stream, art.path("events.csv"));

    const DepthMap depth = reconstruct_depth(sim.stream, cfg.rig, sched);
    write_depthmap(depth, art.path("depth.pfm"), art.path("depth_mask.pgm"));
    write_ppm(render_depth_colormap(depth), art.path("depth_color.ppm"));

    const PointCloud cloud = depth_to_pointcloud(depth, cfg.rig.camera);
    write_pointcloud(cloud, art.path("cloud.xyz"));

    // Coverage over pixels the projector can reach.
    const CorrespondenceMap corr = build_correspondence(scene, cfg.rig, proj);
    std::size_t reachable = 0, covered = 0;
    double sq_err = 0;
    for (int y = 0; y < depth.height(); ++y)
        for (int x = 0; x < depth.width(); ++x) {
            if (corr.at(x, y) < 0) continue;
            ++reachable;
            if (!depth.valid(x, y)) continue;
            ++covered;
            const double d = depth.values.at(x, y) - scene.depth_gt.values.at(x, y);
            sq_err += d * d;
        }
    const std::string sc = scfg.scene.builtin.empty() ? "file" : scfg.scene.builtin;
    rows.push_back({sc, "ours", "coverage", reachable ? double(covered) / reachable : 0.0});
    rows.push_back({sc, "ours", "depth_rmse_cm",
                    covered ? std::sqrt(sq_err / covered) * 100.0 : -1.0});

    if (!cloud.empty()) {
        const PointCloud gt = depth_to_pointcloud(scene.depth_gt, cfg.rig.camera);
        const IcpResult icp = icp_align(cloud, gt);
        rows.push_back({sc, "ours", "cloud_rmse_cm", rmse_pointcloud_cm(icp.aligned, gt)});
        rows.push_back({sc, "ours", "chamfer_cm", chamfer_cm(icp.aligned, gt)});
    }
}

// ---- rgb pipeline ----

struct BandCapture {
    ImageFloat sweep_reflectance;
    ImageFloat count_reflectance;
};

BandCapture capture_band(const SceneModel& scene, const RunConfig& cfg, const LabCapture& lab,
                         double wavelength, const std::vector<int>& panel_region) {
    const int w = scene.depth_gt.width(), h = scene.depth_gt.height();
    const SensorConfig sensor = finite_bandwidth_sensor(cfg, w, h);
    const ProjectorConfig proj = chopped_projector(cfg, lab, wavelength);

    SweepPlan plan = cfg.sweep;
    const std::vector<double> grays = default_calibration_grays();
    if (plan.levels.empty())
        plan = design_sweep(grays, lab.ambient, lab.band_intensity, lab.chopper_rate_hz, sensor,
                            wavelength, cfg.sweep.duration_s);
    plan.wavelength_nm = wavelength;

    BandCapture out;
    const auto maps = run_sweep(scene, cfg.rig, proj, sensor, plan);
    const auto calibration = calibrate_sweep(plan, proj, sensor, scene.ambient_intensity, grays);
    out.sweep_reflectance = reflectance_from_sweep(maps, plan, calibration);

    // Event-counting baseline: single capture, matched total budget.
    SensorConfig count_sensor = sensor;
    count_sensor.c_on = count_sensor.c_off = 0.4;
    count_sensor.diff_on_bias = 0.0;
    const double count_duration = plan.duration_s * double(plan.levels.size());
    const SimOutput sim =
        simulate(scene, cfg.rig, proj, count_sensor, count_duration, wavelength);
    out.count_reflectance = event_count_reflectance(sim, panel_region);
    return out;
}

std::vector<int> brightest_gray_region(const ChartScene& chart) {
    const auto& b = chart.layout.grays.back();
    std::vector<int> region;
    for (int y = b.y0; y < b.y1; ++y)
        for (int x = b.x0; x < b.x1; ++x) region.push_back(y * chart.scene.depth_gt.width() + x);
    return region;
}

void run_rgb(const RunConfig& cfg, ArtifactSet& art, std::vector<MetricRow>& rows) {
    const ChartScene chart = make_chart_scene(cfg.scene.depth_m, cfg.scene.width, cfg.scene.height);
    const LabCapture lab{chart.scene.ambient_intensity, cfg.projector.band_intensity,
                         cfg.projector.chopper_rate_hz};
    const std::vector<int> panel = brightest_gray_region(chart);

    const double bands[3] = {kBandRedNm, kBandGreenNm, kBandBlueNm};
    std::vector<BandCapture> captures;
    for (double nm : bands) captures.push_back(capture_band(chart.scene, cfg, lab, nm, panel));

    const ImageRGB ours = reconstruct_rgb(captures[0].sweep_reflectance,
                                          captures[1].sweep_reflectance,
                                          captures[2].sweep_reflectance);
    const ImageRGB baseline = reconstruct_rgb(captures[0].count_reflectance,
                                              captures[1].count_reflectance,
                                              captures[2].count_reflectance);
    write_ppm(ours, art.path("rgb.ppm"));
    write_ppm(baseline, art.path("rgb_baseline.ppm"));

    const std::pair<std::string, ImageRGB> methods[2] = {{"ours", ours}, {"baseline", baseline}};
    for (const auto& [name, img] : methods) {
        for (auto stage : {CorrectionStage::raw, CorrectionStage::wb, CorrectionStage::curve}) {
            const ChartErrorReport rep = chart_error(img, chart.layout, stage);
            const std::string sn = stage == CorrectionStage::raw  ? "raw"
                                   : stage == CorrectionStage::wb ? "wb"
                                                                  : "curve";
            rows.push_back({"chart", name, "delta_e76_" + sn, rep.mean_delta_e});
            rows.push_back({"chart", name, "rmse_" + sn, rep.rmse_mean});
        }
    }
}

// ---- spectral pipeline ----

void run_spectral(const RunConfig& cfg, ArtifactSet& art, std::vector<MetricRow>& rows) {
    const MaterialBoard board = make_material_board(cfg.scene.width, cfg.scene.height);
    const LabCapture lab{board.scene.ambient_intensity, cfg.projector.band_intensity,
                         cfg.projector.chopper_rate_hz};
    const std::vector<double> band_centers = {650, 690, 730, 770, 810, 850};
    const std::vector<double> grays = default_calibration_grays();

    SpectralCube cube;
    for (double nm : band_centers) {
        const int w = board.scene.depth_gt.width(), h = board.scene.depth_gt.height();
        const SensorConfig sensor = finite_bandwidth_sensor(cfg, w, h);
        const ProjectorConfig proj = chopped_projector(cfg, lab, nm);
        SweepPlan plan = cfg.sweep;
        if (plan.levels.empty())
            plan = design_sweep(grays, lab.ambient, lab.band_intensity, lab.chopper_rate_hz,
                                sensor, nm, cfg.sweep.duration_s);
        plan.wavelength_nm = nm;
        const auto maps = run_sweep(board.scene, cfg.rig, proj, sensor, plan);
        const auto calibration =
            calibrate_sweep(plan, proj, sensor, board.scene.ambient_intensity, grays);
        cube.bands.push_back({nm, reflectance_from_sweep(maps, plan, calibration)});
    }

    const SpectralCube normalized = normalize_to_reference(cube, board.panel_region);
    save_cube(normalized, art.dir(), "bands");
    art.path("bands.cube.json");
    for (std::size_t i = 0; i < normalized.bands.size(); ++i)
        art.path("bands_band" + std::to_string(i) + ".pfm");

    for (const auto& [name, region] : board.regions) {
        const auto sig = spectral_signature(normalized, region);
        const Material* mat = nullptr;
        for (const Material& m : board.scene.materials)
            if (m.name == name) mat = &m;
        double rms = 0;
        for (const auto& [nm, value] : sig) {
            const double gt = mat->reflectance.sample(nm);
            rms += (value - gt) * (value - gt);
        }
        rms = std::sqrt(rms / double(sig.size()));
        rows.push_back({"board", "ours", "signature_rms_" + name, rms});
    }
}

// ---- segmentation pipeline ----

struct ForestSet {
    std::vector<LabeledScene> train, test;
};

ForestSet make_forest_set(const RunConfig& cfg) {
    ForestSet set;
    const int w = std::min(cfg.scene.width, 320), h = std::min(cfg.scene.height, 240);
    for (int i = 0; i < cfg.forest_train_scenes + cfg.forest_test_scenes; ++i) {
        const std::uint64_t seed = splitmix64(cfg.seed + 1000 + std::uint64_t(i));
        SceneModel scene = make_forest_scene(seed, w, h);
        LabeledScene ls;
        ls.rgb = render_scene_rgb(scene, 0.02, seed ^ 0xabcdULL);
        ls.depth = noisy_depth(scene.depth_gt, 0.02, seed ^ 0x1234ULL);
        ls.labels = scene.labels;
        (i < cfg.forest_train_scenes ? set.train : set.test).push_back(std::move(ls));
    }
    return set;
}

void run_segment(const RunConfig& cfg, ArtifactSet& art, std::vector<MetricRow>& rows) {
    const ForestSet set = make_forest_set(cfg);
    const std::pair<std::string, FeatureSubset> subsets[3] = {
        {"depth", FeatureSubset::depth}, {"rgb", FeatureSubset::rgb}, {"rgbd", FeatureSubset::rgbd}};

    for (const auto& [name, subset] : subsets) {
        const ClassifierModel model = train(set.train, subset);
        save_model(model, art.path("model_" + name + ".json"));
        const IouReport rep = evaluate(model, set.test);
        for (const auto& [cls, v] : rep.per_class)
            rows.push_back({"forest", name, "iou_class" + std::to_string(cls), v});
        rows.push_back({"forest", name, "iou_mean", rep.mean});
    }

    // Qualitative artifacts from the first test scene, RGBD model.
    const ClassifierModel model = train(set.train, FeatureSubset::rgbd);
    const LabeledScene& s = set.test.front();
    const LabelMap pred = predict(model, s.rgb, s.depth);
    write_pgm(pred, art.path("labels.pgm"));
    write_ppm(render_overlay(s.rgb, pred), art.path("overlay.ppm"));
}

}  // namespace

std::vector<double> default_calibration_grays() {
    return {0.02, 0.035, 0.06, 0.1, 0.16, 0.25, 0.38, 0.55, 0.75, 0.99};
}

SweepPlan design_sweep(const std::vector<double>& gray_reflectances, double ambient,
                       double band_intensity, double chopper_rate_hz, const SensorConfig& cfg,
                       double wavelength_nm, double duration_s) {
    if (gray_reflectances.size() < 2) throw std::invalid_argument("need >= 2 calibration grays");
    std::vector<double> grays = gray_reflectances;
    std::sort(grays.begin(), grays.end());

    std::vector<double> amps;
    for (double g : grays)
        amps.push_back(chopped_response_amplitude(g, ambient, band_intensity, chopper_rate_hz, cfg));

    SweepPlan plan;
    plan.parameter = SweepParameter::diff_on_bias;
    plan.duration_s = duration_s;
    plan.wavelength_nm = wavelength_nm;
    // Thresholds midway between consecutive gray amplitudes: gray k is the
    // dimmest pixel that still fires at level k.
    double prev = -1e18;
    for (std::size_t k = 0; k < grays.size(); ++k) {
        const double below = k == 0 ? 0.6 * amps[0] : amps[k - 1];
        double threshold = 0.5 * (below + amps[k]);
        if (threshold <= prev) threshold = prev + 1e-6;
        plan.levels.push_back(threshold - cfg.c_on);
        prev = threshold;
    }
    return plan;
}

ImageRGB render_scene_rgb(const SceneModel& scene, double noise_sigma, std::uint64_t seed) {
    const ImageFloat r = reflectance_image(scene, kBandRedNm);
    const ImageFloat g = reflectance_image(scene, kBandGreenNm);
    const ImageFloat b = reflectance_image(scene, kBandBlueNm);
    ImageRGB out(r.width, r.height);
    auto q = [](double v) {
        return std::uint8_t(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    };
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data[i] = {q(r.data[i] + noise_sigma * hash_normal(seed, 3 * i)),
                       q(g.data[i] + noise_sigma * hash_normal(seed, 3 * i + 1)),
                       q(b.data[i] + noise_sigma * hash_normal(seed, 3 * i + 2))};
    }
    return out;
}

DepthMap noisy_depth(const DepthMap& depth, double rel_sigma, std::uint64_t seed) {
    DepthMap out = depth;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        if (out.mask.data[i])
            out.values.data[i] *= float(1.0 + rel_sigma * hash_normal(seed, i));
    return out;
}

void run_pipeline(const RunConfig& cfg) {
    validate_run_config(cfg);
    ArtifactSet art(cfg.out_dir);
    std::vector<MetricRow> rows;
    try {
        const bool all = cfg.pipeline == Pipeline::all;
        if (all || cfg.pipeline == Pipeline::depth) run_depth(cfg, art, rows);
        if (all || cfg.pipeline == Pipeline::rgb) run_rgb(cfg, art, rows);
        if (all || cfg.pipeline == Pipeline::spectral) run_spectral(cfg, art, rows);
        if (all || cfg.pipeline == Pipeline::segment) run_segment(cfg, art, rows);
        write_metrics(rows, art);
    } catch (...) {
        art.cleanup();
        throw;
    }
}

}  // namespace evspec
