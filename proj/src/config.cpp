#include "evspec/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace evspec {

namespace {

using nlohmann::json;

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

PinholeModel parse_pinhole(const json& j, const std::string& path) {
    PinholeModel m;
    get_if(j, "focal_px", m.focal_px);
    get_if(j, "cx", m.cx);
    get_if(j, "cy", m.cy);
    get_if(j, "width", m.width);
    get_if(j, "height", m.height);
    if (m.focal_px <= 0) throw ConfigError(path + ".focal_px must be > 0");
    if (m.width <= 0 || m.height <= 0) throw ConfigError(path + ".width/height must be > 0");
    if (m.cx < 0 || m.cx >= m.width || m.cy < 0 || m.cy >= m.height)
        throw ConfigError(path + ".cx/cy must lie inside the image");
    return m;
}

}  // namespace

RunConfig parse_run_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config: " + path.string());
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    RunConfig cfg;
    try {
        get_if(j, "schema", cfg.schema);
        if (cfg.schema != 1) throw ConfigError("schema: unsupported version");

        const std::string p = j.value("pipeline", "depth");
        if (p == "depth") cfg.pipeline = Pipeline::depth;
        else if (p == "rgb") cfg.pipeline = Pipeline::rgb;
        else if (p == "spectral") cfg.pipeline = Pipeline::spectral;
        else if (p == "segment") cfg.pipeline = Pipeline::segment;
        else if (p == "all") cfg.pipeline = Pipeline::all;
        else throw ConfigError("pipeline: must be depth|rgb|spectral|segment|all");

        get_if(j, "seed", cfg.seed);
        get_if(j, "duration_s", cfg.duration_s);
        if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();

        if (j.contains("scene")) {
            const json& js = j.at("scene");
            if (js.contains("file"))
                cfg.scene.file = path.parent_path() / js.at("file").get<std::string>();
            get_if(js, "builtin", cfg.scene.builtin);
            get_if(js, "depth_m", cfg.scene.depth_m);
            get_if(js, "depth_far_m", cfg.scene.depth_far_m);
            get_if(js, "width", cfg.scene.width);
            get_if(js, "height", cfg.scene.height);
            get_if(js, "reflectances", cfg.scene.reflectances);
        }

        cfg.rig = default_rig();
        if (j.contains("rig")) {
            const json& jr = j.at("rig");
            if (jr.contains("camera")) cfg.rig.camera = parse_pinhole(jr.at("camera"), "rig.camera");
            if (jr.contains("projector"))
                cfg.rig.projector = parse_pinhole(jr.at("projector"), "rig.projector");
            get_if(jr, "baseline_m", cfg.rig.baseline_m);
            get_if(jr, "rectified", cfg.rig.rectified);
            if (cfg.rig.baseline_m <= 0) throw ConfigError("rig.baseline must be > 0");
        }

        if (j.contains("projector")) {
            const json& jp = j.at("projector");
            std::string mode = jp.value("mode", "scanning");
            if (mode == "scanning") cfg.projector.mode = ProjectorMode::scanning;
            else if (mode == "chopped") cfg.projector.mode = ProjectorMode::chopped;
            else throw ConfigError("projector.mode: must be scanning|chopped");
            get_if(jp, "width", cfg.projector.width);
            get_if(jp, "height", cfg.projector.height);
            get_if(jp, "frame_rate_hz", cfg.projector.frame_rate_hz);
            get_if(jp, "wavelengths_nm", cfg.projector.wavelengths_nm);
            get_if(jp, "band_intensity", cfg.projector.band_intensity);
            get_if(jp, "chopper_rate_hz", cfg.projector.chopper_rate_hz);
        }
        cfg.projector.width = cfg.rig.projector.width;
        cfg.projector.height = cfg.rig.projector.height;

        if (j.contains("sensor")) {
            const json& js = j.at("sensor");
            get_if(js, "c_on", cfg.sensor.c_on);
            get_if(js, "c_off", cfg.sensor.c_off);
            get_if(js, "pr_bias", cfg.sensor.pr_bias);
            get_if(js, "diff_on_bias", cfg.sensor.diff_on_bias);
            get_if(js, "f_dark", cfg.sensor.f_dark);
            get_if(js, "kappa", cfg.sensor.kappa);
            get_if(js, "refractory_us", cfg.sensor.refractory_us);
            get_if(js, "epsilon", cfg.sensor.epsilon);
            get_if(js, "threshold_sigma", cfg.sensor.threshold_sigma);
        }
        cfg.sensor.noise_seed = cfg.seed;

        if (j.contains("sweep")) {
            const json& js = j.at("sweep");
            std::string param = js.value("parameter", "diff_on_bias");
            if (param == "diff_on_bias") cfg.sweep.parameter = SweepParameter::diff_on_bias;
            else if (param == "pr_bias") cfg.sweep.parameter = SweepParameter::pr_bias;
            else throw ConfigError("sweep.parameter: must be diff_on_bias|pr_bias");
            get_if(js, "levels", cfg.sweep.levels);
            get_if(js, "duration_s", cfg.sweep.duration_s);
        }

        get_if(j, "forest_train_scenes", cfg.forest_train_scenes);
        get_if(j, "forest_test_scenes", cfg.forest_test_scenes);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return cfg;
}

void validate_run_config(const RunConfig& cfg) {
    if (cfg.scene.file && !std::filesystem::exists(*cfg.scene.file))
        throw ConfigError("scene.file: file does not exist: " + cfg.scene.file->string());
    if (!cfg.scene.file && cfg.scene.builtin.empty())
        throw ConfigError("scene: needs either builtin or file");
    if (cfg.rig.baseline_m <= 0) throw ConfigError("rig.baseline must be > 0");
    try {
        cfg.projector.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("projector: ") + e.what());
    }
    try {
        cfg.sensor.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("sensor: ") + e.what());
    }
    if ((cfg.pipeline == Pipeline::rgb || cfg.pipeline == Pipeline::spectral ||
         cfg.pipeline == Pipeline::all) &&
        !cfg.sweep.levels.empty()) {
        try {
            cfg.sweep.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("sweep: ") + e.what());
        }
    }
    if (cfg.duration_s < 0) throw ConfigError("duration_s must be >= 0");
    if (cfg.forest_train_scenes < 1 || cfg.forest_test_scenes < 1)
        throw ConfigError("forest_train_scenes/forest_test_scenes must be >= 1");
}

SceneModel build_scene(const RunConfig& cfg) {
    if (cfg.scene.file) return load_scene(*cfg.scene.file);
    const std::string& b = cfg.scene.builtin;
    if (b == "plane") return make_plane_scene(cfg.scene.depth_m, cfg.scene.width, cfg.scene.height);
    if (b == "step")
        return make_step_scene(cfg.scene.depth_m, cfg.scene.depth_far_m, cfg.scene.width,
                               cfg.scene.height);
    if (b == "chart") return make_chart_scene(cfg.scene.depth_m, cfg.scene.width, cfg.scene.height).scene;
    if (b == "wedge") {
        auto r = cfg.scene.reflectances;
        if (r.empty()) r = {0.1, 0.2, 0.3, 0.45, 0.6, 0.75, 0.9, 0.99};
        return make_wedge_scene(r, cfg.scene.depth_m, cfg.scene.width, cfg.scene.height);
    }
    if (b == "forest") return make_forest_scene(cfg.seed, cfg.scene.width, cfg.scene.height);
    if (b == "board") return make_material_board(cfg.scene.width, cfg.scene.height).scene;
    throw ConfigError("scene.builtin: unknown scene '" + b + "'");
}

}  // namespace evspec
