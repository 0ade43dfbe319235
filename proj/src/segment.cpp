#include "evspec/segment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "evspec/color.hpp"
#include "evspec/io.hpp"

namespace evspec {

std::vector<int> ClassifierModel::active_features() const {
    switch (subset) {
        case FeatureSubset::rgb: return {0, 1, 2};
        case FeatureSubset::depth: return {3, 4};
        case FeatureSubset::rgbd: return {0, 1, 2, 3, 4};
    }
    return {};
}

FeatureField extract_features(const ImageRGB& rgb, const DepthMap& depth) {
    if (rgb.width != depth.width() || rgb.height != depth.height())
        throw std::invalid_argument("rgb/depth dimension mismatch");
    const int w = rgb.width, h = rgb.height;

    // Scene median over valid depth; fallback for invalid pixels.
    std::vector<float> valid_depths;
    for (std::size_t i = 0; i < depth.values.size(); ++i)
        if (depth.mask.data[i]) valid_depths.push_back(depth.values.data[i]);
    float median = 1.0f;
    if (!valid_depths.empty()) {
        auto mid = valid_depths.begin() + valid_depths.size() / 2;
        std::nth_element(valid_depths.begin(), mid, valid_depths.end());
        median = *mid;
    }
    if (median <= 0) median = 1.0f;

    FeatureField field;
    field.width = w;
    field.height = h;
    field.features.resize(std::size_t(w) * h);
    field.valid.assign(std::size_t(w) * h, 1);

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = std::size_t(y) * w + x;
            const Rgb8 c = rgb.data[i];
            auto& f = field.features[i];
            f[0] = float(srgb_to_linear(c.r));
            f[1] = float(srgb_to_linear(c.g));
            f[2] = float(srgb_to_linear(c.b));

            // 5x5 depth statistics over valid neighbors.
            double sum = 0, sq = 0;
            int n = 0;
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    if (!depth.valid(nx, ny)) continue;
                    const double z = depth.values.at(nx, ny);
                    sum += z;
                    sq += z * z;
                    ++n;
                }
            if (depth.valid(x, y)) {
                f[3] = depth.values.at(x, y) / median;
                const double m = sum / n;
                f[4] = float(std::sqrt(std::max(0.0, sq / n - m * m)) / median);
            } else {
                // rgb-only fallback; pixel excluded from training.
                f[3] = 1.0f;
                f[4] = 0.0f;
                field.valid[i] = 0;
            }
        }
    return field;
}

ClassifierModel train(const std::vector<LabeledScene>& scenes, FeatureSubset subset) {
    if (scenes.empty()) throw std::invalid_argument("need >= 1 labeled scene");
    ClassifierModel model;
    model.subset = subset;

    std::array<std::array<double, kNumFeatures>, kNumClasses> sum{}, sq{};
    std::array<std::size_t, kNumClasses> count{};

    for (const LabeledScene& scene : scenes) {
        if (scene.labels.width != scene.rgb.width || scene.labels.height != scene.rgb.height)
            throw std::invalid_argument("label map dimension mismatch");
        const FeatureField field = extract_features(scene.rgb, scene.depth);
        for (std::size_t i = 0; i < field.features.size(); ++i) {
            if (!field.valid[i]) continue;
            const int cls = scene.labels.data[i];
            if (cls >= kNumClasses) throw std::invalid_argument("label out of range");
            ++count[cls];
            for (int f = 0; f < kNumFeatures; ++f) {
                sum[cls][f] += field.features[i][f];
                sq[cls][f] += double(field.features[i][f]) * field.features[i][f];
            }
        }
    }

    std::size_t total = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        if (count[c] == 0)
            throw std::invalid_argument("class " + std::to_string(c) + " missing from training data");
        total += count[c];
    }
    for (int c = 0; c < kNumClasses; ++c) {
        model.prior[c] = double(count[c]) / double(total);
        for (int f = 0; f < kNumFeatures; ++f) {
            model.mean[c][f] = sum[c][f] / double(count[c]);
            model.variance[c][f] =
                std::max(1e-6, sq[c][f] / double(count[c]) - model.mean[c][f] * model.mean[c][f]);
        }
    }
    return model;
}

namespace {

int classify(const ClassifierModel& model, const std::array<float, kNumFeatures>& f,
             const std::vector<int>& active) {
    double best = -std::numeric_limits<double>::infinity();
    int best_cls = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        double ll = std::log(model.prior[c]);
        for (int idx : active) {
            const double d = f[idx] - model.mean[c][idx];
            ll -= 0.5 * (d * d / model.variance[c][idx] +
                         std::log(2.0 * M_PI * model.variance[c][idx]));
        }
        if (ll > best) {  // strict: ties go to the smaller class id
            best = ll;
            best_cls = c;
        }
    }
    return best_cls;
}

}  // namespace

LabelMap predict(const ClassifierModel& model, const ImageRGB& rgb, const DepthMap& depth,
                 ExecutionPolicy policy) {
    const FeatureField field = extract_features(rgb, depth);
    const std::vector<int> active = model.active_features();
    LabelMap out(field.width, field.height, 0);

    if (policy == ExecutionPolicy::serial) {
        for (std::size_t i = 0; i < field.features.size(); ++i)
            out.data[i] = std::uint8_t(classify(model, field.features[i], active));
    } else {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < (long long)field.features.size(); ++i)
            out.data[std::size_t(i)] =
                std::uint8_t(classify(model, field.features[std::size_t(i)], active));
    }
    return out;
}

IouReport evaluate(const ClassifierModel& model, const std::vector<LabeledScene>& scenes) {
    // Pixel-pooled across scenes: concatenate into one pair of label maps.
    std::size_t total = 0;
    for (const auto& s : scenes) total += s.labels.size();
    LabelMap pred(int(total), 1, 0), truth(int(total), 1, 0);
    std::size_t off = 0;
    for (const LabeledScene& scene : scenes) {
        const LabelMap p = predict(model, scene.rgb, scene.depth);
        std::copy(p.data.begin(), p.data.end(), pred.data.begin() + off);
        std::copy(scene.labels.data.begin(), scene.labels.data.end(), truth.data.begin() + off);
        off += p.size();
    }
    return iou(pred, truth);
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
    nlohmann::json j;
    j["schema"] = 1;
    j["subset"] = model.subset == FeatureSubset::rgb     ? "rgb"
                  : model.subset == FeatureSubset::depth ? "depth"
                                                         : "rgbd";
    for (int c = 0; c < kNumClasses; ++c) {
        j["priors"].push_back(model.prior[c]);
        j["means"].push_back(model.mean[c]);
        j["variances"].push_back(model.variance[c]);
    }
    std::ofstream f(path);
    f << j.dump(2) << '\n';
    if (!f) throw IoError("write failed: " + path.string());
}

ClassifierModel load_model(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open model: " + path.string());
    nlohmann::json j = nlohmann::json::parse(f);
    ClassifierModel model;
    const std::string subset = j.at("subset").get<std::string>();
    model.subset = subset == "rgb"     ? FeatureSubset::rgb
                   : subset == "depth" ? FeatureSubset::depth
                                       : FeatureSubset::rgbd;
    for (int c = 0; c < kNumClasses; ++c) {
        model.prior[c] = j.at("priors")[c].get<double>();
        for (int k = 0; k < kNumFeatures; ++k) {
            model.mean[c][k] = j.at("means")[c][k].get<double>();
            model.variance[c][k] = j.at("variances")[c][k].get<double>();
        }
    }
    return model;
}

}  // namespace evspec
