#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "evspec/metrics.hpp"
#include "evspec/types.hpp"

namespace evspec {

// Per-pixel feature layout: R, G, B (linear, [0,1]), normalized depth,
// local depth std in a 5x5 window.
constexpr int kNumFeatures = 5;
constexpr int kNumClasses = 3;

struct FeatureField {
    int width = 0, height = 0;
    std::vector<std::array<float, kNumFeatures>> features;
    std::vector<std::uint8_t> valid;
};

enum class FeatureSubset { rgb, depth, rgbd };

FeatureField extract_features(const ImageRGB& rgb, const DepthMap& depth);

struct ClassifierModel {
    FeatureSubset subset = FeatureSubset::rgbd;
    std::array<std::array<double, kNumFeatures>, kNumClasses> mean{};
    std::array<std::array<double, kNumFeatures>, kNumClasses> variance{};
    std::array<double, kNumClasses> prior{};

    // Feature indices active for the subset.
    std::vector<int> active_features() const;
};

struct LabeledScene {
    ImageRGB rgb;
    DepthMap depth;
    LabelMap labels;
};

// Diagonal-Gaussian per-class fit; variance floored at 1e-6. Throws when a
// class is absent from the training data.
ClassifierModel train(const std::vector<LabeledScene>& scenes, FeatureSubset subset);

LabelMap predict(const ClassifierModel& model, const ImageRGB& rgb, const DepthMap& depth,
                 ExecutionPolicy policy = ExecutionPolicy::openmp);

// Pixel-pooled per-class and mean IoU across test scenes.
IouReport evaluate(const ClassifierModel& model, const std::vector<LabeledScene>& scenes);

void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

}  // namespace evspec
