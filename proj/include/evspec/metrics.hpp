#pragma once

#include <array>
#include <map>
#include <vector>

#include "evspec/types.hpp"

namespace evspec {

struct RigidTransform {
    std::array<std::array<double, 3>, 3> rotation = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    Vec3 translation;

    Vec3 apply(const Vec3& p) const;
    RigidTransform compose(const RigidTransform& inner) const;  // this ∘ inner
};

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t);

// Static 3-D k-d tree for nearest-neighbor queries.
class KdTree3 {
public:
    explicit KdTree3(const PointCloud& points);
    // Returns index of the nearest point and its squared distance.
    std::size_t nearest(const Vec3& query, double& sq_dist) const;

private:
    struct Node {
        int axis = -1;
        std::int32_t left = -1, right = -1;
        std::uint32_t point = 0;
    };
    std::int32_t build(std::vector<std::uint32_t>& idx, int lo, int hi, int depth);
    void search(std::int32_t node, const Vec3& q, std::size_t& best, double& best_sq) const;

    PointCloud points_;
    std::vector<Node> nodes_;
    std::int32_t root_ = -1;
};

struct IcpResult {
    RigidTransform transform;  // maps source into the target frame
    PointCloud aligned;
    double rmse_cm = 0.0;
    int iterations = 0;
};

struct IcpOptions {
    int max_iter = 50;
    double tol = 1e-6;
    double trim_fraction = 0.0;  // fraction of worst correspondences dropped
};

IcpResult icp_align(const PointCloud& source, const PointCloud& target,
                    const IcpOptions& opts = {});

// sqrt(mean squared NN distance) from aligned to target, centimeters.
// Not symmetric in its arguments.
double rmse_pointcloud_cm(const PointCloud& aligned, const PointCloud& target);

// Symmetric: mean of the two directed mean NN distances, centimeters.
double chamfer_cm(const PointCloud& a, const PointCloud& b);

struct ImageRmse {
    double per_channel[3] = {0, 0, 0};
    double mean = 0;
};

// 8-bit scale RMSE over masked pixels (empty mask = all pixels).
ImageRmse rmse_image(const ImageRGB& a, const ImageRGB& b,
                     const Image<std::uint8_t>* mask = nullptr);

struct IouReport {
    std::map<int, double> per_class;  // classes present in pred or truth
    double mean = 0.0;                // over classes present in either map
};

IouReport iou(const LabelMap& pred, const LabelMap& truth);

}  // namespace evspec
