#include "evspec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

namespace evspec {

Vec3 RigidTransform::apply(const Vec3& p) const {
    const auto& r = rotation;
    return {r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z + translation.x,
            r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z + translation.y,
            r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z + translation.z};
}

RigidTransform RigidTransform::compose(const RigidTransform& inner) const {
    RigidTransform out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            out.rotation[i][j] = 0;
            for (int k = 0; k < 3; ++k) out.rotation[i][j] += rotation[i][k] * inner.rotation[k][j];
        }
    out.translation = apply(inner.translation);
    return out;
}

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t) {
    PointCloud out;
    out.reserve(cloud.size());
    for (const Vec3& p : cloud) out.push_back(t.apply(p));
    return out;
}

KdTree3::KdTree3(const PointCloud& points) : points_(points) {
    if (points_.empty()) throw std::invalid_argument("empty point cloud");
    std::vector<std::uint32_t> idx(points_.size());
    std::iota(idx.begin(), idx.end(), 0u);
    nodes_.reserve(points_.size());
    root_ = build(idx, 0, int(idx.size()), 0);
}

std::int32_t KdTree3::build(std::vector<std::uint32_t>& idx, int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % 3;
    const int mid = (lo + hi) / 2;
    auto coord = [&](std::uint32_t i) {
        const Vec3& p = points_[i];
        return axis == 0 ? p.x : axis == 1 ? p.y : p.z;
    };
    std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi,
                     [&](std::uint32_t a, std::uint32_t b) { return coord(a) < coord(b); });
    const std::int32_t node = std::int32_t(nodes_.size());
    nodes_.push_back({axis, -1, -1, idx[mid]});
    const std::int32_t left = build(idx, lo, mid, depth + 1);
    const std::int32_t right = build(idx, mid + 1, hi, depth + 1);
    nodes_[node].left = left;
    nodes_[node].right = right;
    return node;
}

void KdTree3::search(std::int32_t node, const Vec3& q, std::size_t& best, double& best_sq) const {
    if (node < 0) return;
    const Node& n = nodes_[node];
    const Vec3& p = points_[n.point];
    const double dx = q.x - p.x, dy = q.y - p.y, dz = q.z - p.z;
    const double sq = dx * dx + dy * dy + dz * dz;
    if (sq < best_sq) {
        best_sq = sq;
        best = n.point;
    }
    const double delta = n.axis == 0 ? dx : n.axis == 1 ? dy : dz;
    const std::int32_t near = delta < 0 ? n.left : n.right;
    const std::int32_t far = delta < 0 ? n.right : n.left;
    search(near, q, best, best_sq);
    if (delta * delta < best_sq) search(far, q, best, best_sq);
}

std::size_t KdTree3::nearest(const Vec3& query, double& sq_dist) const {
    std::size_t best = 0;
    sq_dist = std::numeric_limits<double>::infinity();
    search(root_, query, best, sq_dist);
    return best;
}

namespace {

// Closed-form rigid fit (Umeyama, no scale) for paired points.
RigidTransform fit_rigid(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
    const std::size_t n = src.size();
    Eigen::Vector3d mu_s = Eigen::Vector3d::Zero(), mu_d = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        mu_s += Eigen::Vector3d(src[i].x, src[i].y, src[i].z);
        mu_d += Eigen::Vector3d(dst[i].x, dst[i].y, dst[i].z);
    }
    mu_s /= double(n);
    mu_d /= double(n);
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d s(src[i].x, src[i].y, src[i].z);
        const Eigen::Vector3d d(dst[i].x, dst[i].y, dst[i].z);
        cov += (d - mu_d) * (s - mu_s).transpose();
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) d(2, 2) = -1;
    const Eigen::Matrix3d r = svd.matrixU() * d * svd.matrixV().transpose();
    const Eigen::Vector3d t = mu_d - r * mu_s;

    RigidTransform out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.rotation[i][j] = r(i, j);
    out.translation = {t.x(), t.y(), t.z()};
    return out;
}

}  // namespace

IcpResult icp_align(const PointCloud& source, const PointCloud& target, const IcpOptions& opts) {
    if (source.size() < 3 || target.size() < 3)
        throw std::invalid_argument("ICP needs >= 3 points per cloud");
    KdTree3 tree(target);

    IcpResult result;
    result.aligned = source;
    double prev_rmse = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        struct Pair {
            Vec3 s, d;
            double sq;
        };
        std::vector<Pair> pairs;
        pairs.reserve(result.aligned.size());
        for (const Vec3& p : result.aligned) {
            double sq;
            const std::size_t j = tree.nearest(p, sq);
            pairs.push_back({p, target[j], sq});
        }
        if (opts.trim_fraction > 0) {
            const std::size_t keep =
                std::max<std::size_t>(3, std::size_t(pairs.size() * (1.0 - opts.trim_fraction)));
            std::nth_element(pairs.begin(), pairs.begin() + keep, pairs.end(),
                             [](const Pair& a, const Pair& b) { return a.sq < b.sq; });
            pairs.resize(keep);
        }

        // Convergence is judged on the kept correspondences so outliers
        // removed by trimming cannot mask progress.
        double sq_sum = 0;
        for (const Pair& pr : pairs) sq_sum += pr.sq;
        const double rmse = std::sqrt(sq_sum / double(pairs.size()));
        result.rmse_cm = rmse * 100.0;
        result.iterations = iter;
        if (prev_rmse - rmse < opts.tol) break;
        prev_rmse = rmse;

        std::vector<Vec3> s, d;
        s.reserve(pairs.size());
        d.reserve(pairs.size());
        for (const Pair& pr : pairs) {
            s.push_back(pr.s);
            d.push_back(pr.d);
        }
        const RigidTransform step = fit_rigid(s, d);
        result.aligned = transform_cloud(result.aligned, step);
        result.transform = step.compose(result.transform);
    }
    return result;
}

double rmse_pointcloud_cm(const PointCloud& aligned, const PointCloud& target) {
    if (aligned.empty() || target.empty()) throw std::invalid_argument("empty point cloud");
    KdTree3 tree(target);
    double sq_sum = 0;
    for (const Vec3& p : aligned) {
        double sq;
        tree.nearest(p, sq);
        sq_sum += sq;
    }
    return std::sqrt(sq_sum / double(aligned.size())) * 100.0;
}

namespace {

double mean_nn_m(const PointCloud& from, const KdTree3& tree) {
    double sum = 0;
    for (const Vec3& p : from) {
        double sq;
        tree.nearest(p, sq);
        sum += std::sqrt(sq);
    }
    return sum / double(from.size());
}

}  // namespace

double chamfer_cm(const PointCloud& a, const PointCloud& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("empty point cloud");
    KdTree3 ta(a), tb(b);
    return 0.5 * (mean_nn_m(a, tb) + mean_nn_m(b, ta)) * 100.0;
}

ImageRmse rmse_image(const ImageRGB& a, const ImageRGB& b, const Image<std::uint8_t>* mask) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("image dimension mismatch");
    if (mask && (mask->width != a.width || mask->height != a.height))
        throw std::invalid_argument("mask dimension mismatch");
    double sq[3] = {0, 0, 0};
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (mask && mask->data[i] == 0) continue;
        sq[0] += double(a.data[i].r - b.data[i].r) * (a.data[i].r - b.data[i].r);
        sq[1] += double(a.data[i].g - b.data[i].g) * (a.data[i].g - b.data[i].g);
        sq[2] += double(a.data[i].b - b.data[i].b) * (a.data[i].b - b.data[i].b);
        ++n;
    }
    if (n == 0) throw std::invalid_argument("empty mask");
    ImageRmse out;
    for (int c = 0; c < 3; ++c) out.per_channel[c] = std::sqrt(sq[c] / double(n));
    out.mean = (out.per_channel[0] + out.per_channel[1] + out.per_channel[2]) / 3.0;
    return out;
}

IouReport iou(const LabelMap& pred, const LabelMap& truth) {
    if (pred.width != truth.width || pred.height != truth.height)
        throw std::invalid_argument("label map dimension mismatch");
    std::map<int, std::size_t> inter, uni;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const int p = pred.data[i], t = truth.data[i];
        if (p == t) {
            ++inter[p];
            ++uni[p];
        } else {
            ++uni[p];
            ++uni[t];
        }
    }
    IouReport out;
    double sum = 0;
    for (const auto& [cls, u] : uni) {
        const double v = double(inter.count(cls) ? inter[cls] : 0) / double(u);
        out.per_class[cls] = v;
        sum += v;
    }
    out.mean = uni.empty() ? 0.0 : sum / double(uni.size());
    return out;
}

}  // namespace evspec
