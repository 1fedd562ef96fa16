#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "lisr/kernels.hpp"

namespace lisr {

namespace {

constexpr std::uint32_t kLeafSize = 8;

double distance_key(const Point3& a, const Point3& b, Norm norm) {
    const Point3 d = a - b;
    return norm == Norm::L2 ? d.squaredNorm() : d.cwiseAbs().sum();
}

double bound_key(double diff, Norm norm) { return norm == Norm::L2 ? diff * diff : std::abs(diff); }

}  // namespace

KdTree::KdTree(std::vector<Point3> points) : points_(std::move(points)) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (!points_.empty()) {
        nodes_.reserve(2 * points_.size() / kLeafSize + 2);
        build(0, std::uint32_t(points_.size()));
    }
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
    const auto id = std::uint32_t(nodes_.size());
    nodes_.emplace_back();
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    if (end - begin <= kLeafSize) return id;

    Point3 lo = Point3::Constant(std::numeric_limits<double>::infinity());
    Point3 hi = -lo;
    for (auto i = begin; i < end; ++i) {
        lo = lo.cwiseMin(points_[order_[i]]);
        hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    if (hi[axis] == lo[axis]) return id;  // all coincident: keep as a leaf

    const auto mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });
    const double split = points_[order_[mid]][axis];
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    // Left holds coordinates <= split, right holds >= split.
    const auto left = build(begin, mid);
    const auto right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void KdTree::search(std::uint32_t id, const Point3& x, Norm norm, std::optional<std::size_t> exclude,
                    Hit& best, double& best_key) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
        for (auto i = node.begin; i < node.end; ++i) {
            const std::size_t idx = order_[i];
            if (exclude && *exclude == idx) continue;
            const double key = distance_key(x, points_[idx], norm);
            if (key < best_key || (key == best_key && idx < best.index)) {
                best_key = key;
                best.index = idx;
            }
        }
        return;
    }
    const double diff = x[node.axis] - node.split;
    const std::uint32_t near = diff <= 0.0 ? node.left : node.right;
    const std::uint32_t far = diff <= 0.0 ? node.right : node.left;
    search(near, x, norm, exclude, best, best_key);
    // Equal bounds are still visited so that index ties resolve exactly.
    if (bound_key(diff, norm) <= best_key) search(far, x, norm, exclude, best, best_key);
}

KdTree::Hit KdTree::nearest(const Point3& x, Norm norm, std::optional<std::size_t> exclude) const {
    Hit best{std::numeric_limits<std::size_t>::max(), std::numeric_limits<double>::infinity()};
    if (points_.empty()) return best;
    double key = std::numeric_limits<double>::infinity();
    search(0, x, norm, exclude, best, key);
    best.distance = norm == Norm::L2 ? std::sqrt(key) : key;
    return best;
}

KernelSet::KernelSet(std::vector<Point3> kernels) {
    if (kernels.empty()) throw Error("kernel set is empty");
    for (std::size_t i = 0; i < kernels.size(); ++i)
        if (!kernels[i].allFinite()) throw Error(fmt::format("kernel {} has a non-finite coordinate", i));
    index_ = KdTree(std::move(kernels));
    for (std::size_t i = 0; i < size(); ++i) {
        const auto hit = index_.nearest(index_.points()[i], Norm::L2, i);
        if (hit.index < size() && hit.distance <= kMinKernelSeparation)
            throw Error(fmt::format("duplicate kernels {} and {} (distance {:.3g})", std::min(i, hit.index),
                                    std::max(i, hit.index), hit.distance));
    }
}

double KernelSet::nearest_other_distance(std::size_t i) const {
    if (size() == 1) return std::numeric_limits<double>::infinity();
    return index_.nearest(index_.points()[i], Norm::L2, i).distance;
}

std::vector<std::size_t> farthest_point_indices(const PointCloud& cloud, std::size_t q,
                                                std::size_t start) {
    if (q == 0) throw Error("farthest point sampling: q must be at least 1");
    if (cloud.empty()) throw Error("farthest point sampling: empty point cloud");
    std::vector<std::size_t> chosen;
    if (q >= cloud.size()) {
        chosen.resize(cloud.size());
        std::iota(chosen.begin(), chosen.end(), std::size_t{0});
        return chosen;
    }
    if (start >= cloud.size()) throw Error("farthest point sampling: start index out of range");

    std::vector<double> dist(cloud.size(), std::numeric_limits<double>::infinity());
    chosen.reserve(q);
    std::size_t current = start;
    for (std::size_t k = 0; k < q; ++k) {
        chosen.push_back(current);
        const Point3 p = cloud[current];
        std::size_t next = 0;
        double far = -1.0;
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            dist[i] = std::min(dist[i], (cloud[i] - p).squaredNorm());
            if (dist[i] > far) {
                far = dist[i];
                next = i;
            }
        }
        current = next;
    }
    return chosen;
}

KernelSet farthest_point_sample_from(const PointCloud& cloud, std::size_t q, std::size_t start) {
    std::vector<Point3> pts;
    for (auto i : farthest_point_indices(cloud, q, start)) pts.push_back(cloud[i]);
    return KernelSet(std::move(pts));
}

KernelSet farthest_point_sample(const PointCloud& cloud, std::size_t q, std::uint64_t seed) {
    if (cloud.empty()) throw Error("farthest point sampling: empty point cloud");
    std::mt19937_64 rng(seed);
    const std::size_t start = std::size_t(rng() % cloud.size());
    return farthest_point_sample_from(cloud, q, start);
}

}  // namespace lisr
