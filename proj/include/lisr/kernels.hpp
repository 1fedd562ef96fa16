#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "lisr/geom.hpp"

namespace lisr {

enum class Norm { L1, L2 };

/// Static kd-tree over a point set with exact nearest-neighbour queries.
///
/// Among points at exactly the same distance the one with the smallest index is
/// reported, so results match a brute-force scan bit for bit.
class KdTree {
public:
    struct Hit {
        std::size_t index = 0;
        double distance = 0.0;
    };

    KdTree() = default;
    explicit KdTree(std::vector<Point3> points);

    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    const std::vector<Point3>& points() const { return points_; }

    /// Nearest point under `norm`. `exclude` skips one index (self queries).
    Hit nearest(const Point3& x, Norm norm = Norm::L2,
                std::optional<std::size_t> exclude = std::nullopt) const;

private:
    struct Node {
        // Leaf when axis < 0: [begin, end) indexes into order_.
        int axis = -1;
        double split = 0.0;
        std::uint32_t begin = 0, end = 0;
        std::uint32_t left = 0, right = 0;
    };

    std::uint32_t build(std::uint32_t begin, std::uint32_t end);
    void search(std::uint32_t node, const Point3& x, Norm norm, std::optional<std::size_t> exclude,
                Hit& best, double& best_key) const;

    std::vector<Point3> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

/// Minimum separation below which two kernels count as duplicates.
inline constexpr double kMinKernelSeparation = 1e-9;

/// The basis kernel points p_1..p_q. Their Voronoi cells are the local supports of the
/// compactly supported basis; membership is decided by `nearest`.
class KernelSet {
public:
    /// Throws on an empty set, non-finite coordinates or two kernels closer than
    /// kMinKernelSeparation.
    explicit KernelSet(std::vector<Point3> kernels);

    std::size_t size() const { return index_.size(); }
    const Point3& operator[](std::size_t i) const { return index_.points()[i]; }
    const std::vector<Point3>& points() const { return index_.points(); }

    /// Index of the kernel closest to x; ties go to the smallest index.
    std::size_t nearest(const Point3& x) const { return index_.nearest(x).index; }

    /// Distance from kernel i to its closest other kernel (infinity when q == 1).
    double nearest_other_distance(std::size_t i) const;

private:
    KdTree index_;
};

inline std::size_t nearest_kernel(const Point3& x, const KernelSet& kernels) {
    return kernels.nearest(x);
}

/// Greedy farthest-point subsampling starting at `start`. Returns indices into `cloud`
/// in selection order; returns all indices when q >= cloud.size().
std::vector<std::size_t> farthest_point_indices(const PointCloud& cloud, std::size_t q,
                                                std::size_t start);

/// Farthest-point sampling whose start point is drawn from `seed`.
KernelSet farthest_point_sample(const PointCloud& cloud, std::size_t q, std::uint64_t seed);

/// Same as above with an explicit start index.
KernelSet farthest_point_sample_from(const PointCloud& cloud, std::size_t q, std::size_t start);

}  // namespace lisr
