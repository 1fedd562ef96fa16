#include <cmath>

#include "lisr/geom.hpp"

namespace lisr {

double TriangleMesh::triangle_area(std::size_t t) const {
    const auto& tri = triangles[t];
    const Point3& a = vertices[tri[0]];
    return 0.5 * (vertices[tri[1]] - a).cross(vertices[tri[2]] - a).norm();
}

Aabb Aabb::of(const std::vector<Point3>& points) {
    Aabb box;
    for (const auto& p : points) box.extend(p);
    return box;
}

PointCloud NormalizeTransform::apply(const PointCloud& cloud) const {
    PointCloud out;
    out.reserve(cloud.size());
    for (const auto& p : cloud) out.push_back(apply(p));
    return out;
}

PointCloud NormalizeTransform::invert(const PointCloud& cloud) const {
    PointCloud out;
    out.reserve(cloud.size());
    for (const auto& p : cloud) out.push_back(invert(p));
    return out;
}

std::pair<PointCloud, NormalizeTransform> normalize_to_unit_cube(const PointCloud& cloud,
                                                                 double margin) {
    if (cloud.empty()) throw Error("normalize: empty point cloud");
    if (!(margin > 0.0 && margin <= 1.0)) throw Error("normalize: margin must lie in (0, 1]");
    const Aabb box = Aabb::of(cloud);
    const double half = 0.5 * box.extent().maxCoeff();
    if (!(half > 0.0)) throw Error("normalize: point cloud has zero extent");

    NormalizeTransform t;
    t.translation = -box.center();
    t.scale = margin / half;
    return {t.apply(cloud), t};
}

}  // namespace lisr
