#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace lisr {

using Point3 = Eigen::Vector3d;
using PointCloud = std::vector<Point3>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number of the bad record.
class ParseError : public Error {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what);

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct TriangleMesh {
    std::vector<Point3> vertices;
    std::vector<std::array<int, 3>> triangles;

    bool empty() const { return triangles.empty(); }
    double triangle_area(std::size_t t) const;
};

struct Aabb {
    Point3 min = Point3::Constant(std::numeric_limits<double>::infinity());
    Point3 max = Point3::Constant(-std::numeric_limits<double>::infinity());

    static Aabb of(const std::vector<Point3>& points);
    static Aabb cube(double half_extent) {
        return {Point3::Constant(-half_extent), Point3::Constant(half_extent)};
    }

    void extend(const Point3& p) {
        min = min.cwiseMin(p);
        max = max.cwiseMax(p);
    }
    bool valid() const { return (min.array() <= max.array()).all(); }
    Point3 center() const { return 0.5 * (min + max); }
    Point3 extent() const { return max - min; }
    bool contains(const Point3& p, double tol = 0.0) const {
        return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
    }
};

/// Isotropic similarity y = scale * (x + translation).
struct NormalizeTransform {
    double scale = 1.0;
    Point3 translation = Point3::Zero();

    Point3 apply(const Point3& x) const { return scale * (x + translation); }
    Point3 invert(const Point3& y) const { return y / scale - translation; }
    PointCloud apply(const PointCloud& cloud) const;
    PointCloud invert(const PointCloud& cloud) const;
};

inline constexpr double kDefaultNormalizeMargin = 0.95;

/// Centers the bounding box at the origin and scales so the largest half-extent equals
/// `margin`. Throws when all points coincide.
std::pair<PointCloud, NormalizeTransform> normalize_to_unit_cube(
    const PointCloud& cloud, double margin = kDefaultNormalizeMargin);

// ---------------------------------------------------------------------------
// File IO

/// Reads vertex positions from `.xyz`, `.obj` (v records) or ascii `.ply`.
PointCloud load_point_cloud(const std::filesystem::path& path);

struct MeshLoadStats {
    std::size_t degenerate_dropped = 0;
    std::size_t quads_split = 0;
};

/// Reads an `.obj` or ascii `.ply` triangle mesh. Polygons are fan-triangulated and
/// zero-area triangles are dropped.
TriangleMesh load_mesh(const std::filesystem::path& path, MeshLoadStats* stats = nullptr);

void write_obj(const TriangleMesh& mesh, const std::filesystem::path& path);
void write_xyz(const PointCloud& cloud, const std::filesystem::path& path);

/// Decimal text with 17 significant digits, enough to round-trip any double.
std::string format_real(double v);

}  // namespace lisr
