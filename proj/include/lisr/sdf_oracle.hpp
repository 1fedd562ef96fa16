#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lisr/geom.hpp"

namespace lisr {

struct Sphere {
    Point3 center = Point3::Zero();
    double radius = 0.5;
};

struct Box {
    Point3 center = Point3::Zero();
    Point3 half_extents = Point3::Constant(0.5);
};

/// Torus around the z axis.
struct Torus {
    Point3 center = Point3::Zero();
    double major_radius = 0.5;
    double minor_radius = 0.2;
};

using AnalyticShape = std::variant<Sphere, Box, Torus>;

/// Throws unless every radius / half-extent is positive and finite.
void validate(const AnalyticShape& shape);

/// Parses `sphere:r`, `box:hx,hy,hz` (or `box:h`) and `torus:R,r`, each optionally
/// followed by `@cx,cy,cz` for the center.
AnalyticShape parse_shape(const std::string& text);
std::string to_string(const AnalyticShape& shape);

/// Exact signed distance, negative inside.
double analytic_sdf(const AnalyticShape& shape, const Point3& x);

/// Area-uniform samples on the surface of the shape.
PointCloud sample_analytic_surface(const AnalyticShape& shape, std::size_t count,
                                   std::uint64_t seed);

/// Signed distance to a triangle mesh.
///
/// The magnitude is the exact distance to the closest triangle (BVH accelerated). The
/// sign comes from a majority vote of ray-parity tests along three fixed directions;
/// a ray passing within 1e-12 of a triangle edge is re-cast in a jittered direction.
/// Meshes that are not closed 2-manifolds cannot be signed: construction throws in
/// strict mode, otherwise the evaluator returns unsigned distances and `is_signed()`
/// is false.
class MeshSdf {
public:
    explicit MeshSdf(TriangleMesh mesh, bool strict = true);
    ~MeshSdf();
    MeshSdf(MeshSdf&&) noexcept;
    MeshSdf& operator=(MeshSdf&&) noexcept;

    double operator()(const Point3& x) const;
    double unsigned_distance(const Point3& x) const;
    bool inside(const Point3& x) const;

    bool is_signed() const { return signed_; }
    const TriangleMesh& mesh() const { return mesh_; }

private:
    struct Bvh;

    TriangleMesh mesh_;
    std::unique_ptr<Bvh> bvh_;
    bool signed_ = true;
};

/// True when every edge is shared by exactly two triangles. Coincident vertices are
/// welded first.
bool is_closed_manifold(const TriangleMesh& mesh);

double mesh_sdf(const MeshSdf& oracle, const Point3& x);

struct SdfSample {
    Point3 x;
    double s = 0.0;
};

using SampleSet = std::vector<SdfSample>;

SampleSet sample_gt(const AnalyticShape& shape, std::span<const Point3> queries);
SampleSet sample_gt(const MeshSdf& oracle, std::span<const Point3> queries);

/// Writes `x,y,z,sdf` CSV with 17 significant digits.
void write_samples_csv(const SampleSet& samples, const std::filesystem::path& path);
SampleSet read_samples_csv(const std::filesystem::path& path);

}  // namespace lisr
