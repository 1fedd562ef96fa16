#pragma once

#include <cstddef>
#include <functional>

#include "lisr/basis.hpp"
#include "lisr/geom.hpp"

namespace lisr {

struct GridSpec {
    /// Grid nodes per axis.
    std::size_t resolution = 128;
    Aabb bounds = Aabb::cube(1.0);
    double iso = 0.0;

    void validate() const;
    double spacing(int axis) const { return bounds.extent()[axis] / double(resolution - 1); }
    Point3 node(std::size_t i, std::size_t j, std::size_t k) const;
};

struct IsoSurface {
    TriangleMesh mesh;
    /// Triangles with at least one vertex on a grid edge whose endpoints lie in different
    /// Voronoi cells (CSRBF models only, zero otherwise).
    std::size_t cross_cell_triangles = 0;
};

using ScalarField = std::function<double(const Point3&)>;

/// Marching cubes over the grid nodes. Vertices are linearly interpolated along cube
/// edges and shared between neighbouring cubes; triangles are emitted in cube order.
/// Throws on a non-finite field value.
IsoSurface extract_isosurface(const ScalarField& field, const GridSpec& grid);

/// Extraction of a fitted model's zero set, in the model's own domain.
IsoSurface extract_isosurface(const ImplicitModel& model, const GridSpec& grid);

}  // namespace lisr
