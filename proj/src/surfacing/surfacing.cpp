#include <cmath>
#include <unordered_map>

#include <fmt/format.h>

#include "lisr/surfacing.hpp"
#include "common/parallel.hpp"
#include "mc_tables.hpp"

namespace lisr {

namespace {

constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdgeCorners[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                                     {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

struct NodeGrid {
    std::size_t n;
    std::vector<double> values;
    std::vector<std::size_t> support;  // empty unless cells are tracked

    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return i + n * (j + n * k); }
};

void check_finite(double v, std::size_t i, std::size_t j, std::size_t k) {
    if (!std::isfinite(v)) throw Error(fmt::format("isosurface: non-finite field value at grid node ({}, {}, {})", i, j, k));
}

IsoSurface march(const NodeGrid& grid, const GridSpec& spec) {
    const std::size_t n = grid.n;
    IsoSurface out;
    std::unordered_map<std::uint64_t, int> edge_vertex;
    std::vector<char> vertex_crosses;

    auto vertex_on_edge = [&](std::size_t a, std::size_t b, const Point3& pa, const Point3& pb) {
        if (a > b) return -1;  // callers pass the lower node first
        const std::size_t diff = b - a;
        const int axis = diff == 1 ? 0 : (diff == n ? 1 : 2);
        const std::uint64_t key = std::uint64_t(a) * 3 + std::uint64_t(axis);
        if (auto it = edge_vertex.find(key); it != edge_vertex.end()) return it->second;
        const double va = grid.values[a], vb = grid.values[b];
        const double t = (spec.iso - va) / (vb - va);
        const int id = int(out.mesh.vertices.size());
        out.mesh.vertices.push_back(pa + t * (pb - pa));
        vertex_crosses.push_back(!grid.support.empty() && grid.support[a] != grid.support[b]);
        edge_vertex.emplace(key, id);
        return id;
    };

    for (std::size_t k = 0; k + 1 < n; ++k)
        for (std::size_t j = 0; j + 1 < n; ++j)
            for (std::size_t i = 0; i + 1 < n; ++i) {
                std::size_t node[8];
                int cube = 0;
                for (int c = 0; c < 8; ++c) {
                    node[c] = grid.index(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]);
                    if (grid.values[node[c]] < spec.iso) cube |= 1 << c;
                }
                if (mc::kEdgeTable[cube] == 0) continue;

                int vid[12];
                for (int e = 0; e < 12; ++e) {
                    if (!(mc::kEdgeTable[cube] & (1 << e))) continue;
                    int c0 = kEdgeCorners[e][0], c1 = kEdgeCorners[e][1];
                    if (node[c0] > node[c1]) std::swap(c0, c1);
                    const Point3 p0 = spec.node(i + kCorner[c0][0], j + kCorner[c0][1], k + kCorner[c0][2]);
                    const Point3 p1 = spec.node(i + kCorner[c1][0], j + kCorner[c1][1], k + kCorner[c1][2]);
                    vid[e] = vertex_on_edge(node[c0], node[c1], p0, p1);
                }
                for (int t = 0; mc::kTriTable[cube][t] != -1; t += 3) {
                    // The tables wind triangles clockwise seen from the outside; flip them.
                    const std::array<int, 3> tri{vid[mc::kTriTable[cube][t]], vid[mc::kTriTable[cube][t + 2]],
                                                 vid[mc::kTriTable[cube][t + 1]]};
                    out.mesh.triangles.push_back(tri);
                    if (out.mesh.triangle_area(out.mesh.triangles.size() - 1) <= 0.0) {
                        out.mesh.triangles.pop_back();
                        continue;
                    }
                    if (vertex_crosses[tri[0]] || vertex_crosses[tri[1]] || vertex_crosses[tri[2]])
                        ++out.cross_cell_triangles;
                }
            }

    // Drop vertices orphaned by degenerate triangles.
    std::vector<int> remap(out.mesh.vertices.size(), -1);
    std::vector<Point3> used;
    for (auto& tri : out.mesh.triangles)
        for (auto& v : tri) {
            if (remap[v] < 0) {
                remap[v] = int(used.size());
                used.push_back(out.mesh.vertices[v]);
            }
            v = remap[v];
        }
    out.mesh.vertices = std::move(used);
    return out;
}

}  // namespace

void GridSpec::validate() const {
    if (resolution < 8) throw Error(fmt::format("grid resolution {} below minimum 8", resolution));
    if (!bounds.valid() || !((bounds.extent().array() > 0.0).all()))
        throw Error("grid bounds are degenerate");
    if (!std::isfinite(iso)) throw Error("iso value must be finite");
}

Point3 GridSpec::node(std::size_t i, std::size_t j, std::size_t k) const {
    const double last = double(resolution - 1);
    const Point3 f(double(i) / last, double(j) / last, double(k) / last);
    return bounds.min + f.cwiseProduct(bounds.extent());
}

IsoSurface extract_isosurface(const ScalarField& field, const GridSpec& spec) {
    spec.validate();
    NodeGrid grid{spec.resolution, std::vector<double>(spec.resolution * spec.resolution * spec.resolution), {}};
    const std::size_t n = spec.resolution;
    detail::parallel_for(n, [&](std::size_t k) {
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) {
                const double v = field(spec.node(i, j, k));
                check_finite(v, i, j, k);
                grid.values[grid.index(i, j, k)] = v;
            }
    });
    return march(grid, spec);
}

IsoSurface extract_isosurface(const ImplicitModel& model, const GridSpec& spec) {
    spec.validate();
    const std::size_t n = spec.resolution;
    const bool cells = model.kind() == BasisKind::CSRBF;
    NodeGrid grid{n, std::vector<double>(n * n * n), {}};
    if (cells) grid.support.resize(n * n * n);
    const KernelSet& kernels = model.kernels();
    detail::parallel_for(n, [&](std::size_t k) {
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) {
                const Point3 x = spec.node(i, j, k);
                const std::size_t idx = grid.index(i, j, k);
                double v;
                if (cells) {
                    const std::size_t c = kernels.nearest(x);
                    grid.support[idx] = c;
                    v = cubic_gradient(x - kernels[c]).dot(model.alpha().segment<3>(Eigen::Index(3 * c)));
                } else {
                    v = eval_sdf(model, x);
                }
                check_finite(v, i, j, k);
                grid.values[idx] = v;
            }
    });
    return march(grid, spec);
}

}  // namespace lisr
