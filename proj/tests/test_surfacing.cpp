#include <gtest/gtest.h>

#include <map>
#include <set>

#include "lisr/metrics.hpp"
#include "lisr/query.hpp"
#include "lisr/solver.hpp"
#include "lisr/surfacing.hpp"
#include "test_util.hpp"

using namespace lisr;

namespace {

ScalarField field_of(const AnalyticShape& shape) {
    return [shape](const Point3& x) { return analytic_sdf(shape, x); };
}

ImplicitModel fitted_sphere_model(std::size_t q, std::uint64_t seed) {
    const AnalyticShape sphere = Sphere{};
    const auto cloud = sample_analytic_surface(sphere, 5 * q, seed);
    auto kernels = farthest_point_sample(cloud, q, seed + 1);
    const auto qs = select_query_points_fast(kernels);
    const auto vt = assemble_design_matrix(BasisKind::CSRBF, kernels, qs.points);
    return ImplicitModel(BasisKind::CSRBF, kernels, closed_form_solve(vt, targets(sample_gt(sphere, qs.points))),
                         qs.epsilon);
}

}  // namespace

TEST(GridSpec, Validation) {
    GridSpec g;
    EXPECT_EQ(g.resolution, 128u);
    EXPECT_NO_THROW(g.validate());
    g.resolution = 7;
    EXPECT_THROW(g.validate(), Error);
    g.resolution = 8;
    g.bounds = Aabb{Point3(0, 0, 0), Point3(1, 0, 1)};
    EXPECT_THROW(g.validate(), Error);
}

TEST(GridSpec, NodesSpanBounds) {
    GridSpec g;
    g.resolution = 9;
    EXPECT_EQ(g.node(0, 0, 0), Point3(-1, -1, -1));
    EXPECT_EQ(g.node(8, 8, 8), Point3(1, 1, 1));
    EXPECT_EQ(g.node(4, 0, 8), Point3(0, -1, 1));
    EXPECT_EQ(g.spacing(0), 0.25);
}

TEST(ExtractIsosurface, AnalyticSphereVertexRadii) {
    GridSpec g;
    g.resolution = 64;
    const auto iso = extract_isosurface(field_of(Sphere{}), g);
    ASSERT_FALSE(iso.mesh.empty());
    for (const auto& v : iso.mesh.vertices) {
        EXPECT_GE(v.norm(), 0.48);
        EXPECT_LE(v.norm(), 0.52);
    }
    EXPECT_EQ(iso.cross_cell_triangles, 0u);
}

TEST(ExtractIsosurface, ConstantFieldIsEmpty) {
    GridSpec g;
    g.resolution = 16;
    const auto iso = extract_isosurface([](const Point3&) { return 1.0; }, g);
    EXPECT_TRUE(iso.mesh.vertices.empty());
    EXPECT_TRUE(iso.mesh.triangles.empty());
}

TEST(ExtractIsosurface, NonFiniteValueReportsNode) {
    GridSpec g;
    g.resolution = 8;
    try {
        extract_isosurface([&](const Point3& x) { return x == g.node(3, 5, 6) ? std::nan("") : 1.0; }, g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("(3, 5, 6)"), std::string::npos) << e.what();
    }
}

TEST(ExtractIsosurface, VerticesOnStraddlingEdges) {
    const AnalyticShape torus = Torus{Point3(0.05, -0.02, 0.01), 0.5, 0.2};
    GridSpec g;
    g.resolution = 40;
    const auto iso = extract_isosurface(field_of(torus), g);
    ASSERT_FALSE(iso.mesh.empty());
    const double h = g.spacing(0);
    for (const auto& v : iso.mesh.vertices) {
        // The vertex shares two coordinates with grid nodes; find its edge endpoints.
        Eigen::Vector3d f = (v - g.bounds.min) / h;
        int axis = -1;
        Eigen::Vector3i lo;
        for (int a = 0; a < 3; ++a) {
            const double r = std::round(f[a]);
            if (std::abs(f[a] - r) < 1e-9) {
                lo[a] = int(r);
            } else {
                ASSERT_EQ(axis, -1) << "vertex off grid edges";
                axis = a;
                lo[a] = int(std::floor(f[a]));
            }
        }
        if (axis < 0) continue;  // vertex exactly on a node
        Eigen::Vector3i hi = lo;
        hi[axis] += 1;
        const double va = analytic_sdf(torus, g.node(lo[0], lo[1], lo[2]));
        const double vb = analytic_sdf(torus, g.node(hi[0], hi[1], hi[2]));
        EXPECT_TRUE((va < 0) != (vb < 0));
    }
}

TEST(ExtractIsosurface, WatertightAndOutwardOriented) {
    GridSpec g;
    g.resolution = 32;
    const auto iso = extract_isosurface(field_of(Sphere{Point3(0.03, 0.01, -0.02), 0.6}), g);
    std::map<std::pair<int, int>, int> directed;
    double outward = 0.0;
    for (std::size_t t = 0; t < iso.mesh.triangles.size(); ++t) {
        const auto& tri = iso.mesh.triangles[t];
        for (int e = 0; e < 3; ++e) ++directed[{tri[e], tri[(e + 1) % 3]}];
        const auto& v = iso.mesh.vertices;
        const Point3 n = (v[tri[1]] - v[tri[0]]).cross(v[tri[2]] - v[tri[0]]);
        if (n.dot(v[tri[0]] - Point3(0.03, 0.01, -0.02)) > 0) outward += 1;
    }
    // Each directed edge appears once and its reverse once: closed, consistently wound.
    for (const auto& [edge, count] : directed) {
        EXPECT_EQ(count, 1);
        EXPECT_EQ(directed.count({edge.second, edge.first}), 1u);
    }
    EXPECT_EQ(outward, double(iso.mesh.triangles.size()));
}

TEST(ExtractIsosurface, Deterministic) {
    GridSpec g;
    g.resolution = 24;
    const auto a = extract_isosurface(field_of(Torus{}), g), b = extract_isosurface(field_of(Torus{}), g);
    EXPECT_EQ(a.mesh.vertices, b.mesh.vertices);
    EXPECT_EQ(a.mesh.triangles, b.mesh.triangles);
}

TEST(ExtractIsosurface, NonDefaultBoundsAndIso) {
    GridSpec g;
    g.resolution = 30;
    g.bounds = Aabb{Point3(0, 0, 0), Point3(2, 2, 2)};
    g.iso = 0.1;
    const auto iso = extract_isosurface(field_of(Sphere{Point3(1, 1, 1), 0.5}), g);
    for (const auto& v : iso.mesh.vertices) EXPECT_NEAR((v - Point3(1, 1, 1)).norm(), 0.6, 0.02);
}

TEST(ExtractIsosurface, ModelOverloadMatchesField) {
    const auto model = fitted_sphere_model(150, 3);
    GridSpec g;
    g.resolution = 20;
    const auto a = extract_isosurface(model, g);
    const auto b = extract_isosurface([&](const Point3& x) { return eval_sdf(model, x); }, g);
    EXPECT_EQ(a.mesh.vertices, b.mesh.vertices);
    EXPECT_EQ(a.mesh.triangles, b.mesh.triangles);
    EXPECT_GT(a.cross_cell_triangles, 0u);
    EXPECT_EQ(b.cross_cell_triangles, 0u);
}

TEST(ExtractIsosurface, ZeroModelIsEmpty) {
    KernelSet k(test::random_cloud(20, 4));
    ImplicitModel zero(BasisKind::CSRBF, k, Eigen::VectorXd::Zero(60));
    GridSpec g;
    g.resolution = 16;
    EXPECT_TRUE(extract_isosurface(zero, g).mesh.empty());
}

TEST(ExtractIsosurface, FinerGridDoesNotIncreaseChamfer) {
    const AnalyticShape sphere = Sphere{};
    const auto gt = sample_analytic_surface(sphere, 50000, 5);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t res : {16u, 32u, 64u}) {
        GridSpec g;
        g.resolution = res;
        const auto iso = extract_isosurface(field_of(sphere), g);
        const double cd = chamfer_l1(sample_surface(iso.mesh, 50000, 6), gt);
        EXPECT_LE(cd, prev) << "resolution " << res;
        prev = cd;
    }
}
