#include <gtest/gtest.h>

#include <random>

#include "lisr/query.hpp"
#include "lisr/sdf_oracle.hpp"
#include "test_util.hpp"

using namespace lisr;

TEST(AnalyticSdf, SphereExamples) {
    const AnalyticShape s = Sphere{Point3::Zero(), 0.5};
    EXPECT_EQ(analytic_sdf(s, Point3(0, 0, 0)), -0.5);
    EXPECT_EQ(analytic_sdf(s, Point3(0.5, 0, 0)), 0.0);
    EXPECT_EQ(analytic_sdf(s, Point3(1, 0, 0)), 0.5);
}

TEST(AnalyticSdf, BoxAndTorus) {
    const AnalyticShape b = Box{Point3::Zero(), Point3(0.5, 0.25, 0.5)};
    EXPECT_EQ(analytic_sdf(b, Point3(0, 0, 0)), -0.25);
    EXPECT_NEAR(analytic_sdf(b, Point3(1, 1.25, 0)), std::sqrt(0.25 + 1.0), 1e-15);
    const AnalyticShape t = Torus{Point3::Zero(), 0.5, 0.2};
    EXPECT_NEAR(analytic_sdf(t, Point3(0.5, 0, 0)), -0.2, 1e-15);
    EXPECT_NEAR(analytic_sdf(t, Point3(0, 0, 0)), 0.3, 1e-15);
}

TEST(AnalyticSdf, UnitGradientAwayFromMedialAxis) {
    const AnalyticShape s = Sphere{Point3(0.1, -0.2, 0.05), 0.5};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double h = 1e-6;
    int checked = 0;
    while (checked < 500) {
        const Point3 x(u(rng), u(rng), u(rng));
        if (analytic_sdf(s, x) <= 0.05) continue;
        Point3 g;
        for (int a = 0; a < 3; ++a) {
            Point3 e = Point3::Zero();
            e[a] = h;
            g[a] = (analytic_sdf(s, x + e) - analytic_sdf(s, x - e)) / (2 * h);
        }
        EXPECT_NEAR(g.norm(), 1.0, 1e-6);
        ++checked;
    }
}

TEST(ParseShape, RoundTrip) {
    for (const char* text : {"sphere:0.5", "box:0.25,0.5,0.75", "torus:0.5,0.2", "sphere:0.3@0.1,0.2,0.3"}) {
        const auto shape = parse_shape(text);
        EXPECT_EQ(to_string(parse_shape(to_string(shape))), to_string(shape));
    }
    EXPECT_EQ(to_string(parse_shape("box:0.5")), "box:0.5,0.5,0.5");
    EXPECT_THROW(parse_shape("sphere:-1"), Error);
    EXPECT_THROW(parse_shape("cone:1"), Error);
    EXPECT_THROW(parse_shape("sphere"), Error);
}

TEST(SampleAnalyticSurface, PointsLieOnSurface) {
    for (const char* text : {"sphere:0.5", "box:0.3,0.4,0.5", "torus:0.5,0.2@0.1,0,0"}) {
        const auto shape = parse_shape(text);
        auto pts = sample_analytic_surface(shape, 2000, 9);
        ASSERT_EQ(pts.size(), 2000u);
        for (const auto& p : pts) EXPECT_NEAR(analytic_sdf(shape, p), 0.0, 1e-12) << text;
        EXPECT_EQ(pts, sample_analytic_surface(shape, 2000, 9));
    }
}

TEST(MeshSdf, CubeExamples) {
    MeshSdf cube(test::cube_mesh(0.5));
    EXPECT_TRUE(cube.is_signed());
    EXPECT_NEAR(cube(Point3(0, 0, 0)), -0.5, 1e-15);
    EXPECT_NEAR(cube(Point3(1, 0, 0)), 0.5, 1e-15);
    EXPECT_EQ(cube(Point3(0.5, 0, 0)), 0.0);
}

TEST(MeshSdf, CubeMatchesAnalyticBox) {
    MeshSdf cube(test::cube_mesh(0.5));
    const AnalyticShape box = Box{Point3::Zero(), Point3::Constant(0.5)};
    for (const auto& x : test::random_cloud(3000, 21, -1.2, 1.2)) EXPECT_NEAR(cube(x), analytic_sdf(box, x), 1e-12);
}

TEST(MeshSdf, AlgorithmTwoPointsMatchAnalyticBox) {
    MeshSdf cube(test::cube_mesh(0.5));
    const AnalyticShape box = Box{Point3::Zero(), Point3::Constant(0.5)};
    KernelSet kernels({Point3(0.5, 0.1, -0.2)});
    const auto qs = select_query_points_with_epsilon(kernels, 0.1);
    const auto a = sample_gt(cube, qs.points), b = sample_gt(box, qs.points);
    ASSERT_EQ(a.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a[i].s, b[i].s, 1e-9);
}

TEST(MeshSdf, IcosphereApproximatesSphere) {
    auto ico = test::icosphere(0.5, 3);
    ASSERT_EQ(ico.triangles.size(), 1280u);
    MeshSdf oracle(ico);
    const AnalyticShape s = Sphere{Point3::Zero(), 0.5};
    double worst = 0.0;
    for (const auto& x : test::random_cloud(1000, 4)) worst = std::max(worst, std::abs(oracle(x) - analytic_sdf(s, x)));
    EXPECT_LE(worst, 0.01);
}

TEST(MeshSdf, SignChangesOnceAcrossFace) {
    MeshSdf cube(test::cube_mesh(0.5));
    const Point3 a(0.2, 0.13, 0.07), b(0.9, 0.31, -0.05);
    int changes = 0;
    double prev = cube(a);
    for (int i = 1; i <= 1000; ++i) {
        const double v = cube(a + (b - a) * (double(i) / 1000.0));
        if ((v < 0) != (prev < 0)) ++changes;
        prev = v;
    }
    EXPECT_EQ(changes, 1);
}

TEST(MeshSdf, EdgeAndVertexAlignedRays) {
    // Points whose axis-aligned rays would graze cube edges must still be signed correctly.
    MeshSdf cube(test::cube_mesh(0.5));
    EXPECT_LT(cube(Point3(0, 0, 0)), 0.0);
    EXPECT_LT(cube(Point3(0.25, 0.25, 0.25)), 0.0);
    EXPECT_GT(cube(Point3(1, 1, 1)), 0.0);
    EXPECT_GT(cube(Point3(0.75, 0.5, 0.5)), 0.0);
}

TEST(MeshSdf, OpenMeshRefusedWhenStrict) {
    auto open = test::cube_mesh(0.5);
    open.triangles.pop_back();
    EXPECT_FALSE(is_closed_manifold(open));
    EXPECT_THROW(MeshSdf(open, true), Error);
    MeshSdf lenient(open, false);
    EXPECT_FALSE(lenient.is_signed());
    EXPECT_NEAR(lenient(Point3(0, 0, 0)), 0.5, 1e-15);
}

TEST(MeshSdf, ClosedManifoldAfterWelding) {
    // Per-face duplicated vertices, as exported by many tools.
    auto cube = test::cube_mesh(0.5);
    TriangleMesh split;
    for (const auto& t : cube.triangles) {
        const int base = int(split.vertices.size());
        for (int v : t) split.vertices.push_back(cube.vertices[v]);
        split.triangles.push_back({base, base + 1, base + 2});
    }
    EXPECT_TRUE(is_closed_manifold(split));
    EXPECT_TRUE(is_closed_manifold(test::icosphere(1.0, 2)));
}

TEST(SampleGt, Examples) {
    const AnalyticShape s = Sphere{Point3::Zero(), 0.5};
    const std::vector<Point3> q = {Point3(0, 0, 0), Point3(1, 0, 0)};
    auto samples = sample_gt(s, q);
    ASSERT_EQ(samples.size(), 2u);
    EXPECT_EQ(samples[0].s, -0.5);
    EXPECT_EQ(samples[1].s, 0.5);
    EXPECT_EQ(samples[1].x, q[1]);
    EXPECT_TRUE(sample_gt(s, std::vector<Point3>{}).empty());
}

TEST(SamplesCsv, RoundTripExact) {
    test::TempDir dir;
    const AnalyticShape s = Torus{};
    auto samples = sample_gt(s, test::random_cloud(100, 3));
    write_samples_csv(samples, dir / "s.csv");
    EXPECT_EQ(test::read_file(dir / "s.csv").substr(0, 9), "x,y,z,sdf");
    auto back = read_samples_csv(dir / "s.csv");
    ASSERT_EQ(back.size(), samples.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].x, samples[i].x);
        EXPECT_EQ(back[i].s, samples[i].s);
    }
}
