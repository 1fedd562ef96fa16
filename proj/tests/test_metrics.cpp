#include <gtest/gtest.h>

#include "lisr/metrics.hpp"
#include "test_util.hpp"

using namespace lisr;

namespace {

// Direct double loop over both sets, summed in input order.
double brute_chamfer(const PointCloud& a, const PointCloud& b) {
    auto directed = [](const PointCloud& from, const PointCloud& to) {
        double sum = 0.0;
        for (const auto& x : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& y : to) best = std::min(best, (x - y).lpNorm<1>());
            sum += best;
        }
        return sum / double(from.size());
    };
    return directed(a, b) + directed(b, a);
}

}  // namespace

TEST(ChamferL1, SelfDistanceIsZero) {
    const auto a = test::random_cloud(500, 1);
    EXPECT_EQ(chamfer_l1(a, a), 0.0);
}

TEST(ChamferL1, TwoSingletons) {
    EXPECT_EQ(chamfer_l1({Point3(0, 0, 0)}, {Point3(1, 0, 0)}), 2.0);
    EXPECT_EQ(chamfer_l1({Point3(0, 0, 0)}, {Point3(1, 0, 0)}, ChamferMode::Mean), 1.0);
}

TEST(ChamferL1, ThreeVersusTwoMatchesBruteForce) {
    const PointCloud a = {Point3(0, 0, 0), Point3(1, 2, 3), Point3(-1, 0.5, 0.25)};
    const PointCloud b = {Point3(0.1, 0.2, 0.3), Point3(2, 2, 2)};
    EXPECT_EQ(chamfer_l1(a, b), brute_chamfer(a, b));
}

TEST(ChamferL1, MatchesBruteForceExactly) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto a = test::random_cloud(1 + seed * 5, seed), b = test::random_cloud(100 - seed * 3, 50 + seed);
        EXPECT_EQ(chamfer_l1(a, b), brute_chamfer(a, b));
    }
}

TEST(ChamferL1, SymmetricAndZeroOnlyForCoincidentSets) {
    const auto a = test::random_cloud(80, 3), b = test::random_cloud(60, 4);
    EXPECT_EQ(chamfer_l1(a, b), chamfer_l1(b, a));
    // Duplicated points still coincide with the other set.
    auto dup = a;
    dup.insert(dup.end(), a.begin(), a.begin() + 10);
    EXPECT_EQ(chamfer_l1(a, dup), 0.0);
    auto moved = a;
    moved[7].x() += 1e-9;
    EXPECT_GT(chamfer_l1(a, moved), 0.0);
}

TEST(ChamferL1, EmptyRejected) {
    EXPECT_THROW(chamfer_l1({}, {Point3(0, 0, 0)}), Error);
    EXPECT_THROW(chamfer_l1({Point3(0, 0, 0)}, {}), Error);
}

TEST(FScore, CoincidentSets) {
    const auto a = test::random_cloud(300, 5);
    const auto r = f_score(a, a);
    EXPECT_EQ(r.precision, 1.0);
    EXPECT_EQ(r.recall, 1.0);
    EXPECT_EQ(r.f_score, 1.0);
    EXPECT_EQ(r.chamfer_l1, 0.0);
    EXPECT_EQ(r.tau, 0.02);
}

TEST(FScore, SeparatedSets) {
    auto a = test::random_cloud(50, 6, -0.1, 0.1);
    auto b = a;
    for (auto& p : b) p.x() += 1.0;
    const auto r = f_score(a, b, 0.02);
    EXPECT_EQ(r.f_score, 0.0);
    EXPECT_EQ(r.precision, 0.0);
}

TEST(FScore, OneOutlier) {
    auto gt = test::random_cloud(10, 7, -0.5, 0.5);
    auto pred = gt;
    pred.emplace_back(5, 5, 5);
    const auto r = f_score(pred, gt, 0.02);
    EXPECT_DOUBLE_EQ(r.precision, 10.0 / 11.0);
    EXPECT_EQ(r.recall, 1.0);
    EXPECT_DOUBLE_EQ(r.f_score, 20.0 / 21.0);
    EXPECT_EQ(r.n_pred, 11u);
    EXPECT_EQ(r.n_gt, 10u);
}

TEST(FScore, MonotoneInTau) {
    const auto a = test::random_cloud(400, 8), b = test::random_cloud(300, 9);
    double prev = -1.0;
    for (double tau : {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0}) {
        const auto r = f_score(a, b, tau);
        EXPECT_GE(r.f_score, prev);
        prev = r.f_score;
    }
}

TEST(FScore, HarmonicMeanInvariant) {
    const auto a = test::random_cloud(200, 10), b = test::random_cloud(250, 11);
    const auto r = f_score(a, b, 0.2);
    ASSERT_GT(r.precision + r.recall, 0.0);
    EXPECT_DOUBLE_EQ(r.f_score, 2 * r.precision * r.recall / (r.precision + r.recall));
}

TEST(FScore, BadArguments) {
    const auto a = test::random_cloud(5, 12);
    EXPECT_THROW(f_score(a, a, 0.0), Error);
    EXPECT_THROW(f_score({}, a), Error);
}

TEST(MetricReport, CsvHeader) {
    EXPECT_EQ(MetricReport::csv_header(), "chamfer_l1,f_score,precision,recall,tau,n_pred,n_gt");
    const auto a = test::random_cloud(5, 13);
    EXPECT_EQ(f_score(a, a).csv_row(), "0,1,1,1,0.02,5,5");
}

TEST(SampleSurface, UniformAndDeterministic) {
    const auto cube = test::cube_mesh(0.5);
    const auto pts = sample_surface(cube, 60000, 14);
    EXPECT_EQ(pts, sample_surface(cube, 60000, 14));
    int top = 0;
    for (const auto& p : pts) {
        EXPECT_NEAR(p.cwiseAbs().maxCoeff(), 0.5, 1e-12);
        if (p.z() > 0.5 - 1e-12) ++top;
    }
    EXPECT_NEAR(top / 60000.0, 1.0 / 6.0, 0.01);
    EXPECT_THROW(sample_surface(TriangleMesh{}, 10, 1), Error);
}
