// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero when any
// checked criterion fails.

#include <chrono>
#include <iostream>
#include <random>
#include <sstream>

#include <Eigen/QR>
#include <fmt/format.h>

#include "lisr/cli.hpp"
#include "lisr/query.hpp"
#include "lisr/sdf_oracle.hpp"
#include "lisr/solver.hpp"
#include "test_util.hpp"

using namespace lisr;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    failures += !pass;
    std::cout << fmt::format("criterion {:>2}: {}  {}\n", id, pass ? "PASS" : "FAIL", detail) << std::flush;
}

KernelSet normalized_fps(const AnalyticShape& shape, std::size_t q, std::uint64_t seed) {
    const auto cloud = normalize_to_unit_cube(sample_analytic_surface(shape, 5000, seed)).first;
    return farthest_point_sample(cloud, q, seed + 1);
}

AnalyticShape random_shape(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Point3 c(0.2 * u(rng) - 0.1, 0.2 * u(rng) - 0.1, 0.2 * u(rng) - 0.1);
    switch (seed % 3) {
        case 0: return Sphere{c, 0.3 + 0.4 * u(rng)};
        case 1: return Box{c, Point3(0.2 + 0.4 * u(rng), 0.2 + 0.4 * u(rng), 0.2 + 0.4 * u(rng))};
        default: return Torus{c, 0.35 + 0.2 * u(rng), 0.1 + 0.15 * u(rng)};
    }
}

SampleSet ground_truth(const AnalyticShape& shape, const PointCloud& queries) { return sample_gt(shape, queries); }

void full_rank_and_gram_identity() {
    const auto t0 = Clock::now();
    const KernelSet kernels = normalized_fps(Torus{}, 1000, 1);
    const QuerySet qs = select_query_points_fast(kernels);
    const DesignMatrix vt = assemble_design_matrix(BasisKind::CSRBF, kernels, qs.points);
    const RankReport r = rank_of_gram(vt, 1e-10);
    const double t_block = seconds_since(t0);
    // Second route: SVD of the assembled dense matrix.
    const RankReport d = rank_of_gram_dense(vt, 1e-10);
    report(1, r.rank == 3000 && r.max_rank == 3000 && d.rank == 3000 && t_block < 60.0,
           fmt::format("CSRBF q=1000 algorithm2: rank {}/{} at rel_tol 1e-10 per block ({:.2f} s), {} by dense SVD "
                       "({:.1f} s)",
                       r.rank, r.max_rank, t_block, d.rank, seconds_since(t0) - t_block));

    // The constant first from a dense product of small systems, then on the full system.
    const double eps4 = std::pow(qs.epsilon, 4);
    double small_worst = 0.0;
    for (std::size_t q = 1; q <= 10; ++q) {
        const KernelSet k(test::random_cloud(q, 100 + q, -0.5, 0.5));
        const QuerySet sq = select_query_points_fast(k);
        const Eigen::MatrixXd v = assemble_design_matrix(BasisKind::CSRBF, k, sq.points).to_dense();
        const Eigen::MatrixXd g = v.transpose() * v;
        const Eigen::MatrixXd c = 9.0 * std::pow(sq.epsilon, 4) * Eigen::MatrixXd::Identity(g.rows(), g.cols());
        small_worst = std::max(small_worst, (g - c).norm() / c.norm());
    }
    const Eigen::MatrixXd g = vt.gram();
    const Eigen::MatrixXd c = 9.0 * eps4 * Eigen::MatrixXd::Identity(g.rows(), g.cols());
    const double err = (g - c).norm() / c.norm();
    const auto detected = detect_scaled_identity_gram(vt);
    const bool constant_ok = detected && std::abs(*detected / (9.0 * eps4) - 1.0) <= 1e-9;
    report(2, err <= 1e-9 && small_worst <= 1e-9 && constant_ok,
           fmt::format("|VV^T - 9 eps^4 I|_F / |9 eps^4 I|_F = {:.3g} at q=1000 (eps {:.6g}); dense q<=10 worst {:.3g}; "
                       "detected c / 9 eps^4 = {:.15g}",
                       err, qs.epsilon, small_worst, detected ? *detected / (9.0 * eps4) : 0.0));
}

struct RandomSystem {
    DesignMatrix vt;
    Eigen::VectorXd s;
};

RandomSystem random_csrbf_system(std::uint64_t seed) {
    const AnalyticShape shape = random_shape(seed);
    const KernelSet kernels = farthest_point_sample(sample_analytic_surface(shape, 3000, seed), 300, seed);
    const QuerySet qs = select_query_points_fast(kernels);
    return {assemble_design_matrix(BasisKind::CSRBF, kernels, qs.points), targets(ground_truth(shape, qs.points))};
}

void one_step() {
    double worst = 0.0;
    bool ok = true;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto [vt, s] = random_csrbf_system(seed);
        // Reference optimum from a dense factorization, independent of the scaled-identity shortcut.
        const Eigen::VectorXd star = vt.to_dense().completeOrthogonalDecomposition().solve(s);
        const FitReport gd = gd_fit(vt, s, GdOptions{std::nullopt, 1});
        const double err = (gd.alpha - star).norm() / (1.0 + star.norm());
        ok = ok && gd.iterations == 1 && err <= 1e-8;
        worst = std::max(worst, err);
    }
    report(3, ok,
           fmt::format("gd auto step, 1 iteration, 20 random shapes: worst |a1 - a*| / (1 + |a*|) = {:.3g} (a* by dense COD)", worst));
}

void interpolation() {
    const auto residual = [](const DesignMatrix& vt, const Eigen::VectorXd& s) {
        return (vt.multiply(closed_form_solve(vt, s)) - s).cwiseAbs().maxCoeff() / (1.0 + s.cwiseAbs().maxCoeff());
    };
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto [vt, s] = random_csrbf_system(seed);
        worst = std::max(worst, residual(vt, s));
    }
    const KernelSet kernels = normalized_fps(Sphere{}, 1000, 7);
    const QuerySet qs = select_query_points_fast(kernels);
    worst = std::max(worst, residual(assemble_design_matrix(BasisKind::CSRBF, kernels, qs.points),
                                     targets(ground_truth(Sphere{}, qs.points))));
    report(5, worst <= 1e-8,
           fmt::format("CSRBF closed form, max query residual / (1 + max|s|) = {:.3g} (20 shapes at q=300, sphere at "
                       "q=1000)",
                       worst));
}

void rank_deficiency_contrast() {
    const std::pair<const char*, AnalyticShape> shapes[] = {
        {"sphere", Sphere{}}, {"box", Box{}}, {"torus", Torus{}}};
    bool ok = true;
    std::string detail;
    for (const auto& [name, shape] : shapes) {
        const KernelSet kernels = normalized_fps(shape, 1000, 3);
        const QuerySet qs = select_query_points_uniform(1000, 4);
        detail += fmt::format("{}:", name);
        for (auto kind : {BasisKind::TriHarmonic, BasisKind::MonoHarmonic, BasisKind::HRBF}) {
            const RankReport r = rank_of_gram(assemble_design_matrix(kind, kernels, qs.points), 1e-10);
            const std::size_t expected_max = kind == BasisKind::HRBF ? 3000 : 1000;
            ok = ok && r.max_rank == expected_max && r.rank < r.max_rank;
            detail += fmt::format(" {} {}/{}", to_string(kind), r.rank, r.max_rank);
        }
        detail += "; ";
    }
    report(4, ok, "q=1000, 1000 uniform queries: " + detail.substr(0, detail.size() - 2));
}

void gradient_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(42);
    double worst = 0.0;
    std::size_t largest_m = 0, largest_n = 0;
    const BasisKind kinds[] = {BasisKind::TriHarmonic, BasisKind::MonoHarmonic, BasisKind::HRBF, BasisKind::CSRBF};
    for (int trial = 0; trial < 50; ++trial) {
        const BasisKind kind = kinds[trial % 4];
        const std::size_t per = columns_per_kernel(kind);
        const std::size_t q = 1 + rng() % (60 / per);
        const std::size_t m = 1 + rng() % 100;
        const KernelSet kernels(test::random_cloud(q, rng()));
        const PointCloud queries = test::random_cloud(m, rng());
        const DesignMatrix vt = assemble_design_matrix(kind, kernels, queries);
        std::normal_distribution<double> n01;
        Eigen::VectorXd alpha(vt.cols()), s(vt.rows());
        for (auto& a : alpha) a = n01(rng);
        for (auto& v : s) v = n01(rng);

        const Eigen::VectorXd g = loss_gradient(alpha, vt, s);
        Eigen::VectorXd fd(alpha.size());
        const double h = 1e-6;
        for (Eigen::Index i = 0; i < alpha.size(); ++i) {
            Eigen::VectorXd up = alpha, down = alpha;
            up[i] += h;
            down[i] -= h;
            fd[i] = (sdf_loss(up, vt, s) - sdf_loss(down, vt, s)) / (2.0 * h);
        }
        worst = std::max(worst, (g - fd).norm() / std::max(g.norm(), 1e-300));
        largest_m = std::max(largest_m, m);
        largest_n = std::max<std::size_t>(largest_n, vt.cols());
    }
    const double t = seconds_since(t0);
    report(6, worst <= 1e-5 && t < 10.0,
           fmt::format("50 random systems up to {}x{}: worst |g - g_fd| / |g| = {:.3g} ({:.2f} s)", largest_m,
                       largest_n, worst, t));
}

void locality() {
    const KernelSet kernels = normalized_fps(Sphere{}, 1000, 9);
    const QuerySet qs = select_query_points_fast(kernels);
    const std::size_t block = 123;

    // Test points anywhere in the cube except the perturbed cell.
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PointCloud test_points;
    while (test_points.size() < 10000) {
        const Point3 x(u(rng), u(rng), u(rng));
        if (nearest_kernel(x, kernels) != block) test_points.push_back(x);
    }

    const auto fit = [&](BasisKind kind, const QuerySet& queries) {
        const DesignMatrix vt = assemble_design_matrix(kind, kernels, queries.points);
        return ImplicitModel(kind, kernels, closed_form_solve(vt, targets(ground_truth(Sphere{}, queries.points))));
    };
    const ImplicitModel csrbf = fit(BasisKind::CSRBF, qs);
    const ImplicitModel csrbf_moved = perturb_block(csrbf, block, 1e-2, 11);
    std::size_t identical = 0;
    for (const auto& x : test_points) identical += eval_sdf(csrbf, x) == eval_sdf(csrbf_moved, x);

    const ImplicitModel hrbf = fit(BasisKind::HRBF, select_query_points_uniform(1000, 12));
    const ImplicitModel hrbf_moved = perturb_block(hrbf, block, 1e-2, 11);
    std::size_t changed = 0;
    for (const auto& x : test_points) changed += eval_sdf(hrbf, x) != eval_sdf(hrbf_moved, x);

    report(7, identical == test_points.size() && changed >= std::size_t(0.99 * double(test_points.size())),
           fmt::format("one block of 1000 perturbed: CSRBF bit-identical at {}/{} points outside the cell, HRBF "
                       "changed at {}/{}",
                       identical, test_points.size(), changed, test_points.size()));
}

void end_to_end_sphere() {
    const test::TempDir dir;
    const auto t0 = Clock::now();
    std::ostringstream out, err;
    const int code = run_cli({"--out", dir.path().string(), "pipeline", "--shape", "sphere:0.5", "--cloud-size", "5000",
                              "--q", "1000", "--basis", "CSRBF", "--solver", "closed", "--resolution", "128",
                              "--gt-shape", "sphere:0.5", "--tau", "0.02"},
                             out, err);
    const double t = seconds_since(t0);
    if (code != 0) {
        report(8, false, "pipeline exited with " + std::to_string(code) + ": " + err.str());
        return;
    }
    std::istringstream csv(test::read_file(dir / "metrics.csv"));
    std::string header, row;
    std::getline(csv, header);
    std::getline(csv, row);
    const double cd = std::stod(row.substr(0, row.find(',')));
    const double fs = std::stod(row.substr(row.find(',') + 1));
    report(8, cd <= 0.01 && fs >= 0.95 && t < 120.0,
           fmt::format("sphere r=0.5, 5000 points, q=1000 CSRBF closed form, res 128: Chamfer-L1 {:.5f}, F-score "
                       "{:.4f} at tau 0.02 ({:.1f} s)",
                       cd, fs, t));
}

void metric_suite() {
    bool self_ok = true, brute_ok = true;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto a = test::random_cloud(50 + 100 * seed, seed);
        self_ok = self_ok && chamfer_l1(a, a) == 0.0 && f_score(a, a, 0.02).f_score == 1.0;
    }
    const auto directed = [](const PointCloud& from, const PointCloud& to) {
        double sum = 0.0;
        for (const auto& x : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& y : to) best = std::min(best, (x - y).lpNorm<1>());
            sum += best;
        }
        return sum / double(from.size());
    };
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto a = test::random_cloud(1 + 5 * seed, 200 + seed), b = test::random_cloud(100 - 4 * seed, 300 + seed);
        brute_ok = brute_ok && chamfer_l1(a, b) == directed(a, b) + directed(b, a);
    }
    report(9, self_ok && brute_ok,
           fmt::format("self-comparison on 10 clouds: {}; exact brute-force Chamfer-L1 on 20 pairs <= 100 points: {}",
                       self_ok ? "CD 0, F 1" : "mismatch", brute_ok ? "equal" : "mismatch"));
}

}  // namespace

int main() {
    try {
        full_rank_and_gram_identity();
        one_step();
        rank_deficiency_contrast();
        interpolation();
        gradient_oracle();
        locality();
        end_to_end_sphere();
        metric_suite();
    } catch (const std::exception& e) {
        std::cout << "acceptance aborted: " << e.what() << '\n';
        return 1;
    }
    std::cout << "criterion 10: N/A   learned-network benchmark means (CD 0.027, F 0.987) are not reproducible "
                 "without the trained networks and dataset; criteria 1-9 substitute, with 8 as the end-to-end proxy\n";
    return failures == 0 ? 0 : 1;
}
