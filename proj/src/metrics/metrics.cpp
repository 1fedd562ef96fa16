#include <cmath>
#include <random>

#include <fmt/format.h>

#include "common/parallel.hpp"
#include "lisr/kernels.hpp"
#include "lisr/metrics.hpp"

namespace lisr {

namespace {

// Nearest-neighbour distance from every point of `from` to `to`, in input order.
std::vector<double> directed_distances(const PointCloud& from, const KdTree& to, Norm norm) {
    std::vector<double> d(from.size());
    detail::parallel_for(from.size(), [&](std::size_t i) { d[i] = to.nearest(from[i], norm).distance; });
    return d;
}

double mean(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / double(v.size());
}

double fraction_within(const std::vector<double>& d, double tau) {
    std::size_t hits = 0;
    for (double x : d) hits += x <= tau;
    return double(hits) / double(d.size());
}

void require_nonempty(const PointCloud& a, const PointCloud& b, const char* op) {
    if (a.empty() || b.empty()) throw Error(fmt::format("{}: empty point cloud", op));
}

}  // namespace

double chamfer_l1(const PointCloud& a, const PointCloud& b, ChamferMode mode) {
    require_nonempty(a, b, "chamfer_l1");
    const KdTree ta(a), tb(b);
    const double sum = mean(directed_distances(a, tb, Norm::L1)) + mean(directed_distances(b, ta, Norm::L1));
    return mode == ChamferMode::Sum ? sum : 0.5 * sum;
}

MetricReport f_score(const PointCloud& pred, const PointCloud& gt, double tau, ChamferMode mode) {
    require_nonempty(pred, gt, "f_score");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw Error(fmt::format("f_score: threshold must be positive, got {}", tau));
    const KdTree tp(pred), tg(gt);
    MetricReport r;
    r.tau = tau;
    r.n_pred = pred.size();
    r.n_gt = gt.size();
    r.precision = fraction_within(directed_distances(pred, tg, Norm::L2), tau);
    r.recall = fraction_within(directed_distances(gt, tp, Norm::L2), tau);
    const double denom = r.precision + r.recall;
    r.f_score = denom > 0.0 ? 2.0 * r.precision * r.recall / denom : 0.0;
    const double cd = mean(directed_distances(pred, tg, Norm::L1)) + mean(directed_distances(gt, tp, Norm::L1));
    r.chamfer_l1 = mode == ChamferMode::Sum ? cd : 0.5 * cd;
    return r;
}

std::string MetricReport::csv_header() { return "chamfer_l1,f_score,precision,recall,tau,n_pred,n_gt"; }

std::string MetricReport::csv_row() const {
    return fmt::format("{},{},{},{},{},{},{}", format_real(chamfer_l1), format_real(f_score), format_real(precision),
                       format_real(recall), format_real(tau), n_pred, n_gt);
}

std::string MetricReport::text() const {
    return fmt::format("chamfer_l1 {:.6g}\nf_score    {:.6g} (tau {:g})\nprecision  {:.6g}\nrecall     {:.6g}\n"
                       "samples    {} pred, {} gt\n",
                       chamfer_l1, f_score, tau, precision, recall, n_pred, n_gt);
}

PointCloud sample_surface(const TriangleMesh& mesh, std::size_t count, std::uint64_t seed) {
    if (mesh.triangles.empty()) throw Error("sample_surface: mesh has no triangles");
    if (count == 0) throw Error("sample_surface: count must be at least 1");
    std::vector<double> area(mesh.triangles.size());
    for (std::size_t t = 0; t < area.size(); ++t) area[t] = mesh.triangle_area(t);
    std::discrete_distribution<std::size_t> pick(area.begin(), area.end());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::mt19937_64 rng(seed);
    PointCloud out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto& tri = mesh.triangles[pick(rng)];
        double u = unit(rng), v = unit(rng);
        if (u + v > 1.0) {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        const Point3& a = mesh.vertices[tri[0]];
        out.push_back(a + u * (mesh.vertices[tri[1]] - a) + v * (mesh.vertices[tri[2]] - a));
    }
    return out;
}

}  // namespace lisr
