#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "lisr/geom.hpp"

namespace lisr {

inline constexpr double kDefaultFScoreThreshold = 0.02;
inline constexpr std::size_t kDefaultSurfaceSamples = 100000;

enum class ChamferMode {
    Sum,  // mean(a->b) + mean(b->a)
    Mean  // half of Sum
};

/// Chamfer distance with L1 point norms. Throws on an empty cloud.
double chamfer_l1(const PointCloud& a, const PointCloud& b, ChamferMode mode = ChamferMode::Sum);

struct MetricReport {
    double chamfer_l1 = 0.0;
    double f_score = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double tau = kDefaultFScoreThreshold;
    std::size_t n_pred = 0;
    std::size_t n_gt = 0;

    static std::string csv_header();
    std::string csv_row() const;
    std::string text() const;
};

/// Precision and recall at Euclidean threshold tau, their harmonic mean, and the
/// Chamfer-L1 distance between the two sets.
MetricReport f_score(const PointCloud& pred, const PointCloud& gt,
                     double tau = kDefaultFScoreThreshold, ChamferMode mode = ChamferMode::Sum);

/// Area-weighted uniform samples on a triangle mesh.
PointCloud sample_surface(const TriangleMesh& mesh, std::size_t count, std::uint64_t seed);

}  // namespace lisr
