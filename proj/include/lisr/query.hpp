#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lisr/geom.hpp"
#include "lisr/kernels.hpp"

namespace lisr {

enum class QueryStrategy { Algorithm2, Uniform };

struct QuerySet {
    std::vector<Point3> points;
    QueryStrategy strategy = QueryStrategy::Uniform;
    /// Common axis offset of the per-kernel queries (Algorithm2 only).
    double epsilon = 0.0;
    /// Generating kernel of each point (Algorithm2 only).
    std::vector<std::size_t> kernel_index;
    std::uint64_t seed = 0;

    std::string describe() const;
};

inline constexpr double kSingleKernelInradius = 0.25;
inline constexpr double kDefaultQuerySafety = 0.5;
inline constexpr double kMinQueryEpsilon = 1e-9;

/// Lower bound on the inradius of kernel i's Voronoi cell: half the distance to the
/// closest other kernel. With a single kernel the cell is all of space and
/// `single_kernel_radius` is returned.
double support_inradius(const KernelSet& kernels, std::size_t i,
                        double single_kernel_radius = kSingleKernelInradius);

/// Minimum of support_inradius over all kernels.
double min_support_inradius(const KernelSet& kernels,
                            double single_kernel_radius = kSingleKernelInradius);

/// Three queries p_i + eps*e_x, p_i + eps*e_y, p_i + eps*e_z per kernel, in kernel order,
/// with eps = safety * min inradius shared by all cells.
QuerySet select_query_points_fast(const KernelSet& kernels, double safety = kDefaultQuerySafety);

/// Same layout with a caller-chosen eps. Throws if any query would leave its own cell.
QuerySet select_query_points_with_epsilon(const KernelSet& kernels, double epsilon);

/// `count` i.i.d. uniform points in [-1,1]^3.
QuerySet select_query_points_uniform(std::size_t count, std::uint64_t seed);

/// `x,y,z,kernel_index` CSV; kernel_index is -1 for uniform queries.
void write_queries_csv(const QuerySet& queries, const std::filesystem::path& path);

}  // namespace lisr
