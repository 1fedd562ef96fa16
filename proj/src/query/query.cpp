#include <fstream>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "lisr/query.hpp"

namespace lisr {

std::string QuerySet::describe() const {
    if (strategy == QueryStrategy::Algorithm2) return fmt::format("algorithm2(eps={:.6g})", epsilon);
    return fmt::format("uniform({})", points.size());
}

double support_inradius(const KernelSet& kernels, std::size_t i, double single_kernel_radius) {
    if (i >= kernels.size()) throw Error(fmt::format("support_inradius: kernel {} out of range", i));
    if (kernels.size() == 1) return single_kernel_radius;
    const double d = kernels.nearest_other_distance(i);
    if (d <= kMinKernelSeparation) throw Error(fmt::format("support_inradius: kernel {} has a duplicate", i));
    return 0.5 * d;
}

double min_support_inradius(const KernelSet& kernels, double single_kernel_radius) {
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kernels.size(); ++i) r = std::min(r, support_inradius(kernels, i, single_kernel_radius));
    return r;
}

QuerySet select_query_points_with_epsilon(const KernelSet& kernels, double epsilon) {
    if (!(epsilon >= kMinQueryEpsilon) || !std::isfinite(epsilon))
        throw Error(fmt::format("query selection: epsilon {:.3g} too small (kernels too clustered)", epsilon));
    QuerySet qs;
    qs.strategy = QueryStrategy::Algorithm2;
    qs.epsilon = epsilon;
    qs.points.reserve(3 * kernels.size());
    qs.kernel_index.reserve(3 * kernels.size());
    for (std::size_t i = 0; i < kernels.size(); ++i) {
        for (int axis = 0; axis < 3; ++axis) {
            Point3 x = kernels[i];
            x[axis] += epsilon;
            if (kernels.nearest(x) != i)
                throw Error(fmt::format("query selection: offset {:.6g} leaves the cell of kernel {}", epsilon, i));
            qs.points.push_back(x);
            qs.kernel_index.push_back(i);
        }
    }
    return qs;
}

QuerySet select_query_points_fast(const KernelSet& kernels, double safety) {
    if (!(safety > 0.0 && safety < 1.0)) throw Error("query selection: safety factor must lie in (0, 1)");
    return select_query_points_with_epsilon(kernels, safety * min_support_inradius(kernels));
}

QuerySet select_query_points_uniform(std::size_t count, std::uint64_t seed) {
    if (count == 0) throw Error("query selection: count must be at least 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    QuerySet qs;
    qs.strategy = QueryStrategy::Uniform;
    qs.seed = seed;
    qs.points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double x = coord(rng), y = coord(rng), z = coord(rng);
        qs.points.emplace_back(x, y, z);
    }
    return qs;
}

void write_queries_csv(const QuerySet& queries, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(fmt::format("{}: cannot write", path.string()));
    out << "x,y,z,kernel_index\n";
    for (std::size_t j = 0; j < queries.points.size(); ++j) {
        const auto& p = queries.points[j];
        const long k = queries.kernel_index.empty() ? -1L : long(queries.kernel_index[j]);
        out << format_real(p.x()) << ',' << format_real(p.y()) << ',' << format_real(p.z()) << ',' << k << '\n';
    }
}

}  // namespace lisr
