#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lisr/basis.hpp"
#include "lisr/metrics.hpp"

namespace lisr {

/// Settings shared by all subcommands. Unused fields are ignored by a given command.
struct RunConfig {
    // Input surface: a point cloud file, an analytic shape or a closed mesh.
    std::optional<std::filesystem::path> input;
    std::optional<std::string> shape;
    std::optional<std::filesystem::path> mesh;
    std::size_t cloud_size = 5000;
    double margin = kDefaultNormalizeMargin;

    // Ground truth when it differs from the input.
    std::optional<std::string> gt_shape;
    std::optional<std::filesystem::path> gt_mesh;

    BasisKind basis = BasisKind::CSRBF;
    std::size_t q = 1000;
    std::string queries = "algorithm2";  // algorithm2 | uniform[:count]
    std::size_t uniform_count = 1000;
    double safety = 0.5;
    std::optional<std::filesystem::path> kernels_from;

    std::string solver = "closed";  // closed | gd
    std::optional<double> step;
    std::size_t iters = 1000;
    double tol = 1e-10;
    double rank_tol = 1e-10;

    std::size_t resolution = 128;
    double iso = 0.0;

    std::optional<std::filesystem::path> model;
    std::optional<std::filesystem::path> pred;
    std::size_t samples = kDefaultSurfaceSamples;
    double tau = kDefaultFScoreThreshold;
    bool cd_mean = false;

    std::vector<double> etas = {1e-6, 1e-5, 1e-4, 1e-2};
    std::optional<std::size_t> block;

    std::uint64_t seed = 0;
    std::filesystem::path out = "out";

    /// Checks ranges and that referenced input files exist.
    void validate() const;
};

/// Runs the command line `args` (without the program name). Returns the process exit
/// code: 0 on success, 1 on a runtime error, 2 on a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lisr
