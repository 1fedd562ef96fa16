#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lisr/basis.hpp"
#include "lisr/sdf_oracle.hpp"

namespace lisr {

inline constexpr double kDefaultRankTolerance = 1e-10;
/// Relative Frobenius tolerance for recognising V V^T = c I.
inline constexpr double kScaledIdentityTolerance = 1e-9;
inline constexpr int kPowerIterations = 50;

/// Ground-truth values of a sample set as a vector in row order.
Eigen::VectorXd targets(const SampleSet& samples);

/// sum_j (row_j . alpha - s_j)^2
double sdf_loss(const Eigen::VectorXd& alpha, const DesignMatrix& vt, const Eigen::VectorXd& s);

/// 2 V (V^T alpha - s), the same quantity as 2 V V^T (alpha - alpha*) but defined for
/// singular V V^T.
Eigen::VectorXd loss_gradient(const Eigen::VectorXd& alpha, const DesignMatrix& vt,
                              const Eigen::VectorXd& s);

/// Returns c when V V^T = c I within `rel_tol` (relative Frobenius error).
std::optional<double> detect_scaled_identity_gram(const DesignMatrix& vt,
                                                  double rel_tol = kScaledIdentityTolerance);

struct RankReport {
    BasisKind kind = BasisKind::CSRBF;
    std::size_t q = 0;
    std::string strategy;  // filled in by the caller, which knows how queries were chosen
    std::size_t m = 0;
    std::size_t rank = 0;
    std::size_t max_rank = 0;
    double sigma_max = 0.0;
    double sigma_min = 0.0;
    double rel_tol = kDefaultRankTolerance;

    bool full_rank() const { return rank == max_rank; }

    static std::string csv_header();
    std::string csv_row() const;
    std::string text() const;
};

/// Rank of V V^T, counted as the singular values of V^T above rel_tol * sigma_max.
/// CSRBF matrices are decomposed block by block; everything else goes through a dense
/// SVD.
RankReport rank_of_gram(const DesignMatrix& vt, double rel_tol = kDefaultRankTolerance);

/// Dense SVD of V^T regardless of structure.
RankReport rank_of_gram_dense(const DesignMatrix& vt, double rel_tol = kDefaultRankTolerance);

/// Minimum-norm least-squares coefficients. With CSRBF and V V^T = c I the solution is
/// V s / c, computed block by block.
Eigen::VectorXd closed_form_solve(const DesignMatrix& vt, const Eigen::VectorXd& s,
                                  double rel_tol = kDefaultRankTolerance);

struct FitReport {
    std::string method;
    Eigen::VectorXd alpha;
    std::size_t iterations = 0;
    double step = 0.0;
    double final_loss = 0.0;
    std::vector<double> loss_trace;
    RankReport gram;
    std::optional<double> gram_scale;  // c when V V^T = c I

    std::size_t gram_rank() const { return gram.rank; }
    bool rank_deficient() const { return !gram.full_rank(); }

    /// The rank columns followed by method,iterations,step,final_loss,identity_scaled,c.
    static std::string csv_header();
    std::string csv_row() const;
    std::string text() const;
};

struct GdOptions {
    std::optional<double> step;  // nullopt: automatic
    std::size_t max_iters = 1000;
    double tol = 1e-10;
};

/// Plain gradient descent from alpha = 0. The automatic step is 1/(2c) for a scaled
/// identity Gram, otherwise 1/(2 lambda_max(V V^T)) with lambda_max from power iteration.
/// Stops once |grad| <= tol after a step or after max_iters steps.
FitReport gd_fit(const DesignMatrix& vt, const Eigen::VectorXd& s, const GdOptions& options = {},
                 double rank_tol = kDefaultRankTolerance);

/// closed_form_solve wrapped with loss and Gram diagnostics.
FitReport closed_form_fit(const DesignMatrix& vt, const Eigen::VectorXd& s,
                          double rank_tol = kDefaultRankTolerance);

/// Largest eigenvalue of V V^T by power iteration.
double estimate_gram_lambda_max(const DesignMatrix& vt, int iterations = kPowerIterations);

/// Adds independent uniform noise in [-eta, eta] to every coefficient.
ImplicitModel perturb_coefficients(const ImplicitModel& model, double eta, std::uint64_t seed);

/// Adds noise only to the coefficient block of one kernel (0-based).
ImplicitModel perturb_block(const ImplicitModel& model, std::size_t kernel, double eta,
                            std::uint64_t seed);

}  // namespace lisr
