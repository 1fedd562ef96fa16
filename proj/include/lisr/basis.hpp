#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "lisr/geom.hpp"
#include "lisr/kernels.hpp"

namespace lisr {

/// Basis families. HRBF and CSRBF use the gradient kernel 3|x-p|(x-p) and carry
/// three coefficients per kernel; the harmonic kinds carry one.
enum class BasisKind { TriHarmonic, MonoHarmonic, HRBF, CSRBF };

std::string_view to_string(BasisKind kind);
/// Case-insensitive; accepts `triharmonic`, `monoharmonic`, `hrbf`, `csrbf`.
BasisKind parse_basis_kind(std::string_view text);

inline std::size_t columns_per_kernel(BasisKind kind) {
    return kind == BasisKind::HRBF || kind == BasisKind::CSRBF ? 3 : 1;
}

inline std::size_t column_count(BasisKind kind, const KernelSet& kernels) {
    return columns_per_kernel(kind) * kernels.size();
}

/// Gradient of |d|^3, i.e. 3|d| d.
inline Eigen::Vector3d cubic_gradient(const Eigen::Vector3d& d) { return 3.0 * d.norm() * d; }

/// Values of all n basis functions at x. For CSRBF only the block of the Voronoi cell
/// containing x is nonzero.
Eigen::VectorXd eval_basis_row(BasisKind kind, const KernelSet& kernels, const Point3& x);

/// Design matrix V^T (m query rows by n basis columns).
///
/// Global bases are stored densely. CSRBF rows have at most three nonzeros, all in the
/// column block of the row's support kernel, so only that kernel index and the three
/// values are kept.
class DesignMatrix {
public:
    static DesignMatrix dense(BasisKind kind, Eigen::MatrixXd values);
    static DesignMatrix block_sparse(std::size_t kernel_count, std::vector<std::size_t> support,
                                     Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> values);

    BasisKind kind() const { return kind_; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_block_sparse() const { return kind_ == BasisKind::CSRBF; }

    /// Support kernel of a CSRBF row.
    std::size_t support(std::size_t row) const { return support_[row]; }
    const std::vector<std::size_t>& supports() const { return support_; }
    /// Three nonzero values of a CSRBF row.
    Eigen::Vector3d block_row(std::size_t row) const { return sparse_.row(row).transpose(); }

    /// V^T alpha.
    Eigen::VectorXd multiply(const Eigen::VectorXd& alpha) const;
    /// V r.
    Eigen::VectorXd multiply_transpose(const Eigen::VectorXd& r) const;

    Eigen::MatrixXd to_dense() const;
    /// V V^T as a dense n x n matrix.
    Eigen::MatrixXd gram() const;

    /// Rows of V^T whose support is `kernel`, stacked into an m_i x 3 block M_i.
    /// CSRBF only.
    Eigen::MatrixX3d kernel_block(std::size_t kernel) const;
    /// Row indices grouped by support kernel. CSRBF only.
    std::vector<std::vector<std::size_t>> rows_by_kernel() const;

private:
    BasisKind kind_ = BasisKind::TriHarmonic;
    std::size_t rows_ = 0, cols_ = 0;
    Eigen::MatrixXd dense_;
    std::vector<std::size_t> support_;
    Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> sparse_;
};

DesignMatrix assemble_design_matrix(BasisKind kind, const KernelSet& kernels,
                                    std::span<const Point3> queries);

/// A fitted linear implicit surface f(x) = sum_i alpha_i phi_i(x).
class ImplicitModel {
public:
    ImplicitModel(BasisKind kind, KernelSet kernels, Eigen::VectorXd alpha,
                  std::optional<double> epsilon = std::nullopt);

    BasisKind kind() const { return kind_; }
    const KernelSet& kernels() const { return kernels_; }
    const Eigen::VectorXd& alpha() const { return alpha_; }
    std::optional<double> epsilon() const { return epsilon_; }

    /// Maps the model's domain back to the coordinates of the input it was fitted on.
    const std::optional<NormalizeTransform>& frame() const { return frame_; }
    void set_frame(std::optional<NormalizeTransform> frame) { frame_ = std::move(frame); }

    ImplicitModel with_alpha(Eigen::VectorXd alpha) const;

private:
    BasisKind kind_;
    KernelSet kernels_;
    Eigen::VectorXd alpha_;
    std::optional<double> epsilon_;
    std::optional<NormalizeTransform> frame_;
};

/// f(x). CSRBF evaluates only the three terms of the nearest kernel.
double eval_sdf(const ImplicitModel& model, const Point3& x);

/// f(x) through the full basis row, without the CSRBF shortcut.
double eval_sdf_dense(const ImplicitModel& model, const Point3& x);

/// Coefficients (alpha_{3i}, alpha_{3i+1}, alpha_{3i+2}) of kernel i (0-based).
Eigen::Vector3d beta_view(const ImplicitModel& model, std::size_t i);

// `.lisr` text format:
//
//   version 1
//   basis_kind CSRBF
//   epsilon 0.0123            (optional)
//   frame <scale> <tx> <ty> <tz>   (optional)
//   kernels <q>
//   <x> <y> <z>               (q lines)
//   alpha <n>
//   <a>                       (n lines)
inline constexpr int kModelFormatVersion = 1;

void save_model(const ImplicitModel& model, const std::filesystem::path& path);
ImplicitModel load_model(const std::filesystem::path& path);

}  // namespace lisr
