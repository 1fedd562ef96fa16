#include <cctype>
#include <string>

#include <fmt/format.h>

#include "lisr/basis.hpp"

namespace lisr {

std::string_view to_string(BasisKind kind) {
    switch (kind) {
        case BasisKind::TriHarmonic: return "TriHarmonic";
        case BasisKind::MonoHarmonic: return "MonoHarmonic";
        case BasisKind::HRBF: return "HRBF";
        case BasisKind::CSRBF: return "CSRBF";
    }
    return "?";
}

BasisKind parse_basis_kind(std::string_view text) {
    std::string s;
    for (char c : text)
        if (c != '-' && c != '_') s.push_back(char(std::tolower(static_cast<unsigned char>(c))));
    if (s == "triharmonic") return BasisKind::TriHarmonic;
    if (s == "monoharmonic") return BasisKind::MonoHarmonic;
    if (s == "hrbf") return BasisKind::HRBF;
    if (s == "csrbf") return BasisKind::CSRBF;
    throw Error(fmt::format("unknown basis kind '{}'", text));
}

Eigen::VectorXd eval_basis_row(BasisKind kind, const KernelSet& kernels, const Point3& x) {
    const std::size_t q = kernels.size();
    Eigen::VectorXd row = Eigen::VectorXd::Zero(Eigen::Index(column_count(kind, kernels)));
    switch (kind) {
        case BasisKind::TriHarmonic:
            for (std::size_t i = 0; i < q; ++i) {
                const double r = (x - kernels[i]).norm();
                row[Eigen::Index(i)] = r * r * r;
            }
            break;
        case BasisKind::MonoHarmonic:
            for (std::size_t i = 0; i < q; ++i) row[Eigen::Index(i)] = (x - kernels[i]).norm();
            break;
        case BasisKind::HRBF:
            for (std::size_t i = 0; i < q; ++i) row.segment<3>(Eigen::Index(3 * i)) = cubic_gradient(x - kernels[i]);
            break;
        case BasisKind::CSRBF: {
            const std::size_t i = kernels.nearest(x);
            row.segment<3>(Eigen::Index(3 * i)) = cubic_gradient(x - kernels[i]);
            break;
        }
    }
    return row;
}

DesignMatrix DesignMatrix::dense(BasisKind kind, Eigen::MatrixXd values) {
    if (kind == BasisKind::CSRBF) throw Error("CSRBF design matrices are block sparse");
    DesignMatrix m;
    m.kind_ = kind;
    m.rows_ = std::size_t(values.rows());
    m.cols_ = std::size_t(values.cols());
    m.dense_ = std::move(values);
    return m;
}

DesignMatrix DesignMatrix::block_sparse(std::size_t kernel_count, std::vector<std::size_t> support,
                                        Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> values) {
    if (support.size() != std::size_t(values.rows())) throw Error("design matrix: support/value row mismatch");
    for (auto s : support)
        if (s >= kernel_count) throw Error("design matrix: support index out of range");
    DesignMatrix m;
    m.kind_ = BasisKind::CSRBF;
    m.rows_ = support.size();
    m.cols_ = 3 * kernel_count;
    m.support_ = std::move(support);
    m.sparse_ = std::move(values);
    return m;
}

Eigen::VectorXd DesignMatrix::multiply(const Eigen::VectorXd& alpha) const {
    if (std::size_t(alpha.size()) != cols_)
        throw Error(fmt::format("design matrix: coefficient length {} != {} columns", alpha.size(), cols_));
    if (!is_block_sparse()) return dense_ * alpha;
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows_));
    for (std::size_t r = 0; r < rows_; ++r)
        out[Eigen::Index(r)] = sparse_.row(Eigen::Index(r)).dot(alpha.segment<3>(Eigen::Index(3 * support_[r])));
    return out;
}

Eigen::VectorXd DesignMatrix::multiply_transpose(const Eigen::VectorXd& r) const {
    if (std::size_t(r.size()) != rows_)
        throw Error(fmt::format("design matrix: residual length {} != {} rows", r.size(), rows_));
    if (!is_block_sparse()) return dense_.transpose() * r;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(Eigen::Index(cols_));
    for (std::size_t j = 0; j < rows_; ++j)
        out.segment<3>(Eigen::Index(3 * support_[j])) += r[Eigen::Index(j)] * sparse_.row(Eigen::Index(j)).transpose();
    return out;
}

Eigen::MatrixXd DesignMatrix::to_dense() const {
    if (!is_block_sparse()) return dense_;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(Eigen::Index(rows_), Eigen::Index(cols_));
    for (std::size_t r = 0; r < rows_; ++r)
        out.block<1, 3>(Eigen::Index(r), Eigen::Index(3 * support_[r])) = sparse_.row(Eigen::Index(r));
    return out;
}

Eigen::MatrixXd DesignMatrix::gram() const {
    if (!is_block_sparse()) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(Eigen::Index(cols_), Eigen::Index(cols_));
        g.selfadjointView<Eigen::Lower>().rankUpdate(dense_.transpose());
        return g.selfadjointView<Eigen::Lower>();
    }
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(Eigen::Index(cols_), Eigen::Index(cols_));
    for (std::size_t r = 0; r < rows_; ++r) {
        const Eigen::Index o = Eigen::Index(3 * support_[r]);
        g.block<3, 3>(o, o) += sparse_.row(Eigen::Index(r)).transpose() * sparse_.row(Eigen::Index(r));
    }
    return g;
}

Eigen::MatrixX3d DesignMatrix::kernel_block(std::size_t kernel) const {
    if (!is_block_sparse()) throw Error("kernel_block requires a CSRBF design matrix");
    std::vector<Eigen::Index> rows;
    for (std::size_t r = 0; r < rows_; ++r)
        if (support_[r] == kernel) rows.push_back(Eigen::Index(r));
    Eigen::MatrixX3d block(Eigen::Index(rows.size()), 3);
    for (std::size_t k = 0; k < rows.size(); ++k) block.row(Eigen::Index(k)) = sparse_.row(rows[k]);
    return block;
}

std::vector<std::vector<std::size_t>> DesignMatrix::rows_by_kernel() const {
    if (!is_block_sparse()) throw Error("rows_by_kernel requires a CSRBF design matrix");
    std::vector<std::vector<std::size_t>> groups(cols_ / 3);
    for (std::size_t r = 0; r < rows_; ++r) groups[support_[r]].push_back(r);
    return groups;
}

DesignMatrix assemble_design_matrix(BasisKind kind, const KernelSet& kernels, std::span<const Point3> queries) {
    if (queries.empty()) throw Error("design matrix: no query points");
    const auto m = Eigen::Index(queries.size());
    if (kind == BasisKind::CSRBF) {
        std::vector<std::size_t> support(queries.size());
        Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> values(m, 3);
        for (Eigen::Index j = 0; j < m; ++j) {
            const Point3& x = queries[std::size_t(j)];
            const std::size_t i = kernels.nearest(x);
            support[std::size_t(j)] = i;
            values.row(j) = cubic_gradient(x - kernels[i]).transpose();
        }
        return DesignMatrix::block_sparse(kernels.size(), std::move(support), std::move(values));
    }
    Eigen::MatrixXd values(m, Eigen::Index(column_count(kind, kernels)));
    for (Eigen::Index j = 0; j < m; ++j) values.row(j) = eval_basis_row(kind, kernels, queries[std::size_t(j)]).transpose();
    return DesignMatrix::dense(kind, std::move(values));
}

ImplicitModel::ImplicitModel(BasisKind kind, KernelSet kernels, Eigen::VectorXd alpha,
                             std::optional<double> epsilon)
    : kind_(kind), kernels_(std::move(kernels)), alpha_(std::move(alpha)), epsilon_(epsilon) {
    const std::size_t n = column_count(kind_, kernels_);
    if (std::size_t(alpha_.size()) != n)
        throw Error(fmt::format("model: {} basis with {} kernels needs {} coefficients, got {}", to_string(kind_),
                                kernels_.size(), n, alpha_.size()));
    if (!alpha_.allFinite()) throw Error("model: non-finite coefficient");
    if (epsilon_ && !(*epsilon_ > 0.0 && std::isfinite(*epsilon_))) throw Error("model: epsilon must be positive");
}

ImplicitModel ImplicitModel::with_alpha(Eigen::VectorXd alpha) const {
    ImplicitModel m(kind_, kernels_, std::move(alpha), epsilon_);
    m.frame_ = frame_;
    return m;
}

double eval_sdf(const ImplicitModel& model, const Point3& x) {
    if (model.kind() == BasisKind::CSRBF) {
        const std::size_t i = model.kernels().nearest(x);
        return cubic_gradient(x - model.kernels()[i]).dot(model.alpha().segment<3>(Eigen::Index(3 * i)));
    }
    return eval_sdf_dense(model, x);
}

double eval_sdf_dense(const ImplicitModel& model, const Point3& x) {
    return eval_basis_row(model.kind(), model.kernels(), x).dot(model.alpha());
}

Eigen::Vector3d beta_view(const ImplicitModel& model, std::size_t i) {
    if (columns_per_kernel(model.kind()) != 3)
        throw Error(fmt::format("beta_view: {} basis has scalar coefficients", to_string(model.kind())));
    if (i >= model.kernels().size())
        throw Error(fmt::format("beta_view: kernel {} out of range (q = {})", i, model.kernels().size()));
    return model.alpha().segment<3>(Eigen::Index(3 * i));
}

}  // namespace lisr
