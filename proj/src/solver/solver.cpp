#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <fmt/format.h>

#include "lisr/solver.hpp"

namespace lisr {

namespace {

void check_dims(const DesignMatrix& vt, const Eigen::VectorXd* alpha, const Eigen::VectorXd& s) {
    if (std::size_t(s.size()) != vt.rows())
        throw Error(fmt::format("dimension mismatch: {} targets for {} design rows", s.size(), vt.rows()));
    if (alpha && std::size_t(alpha->size()) != vt.cols())
        throw Error(fmt::format("dimension mismatch: {} coefficients for {} design columns", alpha->size(), vt.cols()));
}

RankReport summarize(const DesignMatrix& vt, const Eigen::VectorXd& singular, double rel_tol) {
    RankReport r;
    r.kind = vt.kind();
    r.q = vt.cols() / columns_per_kernel(vt.kind());
    r.m = vt.rows();
    r.max_rank = vt.cols();
    r.rel_tol = rel_tol;
    if (singular.size() == 0) return r;
    r.sigma_max = singular.maxCoeff();
    r.sigma_min = singular.minCoeff();
    const double cut = rel_tol * r.sigma_max;
    for (Eigen::Index i = 0; i < singular.size(); ++i)
        if (singular[i] > cut) ++r.rank;
    return r;
}

}  // namespace

Eigen::VectorXd targets(const SampleSet& samples) {
    Eigen::VectorXd s(static_cast<Eigen::Index>(samples.size()));
    for (std::size_t j = 0; j < samples.size(); ++j) s[Eigen::Index(j)] = samples[j].s;
    return s;
}

double sdf_loss(const Eigen::VectorXd& alpha, const DesignMatrix& vt, const Eigen::VectorXd& s) {
    check_dims(vt, &alpha, s);
    return (vt.multiply(alpha) - s).squaredNorm();
}

Eigen::VectorXd loss_gradient(const Eigen::VectorXd& alpha, const DesignMatrix& vt, const Eigen::VectorXd& s) {
    check_dims(vt, &alpha, s);
    return 2.0 * vt.multiply_transpose(vt.multiply(alpha) - s);
}

std::optional<double> detect_scaled_identity_gram(const DesignMatrix& vt, double rel_tol) {
    const auto n = Eigen::Index(vt.cols());
    if (vt.is_block_sparse()) {
        std::vector<Eigen::Matrix3d> blocks(vt.cols() / 3, Eigen::Matrix3d::Zero());
        for (std::size_t r = 0; r < vt.rows(); ++r) {
            const Eigen::Vector3d v = vt.block_row(r);
            blocks[vt.support(r)] += v * v.transpose();
        }
        double trace = 0.0;
        for (const auto& b : blocks) trace += b.trace();
        const double c = trace / double(n);
        if (!(c > 0.0)) return std::nullopt;
        double err2 = 0.0;
        for (const auto& b : blocks) err2 += (b - c * Eigen::Matrix3d::Identity()).squaredNorm();
        if (std::sqrt(err2) <= rel_tol * c * std::sqrt(double(n))) return c;
        return std::nullopt;
    }

    // Column norms are the Gram diagonal; reject early before forming the full matrix.
    const Eigen::MatrixXd dense = vt.to_dense();
    const Eigen::VectorXd diag = dense.colwise().squaredNorm().transpose();
    const double c = diag.mean();
    if (!(c > 0.0)) return std::nullopt;
    const double bound = rel_tol * c * std::sqrt(double(n));
    if ((diag.array() - c).matrix().norm() > bound) return std::nullopt;
    const Eigen::MatrixXd g = vt.gram();
    if ((g - c * Eigen::MatrixXd::Identity(n, n)).norm() <= bound) return c;
    return std::nullopt;
}

RankReport rank_of_gram_dense(const DesignMatrix& vt, double rel_tol) {
    if (!(rel_tol > 0.0)) throw Error("rank_of_gram: rel_tol must be positive");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(vt.to_dense());
    return summarize(vt, svd.singularValues(), rel_tol);
}

RankReport rank_of_gram(const DesignMatrix& vt, double rel_tol) {
    if (!(rel_tol > 0.0)) throw Error("rank_of_gram: rel_tol must be positive");
    if (!vt.is_block_sparse()) return rank_of_gram_dense(vt, rel_tol);

    // Rows of different kernels touch disjoint columns, so after a row permutation V^T
    // is block diagonal and its spectrum is the union of the per-kernel spectra. Kernels
    // with fewer than three rows leave zero singular values behind.
    const auto groups = vt.rows_by_kernel();
    std::vector<double> sv;
    sv.reserve(std::min(vt.rows(), vt.cols()));
    for (std::size_t k = 0; k < groups.size(); ++k) {
        const auto& rows = groups[k];
        Eigen::MatrixX3d block(Eigen::Index(rows.size()), 3);
        for (std::size_t j = 0; j < rows.size(); ++j) block.row(Eigen::Index(j)) = vt.block_row(rows[j]).transpose();
        const Eigen::Index keep = std::min<Eigen::Index>(block.rows(), 3);
        if (keep > 0) {
            Eigen::JacobiSVD<Eigen::MatrixX3d> svd(block);
            for (Eigen::Index i = 0; i < keep; ++i) sv.push_back(svd.singularValues()[i]);
        }
        for (Eigen::Index i = keep; i < 3; ++i) sv.push_back(0.0);
    }
    // The union lists one value per column; only min(m, n) belong to V^T. Extra zeros
    // come from empty kernels and only matter when m < n.
    std::sort(sv.begin(), sv.end(), std::greater<>());
    sv.resize(std::min(vt.rows(), vt.cols()));
    return summarize(vt, Eigen::Map<const Eigen::VectorXd>(sv.data(), Eigen::Index(sv.size())), rel_tol);
}

Eigen::VectorXd closed_form_solve(const DesignMatrix& vt, const Eigen::VectorXd& s, double rel_tol) {
    check_dims(vt, nullptr, s);
    if (vt.is_block_sparse()) {
        if (const auto c = detect_scaled_identity_gram(vt)) return vt.multiply_transpose(s) / *c;
        // Kernels decouple: each block is an independent m_i x 3 least-squares problem.
        Eigen::VectorXd alpha = Eigen::VectorXd::Zero(Eigen::Index(vt.cols()));
        const auto groups = vt.rows_by_kernel();
        for (std::size_t k = 0; k < groups.size(); ++k) {
            const auto& rows = groups[k];
            if (rows.empty()) continue;
            Eigen::MatrixXd block(Eigen::Index(rows.size()), 3);
            Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows.size()));
            for (std::size_t j = 0; j < rows.size(); ++j) {
                block.row(Eigen::Index(j)) = vt.block_row(rows[j]).transpose();
                rhs[Eigen::Index(j)] = s[Eigen::Index(rows[j])];
            }
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(block, Eigen::ComputeThinU | Eigen::ComputeThinV);
            svd.setThreshold(rel_tol);
            alpha.segment<3>(Eigen::Index(3 * k)) = svd.solve(rhs);
        }
        return alpha;
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(vt.to_dense(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(rel_tol);
    return svd.solve(s);
}

double estimate_gram_lambda_max(const DesignMatrix& vt, int iterations) {
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> g;
    Eigen::VectorXd v(static_cast<Eigen::Index>(vt.cols()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = g(rng);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXd w = vt.multiply_transpose(vt.multiply(v));
        lambda = v.dot(w);
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = w / norm;
    }
    return lambda;
}

FitReport closed_form_fit(const DesignMatrix& vt, const Eigen::VectorXd& s, double rank_tol) {
    FitReport report;
    report.method = "closed";
    report.alpha = closed_form_solve(vt, s, rank_tol);
    report.final_loss = sdf_loss(report.alpha, vt, s);
    report.loss_trace = {report.final_loss};
    report.gram = rank_of_gram(vt, rank_tol);
    report.gram_scale = detect_scaled_identity_gram(vt);
    return report;
}

FitReport gd_fit(const DesignMatrix& vt, const Eigen::VectorXd& s, const GdOptions& options, double rank_tol) {
    check_dims(vt, nullptr, s);
    if (options.max_iters < 1) throw Error("gd_fit: max_iters must be at least 1");
    if (!(options.tol > 0.0)) throw Error("gd_fit: tol must be positive");

    FitReport report;
    report.method = "gd";
    report.gram_scale = detect_scaled_identity_gram(vt);
    report.gram = rank_of_gram(vt, rank_tol);

    if (options.step) {
        report.step = *options.step;
    } else if (report.gram_scale) {
        report.step = 0.5 / *report.gram_scale;
    } else {
        const double lambda = estimate_gram_lambda_max(vt);
        if (!(lambda > 0.0)) throw Error("gd_fit: design matrix is zero");
        report.step = 0.5 / lambda;
    }
    if (!(report.step > 0.0) || !std::isfinite(report.step)) throw Error("gd_fit: step must be positive");

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(Eigen::Index(vt.cols()));
    Eigen::VectorXd residual = vt.multiply(alpha) - s;
    report.loss_trace.push_back(residual.squaredNorm());
    Eigen::VectorXd grad = 2.0 * vt.multiply_transpose(residual);
    while (report.iterations < options.max_iters) {
        alpha -= report.step * grad;
        ++report.iterations;
        residual = vt.multiply(alpha) - s;
        const double loss = residual.squaredNorm();
        if (!std::isfinite(loss))
            throw Error(fmt::format("gd_fit: loss became non-finite at iteration {} (step {:.3g} too large)",
                                    report.iterations, report.step));
        report.loss_trace.push_back(loss);
        grad = 2.0 * vt.multiply_transpose(residual);
        if (grad.norm() <= options.tol) break;
    }
    report.alpha = std::move(alpha);
    report.final_loss = report.loss_trace.back();
    return report;
}

ImplicitModel perturb_coefficients(const ImplicitModel& model, double eta, std::uint64_t seed) {
    if (!(eta >= 0.0)) throw Error("perturb: eta must be non-negative");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-eta, eta);
    Eigen::VectorXd alpha = model.alpha();
    if (eta > 0.0)
        for (Eigen::Index i = 0; i < alpha.size(); ++i) alpha[i] += noise(rng);
    return model.with_alpha(std::move(alpha));
}

ImplicitModel perturb_block(const ImplicitModel& model, std::size_t kernel, double eta, std::uint64_t seed) {
    if (!(eta >= 0.0)) throw Error("perturb: eta must be non-negative");
    if (kernel >= model.kernels().size())
        throw Error(fmt::format("perturb: kernel {} out of range (q = {})", kernel, model.kernels().size()));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-eta, eta);
    Eigen::VectorXd alpha = model.alpha();
    const std::size_t width = columns_per_kernel(model.kind());
    if (eta > 0.0)
        for (std::size_t c = 0; c < width; ++c) alpha[Eigen::Index(width * kernel + c)] += noise(rng);
    return model.with_alpha(std::move(alpha));
}

// ---------------------------------------------------------------------------
// Reports

std::string RankReport::csv_header() { return "basis,q,strategy,m,rank,max_rank,sigma_max,sigma_min"; }

std::string RankReport::csv_row() const {
    return fmt::format("{},{},{},{},{},{},{},{}", to_string(kind), q, strategy, m, rank, max_rank,
                       format_real(sigma_max), format_real(sigma_min));
}

std::string RankReport::text() const {
    return fmt::format("{:<13} q={:<5} {:<10} m={:<6} rank {}/{}{}  sigma_max={:.6g} sigma_min={:.6g} (rel_tol {:.0e})",
                       to_string(kind), q, strategy, m, rank, max_rank, full_rank() ? " (full)" : " (deficient)",
                       sigma_max, sigma_min, rel_tol);
}

std::string FitReport::csv_header() {
    return RankReport::csv_header() + ",method,iterations,step,final_loss,identity_scaled,c";
}

std::string FitReport::csv_row() const {
    return fmt::format("{},{},{},{},{},{},{}", gram.csv_row(), method, iterations, format_real(step),
                       format_real(final_loss), gram_scale ? 1 : 0, gram_scale ? format_real(*gram_scale) : "");
}

std::string FitReport::text() const {
    std::string out = fmt::format("fit: {} ({} iteration{}), final loss {:.6g}\n", method, iterations,
                                  iterations == 1 ? "" : "s", final_loss);
    out += "gram: " + gram.text() + "\n";
    if (gram_scale)
        out += fmt::format("gram: V V^T = c I with c = {:.6g}\n", *gram_scale);
    else
        out += "gram: not a scaled identity\n";
    return out;
}

}  // namespace lisr
