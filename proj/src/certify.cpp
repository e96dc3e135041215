#include "invsrc/certify.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

namespace invsrc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Mat columns(const Mat& M, const std::vector<Index>& J) {
    Mat out(M.rows(), static_cast<Index>(J.size()));
    for (std::size_t s = 0; s < J.size(); ++s) {
        const Index j = J[s];
        if (j < 0 || j >= M.cols()) {
            throw std::invalid_argument("column index " + std::to_string(j) +
                                        " out of range");
        }
        out.col(static_cast<Index>(s)) = M.col(j);
    }
    return out;
}

std::vector<bool> support_mask(Index n, const std::vector<Index>& J) {
    std::vector<bool> mask(static_cast<std::size_t>(n), false);
    for (Index j : J) mask[static_cast<std::size_t>(j)] = true;
    return mask;
}

} // namespace

ParallelColumnsReport check_parallel_columns(const Mat& A, double angle_tol) {
    ParallelColumnsReport report;
    const Index n = A.cols();
    Vec norms(n);
    for (Index j = 0; j < n; ++j) {
        norms(j) = A.col(j).norm();
        if (norms(j) == 0.0) report.degenerate.push_back(j);
    }
    const Mat gram = A.transpose() * A;
    for (Index i = 0; i < n; ++i) {
        if (norms(i) == 0.0) continue;
        for (Index j = i + 1; j < n; ++j) {
            if (norms(j) == 0.0) continue;
            const double cosine = std::abs(gram(i, j)) / (norms(i) * norms(j));
            report.worst_cosine = std::max(report.worst_cosine, cosine);
            if (cosine > 1.0 - angle_tol) {
                report.pairs.emplace_back(i, j);
            }
        }
    }
    return report;
}

CertificateReport check_c1_c2(const Mat& projection, const Vec& weights,
                              const SourceConfig& source) {
    source.validate();
    if (projection.rows() != projection.cols() ||
        projection.cols() != source.n || weights.size() != source.n) {
        throw std::invalid_argument(
            "projection, weights, and source dimensions disagree");
    }
    const Index s = source.sparsity();
    CertificateReport report;
    report.alpha_max = kInf;

    Mat M(s, s);
    for (Index row = 0; row < s; ++row) {
        const Index i = source.support[static_cast<std::size_t>(row)];
        for (Index col = 0; col < s; ++col) {
            const Index j = source.support[static_cast<std::size_t>(col)];
            M(row, col) = projection(i, j) / weights(i);
        }
    }

    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec& sv = svd.singularValues();
    if (sv(s - 1) <= 1e-12 * std::max(sv(0), 1.0)) {
        report.c1_feasible = false;
        return report; // inconclusive: the sign system is singular
    }
    report.c1_feasible = true;
    report.a = svd.solve(source.signs());

    const Vec v = (columns(projection, source.support) * report.a)
                      .cwiseQuotient(weights);
    const auto mask = support_mask(source.n, source.support);
    report.c2_margin = 0.0;
    for (Index i = 0; i < source.n; ++i) {
        if (mask[static_cast<std::size_t>(i)]) continue;
        report.c2_margin = std::max(report.c2_margin, std::abs(v(i)));
    }
    report.c2_holds = report.c2_margin < 1.0;

    for (Index pos = 0; pos < s; ++pos) {
        if (report.a(pos) == 0.0) continue;
        const double ratio = source.values(pos) / report.a(pos);
        if (ratio > 0.0) report.alpha_max = std::min(report.alpha_max, ratio);
    }

    if (report.c2_holds) {
        Vec c = Vec::Zero(source.n);
        for (Index pos = 0; pos < s; ++pos) {
            c(source.support[static_cast<std::size_t>(pos)]) = report.a(pos);
        }
        report.dual_certificate = c;
        const auto dual = verify_dual_certificate(projection, source, c);
        report.nbp1_residual = dual.nbp1_residual;
        report.nbp2_margin = dual.nbp2_margin;
        report.dual_valid = dual.valid;
    }
    return report;
}

DualCertificateReport verify_dual_certificate(const Mat& projection,
                                              const SourceConfig& source,
                                              const Vec& c, double tol) {
    source.validate();
    if (c.size() != source.n || projection.cols() != source.n) {
        throw std::invalid_argument("certificate length mismatch");
    }
    const Vec pc = projection * c;
    const Vec signs = source.signs();
    const auto mask = support_mask(source.n, source.support);

    DualCertificateReport report;
    for (Index pos = 0; pos < source.sparsity(); ++pos) {
        const Index i = source.support[static_cast<std::size_t>(pos)];
        const double norm_i = projection.col(i).norm();
        if (norm_i == 0.0) {
            report.nbp1_residual = kInf;
            return report;
        }
        report.nbp1_residual = std::max(
            report.nbp1_residual, std::abs(pc(i) / norm_i - signs(pos)));
    }
    for (Index i = 0; i < source.n; ++i) {
        if (mask[static_cast<std::size_t>(i)]) continue;
        const double norm_i = projection.col(i).norm();
        if (norm_i == 0.0) continue; // invisible index contributes nothing
        report.nbp2_margin =
            std::max(report.nbp2_margin, std::abs(pc(i) / norm_i));
    }
    report.valid = report.nbp1_residual <= tol && report.nbp2_margin < 1.0;
    return report;
}

DisjointSupportsReport check_disjoint_supports(const Mat& projection,
                                               const std::vector<Index>& J,
                                               double supp_tol) {
    const Index s = static_cast<Index>(J.size());
    DisjointSupportsReport report;
    report.disjoint = true;
    report.overlap = Mat::Zero(s, s);

    Mat rel(projection.rows(), s);
    for (Index col = 0; col < s; ++col) {
        const Vec pj = projection.col(J[static_cast<std::size_t>(col)]);
        const double peak = pj.lpNorm<Eigen::Infinity>();
        rel.col(col) = peak > 0.0 ? (pj.cwiseAbs() / peak).eval()
                                  : Vec::Zero(pj.size());
    }
    for (Index aa = 0; aa < s; ++aa) {
        for (Index bb = aa + 1; bb < s; ++bb) {
            double worst = 0.0;
            bool intersects = false;
            for (Index i = 0; i < rel.rows(); ++i) {
                const double co = std::min(rel(i, aa), rel(i, bb));
                worst = std::max(worst, co);
                if (rel(i, aa) > supp_tol && rel(i, bb) > supp_tol) {
                    intersects = true;
                }
            }
            report.overlap(aa, bb) = worst;
            report.overlap(bb, aa) = worst;
            if (intersects) report.disjoint = false;
        }
    }
    return report;
}

OrthocomplementReport check_orthocomplement(const Mat& projection, Index j,
                                            double ortho_tol) {
    if (j < 0 || j >= projection.cols()) {
        throw std::invalid_argument("index out of range");
    }
    OrthocomplementReport report;
    report.norm = projection.col(j).norm();
    report.member = report.norm >= 1.0 - ortho_tol;
    return report;
}

InjectivityReport check_injective_on_support(const Mat& A,
                                             const std::vector<Index>& J,
                                             double inj_tol) {
    if (J.empty()) {
        throw std::invalid_argument("support is empty");
    }
    const Mat As = columns(A, J);
    const Eigen::BDCSVD<Mat> sub(As);
    const Eigen::BDCSVD<Mat> full(A);
    InjectivityReport report;
    report.sigma_min = sub.singularValues()(sub.singularValues().size() - 1);
    report.injective =
        report.sigma_min > inj_tol * full.singularValues()(0);
    return report;
}

bool check_sign_consistency(const Vec& x, const SourceConfig& source,
                            double tau_supp) {
    source.validate();
    if (x.size() != source.n) {
        throw std::invalid_argument("vector length does not match source");
    }
    const Vec truth = source.dense();
    for (Index i = 0; i < x.size(); ++i) {
        if (std::abs(x(i)) <= tau_supp) continue;
        if (truth(i) == 0.0) return false;
        if ((x(i) > 0.0) != (truth(i) > 0.0)) return false;
    }
    return true;
}

CertificateReport run_certificates(const Mat& A, const Mat& projection,
                                   const Vec& weights,
                                   const SourceConfig& source,
                                   CertifyOptions options) {
    CertificateReport report = check_c1_c2(projection, weights, source);

    const auto inj =
        check_injective_on_support(A, source.support, options.inj_tol);
    report.sigma_min_support = inj.sigma_min;
    report.injective_on_support = inj.injective;

    report.disjoint_supports =
        check_disjoint_supports(projection, source.support, options.supp_tol)
            .disjoint;

    report.ortho_members.resize(source.sparsity());
    for (Index pos = 0; pos < source.sparsity(); ++pos) {
        report.ortho_members(pos) =
            check_orthocomplement(projection,
                                  source.support[static_cast<std::size_t>(pos)],
                                  options.ortho_tol)
                .norm;
    }
    return report;
}

} // namespace invsrc
