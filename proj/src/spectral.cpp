#include "invsrc/spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

namespace invsrc {

SpectralModel::SpectralModel(const Mat& A, SvdOptions options) {
    if (!A.allFinite()) {
        throw std::invalid_argument("matrix has non-finite entries");
    }
    if (A.size() == 0) {
        throw std::invalid_argument("matrix is empty");
    }
    Eigen::BDCSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    U_ = svd.matrixU();
    V_ = svd.matrixV();
    singular_values_ = svd.singularValues();

    const double cutoff = options.rank_tol * singular_values_(0);
    rank_ = 0;
    while (rank_ < singular_values_.size() &&
           singular_values_(rank_) > cutoff) {
        ++rank_;
    }
    if (rank_ == 0) {
        throw std::invalid_argument("matrix is numerically zero");
    }
}

Index SpectralModel::resolve_k(Index k) const {
    if (k == -1) return rank_;
    if (k < 1 || k > rank_) {
        throw std::invalid_argument(
            "truncation level " + std::to_string(k) + " outside [1, " +
            std::to_string(rank_) + "] (numerical rank)");
    }
    return k;
}

Vec SpectralModel::apply_pinv(const Vec& b, Index k) const {
    if (b.size() != rows()) {
        throw std::invalid_argument("vector length does not match matrix rows");
    }
    const Index kk = resolve_k(k);
    const Vec coeffs = U_.leftCols(kk).transpose() * b;
    return V_.leftCols(kk) *
           (coeffs.array() / singular_values_.head(kk).array()).matrix();
}

Mat SpectralModel::apply_pinv(const Mat& B, Index k) const {
    if (B.rows() != rows()) {
        throw std::invalid_argument("matrix rows do not match");
    }
    const Index kk = resolve_k(k);
    const Mat coeffs = U_.leftCols(kk).transpose() * B;
    return V_.leftCols(kk) *
           (coeffs.array().colwise() /
            singular_values_.head(kk).array())
               .matrix();
}

Mat SpectralModel::projection(Index k) const {
    const Index kk = resolve_k(k);
    const auto Vk = V_.leftCols(kk);
    return Vk * Vk.transpose();
}

Vec weight_vector(const Mat& projection, double floor_tol) {
    if (projection.rows() != projection.cols()) {
        throw std::invalid_argument("projection must be square");
    }
    Vec w(projection.cols());
    for (Index i = 0; i < projection.cols(); ++i) {
        w(i) = projection.col(i).norm();
        if (!(w(i) >= floor_tol)) {
            throw std::runtime_error(
                "weight " + std::to_string(w(i)) + " at index " +
                std::to_string(i + 1) +
                " is below the floor; this basis vector is numerically "
                "invisible to the data");
        }
    }
    return w;
}

MaxPropertyReport check_max_property(const Mat& projection,
                                     const Vec& weights) {
    const Index n = projection.cols();
    if (weights.size() != n) {
        throw std::invalid_argument("weight count does not match projection");
    }
    MaxPropertyReport report;
    report.argmax.resize(n);
    report.margins.assign(n, 0.0);

    for (Index j = 0; j < n; ++j) {
        double best = -1.0, second = -1.0;
        Index best_i = 0;
        for (Index i = 0; i < n; ++i) {
            const double value = std::abs(projection(i, j)) / weights(i);
            if (value > best) {
                second = best;
                best = value;
                best_i = i;
            } else if (value > second) {
                second = value;
            }
        }
        report.argmax[j] = best_i;
        const bool peak_bound = weights(j) <= 1.0 + 1e-10;
        if (best_i != j || !peak_bound) {
            report.holds = false;
            report.failures.push_back(j);
        } else if (best > 0.0) {
            report.margins[j] = 1.0 - second / best;
        }
    }
    return report;
}

} // namespace invsrc
