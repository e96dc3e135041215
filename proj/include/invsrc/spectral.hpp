#pragma once

#include <vector>

#include "invsrc/types.hpp"

namespace invsrc {

struct SvdOptions {
    double rank_tol = 1e-10; // relative to the largest singular value
};

/// Thin SVD of a forward matrix with a numerical-rank cut. Truncation levels
/// k are 1-based counts of retained singular values; k = -1 means the full
/// numerical rank.
class SpectralModel {
public:
    explicit SpectralModel(const Mat& A, SvdOptions options = {});

    Index rows() const { return U_.rows(); }
    Index cols() const { return V_.rows(); }
    Index rank() const { return rank_; }
    const Vec& singular_values() const { return singular_values_; }
    const Mat& left_vectors() const { return U_; }
    const Mat& right_vectors() const { return V_; }

    /// Truncated pseudo-inverse action sum_{i<=k} s_i^-1 v_i (u_i . b).
    Vec apply_pinv(const Vec& b, Index k = -1) const;
    Mat apply_pinv(const Mat& B, Index k = -1) const;

    /// V_k V_k^T, the orthogonal projector kept by the truncation.
    Mat projection(Index k = -1) const;

private:
    Index resolve_k(Index k) const;

    Mat U_, V_;
    Vec singular_values_;
    Index rank_ = 0;
};

/// Diagonal weights w_i = |P e_i|_2. Throws if any column norm falls below
/// floor_tol: such a frame element is invisible to the data and the weighted
/// formulations are undefined.
Vec weight_vector(const Mat& projection, double floor_tol = 1e-8);

struct MaxPropertyReport {
    bool holds = true;
    std::vector<Index> argmax;    // per column, the winning row of |W^-1 P e_j|
    std::vector<double> margins;  // 1 - runner_up/winner (0 when tied or failed)
    std::vector<Index> failures;  // columns whose argmax is not the column itself
};

/// For each column j of P, tests that |W^-1 P e_j| peaks at row j itself and
/// that the peak value |P e_j|_2 does not exceed 1.
MaxPropertyReport check_max_property(const Mat& projection, const Vec& weights);

} // namespace invsrc
