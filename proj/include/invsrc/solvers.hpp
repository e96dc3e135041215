#pragma once

#include <optional>
#include <vector>

#include "invsrc/source.hpp"
#include "invsrc/types.hpp"

namespace invsrc {

enum class SolveStatus { converged, infeasible, iteration_limit };

const char* to_string(SolveStatus status);

struct SolveResult {
    Vec x;
    SolveStatus status = SolveStatus::iteration_limit;
    bool converged = false;
    Index iterations = 0;
    double objective = 0.0;     // |Wx|_1 for basis pursuit, T_alpha for lasso
    double residual_norm = 0.0; // |Ax - b| resp. |Gx - d|
    double optimality = 0.0;    // duality gap resp. subgradient residual
};

struct BpOptions {
    double feas_tol = 1e-9;   // relative range test for b
    double primal_tol = 1e-10;
    double dual_tol = 1e-8;   // certified duality gap
    Index max_iter = 200000;
};

/// min |Wx|_1 subject to Ax = b, via ADMM on z = Wx with the affine
/// constraint handled by an SVD projection. Data outside the numerical range
/// of A yields an infeasible status carrying the least-squares iterate.
SolveResult solve_weighted_bp(const Mat& A, const Vec& weights, const Vec& b,
                              BpOptions options = {});

struct LassoOptions {
    double primal_tol = 1e-10; // relative iterate change
    double dual_tol = 1e-8;    // subgradient optimality residual
    Index max_iter = 200000;
    double lipschitz = 0.0;            // 0 = compute from G W^-1
    std::optional<Vec> warm_start;     // in the x variables
};

/// min 0.5 |Gx - d|^2 + alpha |Wx|_1 by accelerated proximal gradient on
/// z = Wx with fixed step 1/L, L = sigma_max(G W^-1)^2, restart on
/// objective increase. Reported iterate is the best one seen.
SolveResult solve_weighted_lasso(const Mat& G, const Vec& d,
                                 const Vec& weights, double alpha,
                                 LassoOptions options = {});

/// Largest squared singular value of G with columns scaled by 1/w.
double lasso_lipschitz(const Mat& G, const Vec& weights);

struct PredictedSolution {
    Vec x;             // full-length closed-form minimizer
    double alpha_max;  // +infinity when every ratio x*_j / a_j is nonpositive
    bool in_regime;    // alpha < alpha_max (signs on the support preserved)
};

/// Closed-form regularized solution sum_J (x*_j - alpha a_j) e_j from
/// certificate coefficients a, plus the largest alpha that keeps every
/// surviving sign equal to sgn(x*_j).
PredictedSolution predicted_solution(const SourceConfig& source, const Vec& a,
                                     double alpha);

/// {i : |x_i| > tau_supp}. tau_supp is absolute and must be positive.
std::vector<Index> extract_support(const Vec& x, double tau_supp);

/// Default absolute threshold 1e-6 |x|_inf (0 for x = 0).
double default_support_threshold(const Vec& x);

} // namespace invsrc
