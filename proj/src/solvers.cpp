#include "invsrc/solvers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SVD>

namespace invsrc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive_weights(const Vec& weights) {
    for (Index i = 0; i < weights.size(); ++i) {
        if (!(weights(i) > 0.0) || !std::isfinite(weights(i))) {
            throw std::invalid_argument("weight " + std::to_string(i + 1) +
                                        " is not strictly positive");
        }
    }
}

Mat scale_columns_by_inverse(const Mat& G, const Vec& weights) {
    if (G.cols() != weights.size()) {
        throw std::invalid_argument("operator column count != weight count");
    }
    return G * weights.cwiseInverse().asDiagonal();
}

Vec soft_threshold(const Vec& v, double kappa) {
    return v.unaryExpr([kappa](double t) {
        if (t > kappa) return t - kappa;
        if (t < -kappa) return t + kappa;
        return 0.0;
    });
}

double lasso_objective(const Mat& B, const Vec& d, const Vec& z,
                       double alpha) {
    return 0.5 * (B * z - d).squaredNorm() + alpha * z.lpNorm<1>();
}

/// max-norm violation of 0 in B^T(Bz - d) + alpha * sgn-set(z)
double subgradient_residual(const Mat& B, const Vec& d, const Vec& z,
                            double alpha) {
    const Vec r = B.transpose() * (B * z - d);
    double worst = 0.0;
    for (Index i = 0; i < z.size(); ++i) {
        double v;
        if (z(i) > 0.0) {
            v = std::abs(r(i) + alpha);
        } else if (z(i) < 0.0) {
            v = std::abs(r(i) - alpha);
        } else {
            v = std::max(0.0, std::abs(r(i)) - alpha);
        }
        worst = std::max(worst, v);
    }
    return worst;
}

} // namespace

const char* to_string(SolveStatus status) {
    switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::iteration_limit: return "iteration_limit";
    }
    return "unknown";
}

SolveResult solve_weighted_bp(const Mat& A, const Vec& weights, const Vec& b,
                              BpOptions options) {
    if (b.size() != A.rows()) {
        throw std::invalid_argument("data length does not match matrix rows");
    }
    require_positive_weights(weights);
    const Mat B = scale_columns_by_inverse(A, weights);
    const Index n = B.cols();

    SolveResult result;
    if (b.norm() == 0.0) {
        result.x = Vec::Zero(n);
        result.status = SolveStatus::converged;
        result.converged = true;
        return result;
    }

    Eigen::BDCSVD<Mat> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    Index r = 0;
    while (r < sv.size() && sv(r) > 1e-12 * sv(0)) ++r;
    if (r == 0) {
        result.x = Vec::Zero(n);
        result.status = SolveStatus::infeasible;
        result.residual_norm = b.norm();
        return result;
    }
    const Mat Ur = svd.matrixU().leftCols(r);
    const Mat Vr = svd.matrixV().leftCols(r);

    const Vec coeff = Ur.transpose() * b;
    const double range_residual = (b - Ur * coeff).norm();
    const Vec z0 = Vr * (coeff.array() / sv.head(r).array()).matrix();
    if (range_residual > options.feas_tol * b.norm()) {
        result.x = z0.cwiseQuotient(weights);
        result.status = SolveStatus::infeasible;
        result.objective = z0.lpNorm<1>();
        result.residual_norm = (A * result.x - b).norm();
        return result;
    }

    // ADMM on min |z|_1 s.t. Bz = b; z-update projects onto the affine set
    double rho = 1.0;
    Vec z = z0;
    Vec w = soft_threshold(z0, 1.0 / rho);
    Vec u = Vec::Zero(n);
    Index it = 0;
    bool settled = false;
    for (; it < options.max_iter; ++it) {
        const Vec v = w - u;
        z = v - Vr * (Vr.transpose() * v) + z0;
        const Vec w_old = w;
        w = soft_threshold(z + u, 1.0 / rho);
        u += z - w;

        const double rp = (z - w).norm();
        const double rd = rho * (w - w_old).norm();
        const double scale = std::max(1.0, std::max(z.norm(), w.norm()));
        if (rp <= options.primal_tol * scale &&
            rd <= options.primal_tol * scale) {
            settled = true;
            ++it;
            break;
        }
        // adaptation stops after the burn-in; persistent rescaling can lock
        // the iteration into a limit cycle near degenerate vertices
        if (it < 1000 && it % 10 == 9) {
            if (rp > 10.0 * rd) {
                rho *= 2.0;
                u *= 0.5;
            } else if (rd > 10.0 * rp) {
                rho *= 0.5;
                u *= 2.0;
            }
        }
    }

    // duality certificate: max b.nu s.t. |B^T nu|_inf <= 1
    const double l1 = w.lpNorm<1>();
    const auto certified_gap = [&](Vec nu) {
        const double dual_norm = (B.transpose() * nu).lpNorm<Eigen::Infinity>();
        if (dual_norm > 1.0) nu /= dual_norm;
        return l1 - b.dot(nu);
    };
    double gap = l1; // zero iterate: gap equals the (zero) objective
    if (u.norm() > 0.0) {
        // dual candidate from the scaled multiplier, which the projection
        // step keeps in range(B^T)
        const Vec nu = Ur * ((Vr.transpose() * (rho * u)).array() /
                             sv.head(r).array())
                                .matrix();
        gap = std::min(gap, certified_gap(nu));
    }
    std::vector<Index> support;
    for (Index i = 0; i < n; ++i) {
        if (w(i) != 0.0) support.push_back(i);
    }
    if (!support.empty()) {
        // dual candidate from the sign pattern on the support
        Mat Bs(B.rows(), static_cast<Index>(support.size()));
        Vec gs(static_cast<Index>(support.size()));
        for (std::size_t s = 0; s < support.size(); ++s) {
            Bs.col(static_cast<Index>(s)) = B.col(support[s]);
            gs(static_cast<Index>(s)) = w(support[s]) > 0.0 ? 1.0 : -1.0;
        }
        Eigen::BDCSVD<Mat> sub(Bs, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Vec& ssv = sub.singularValues();
        Index sr = 0;
        while (sr < ssv.size() && ssv(sr) > 1e-12 * ssv(0)) ++sr;
        const Vec nu = sub.matrixU().leftCols(sr) *
                       ((sub.matrixV().leftCols(sr).transpose() * gs).array() /
                        ssv.head(sr).array())
                           .matrix();
        gap = std::min(gap, certified_gap(nu));
    }
    const bool certified = gap <= options.dual_tol * std::max(1.0, l1);

    result.x = w.cwiseQuotient(weights);
    result.iterations = it;
    result.objective = l1;
    result.residual_norm = (A * result.x - b).norm();
    result.optimality = gap;
    result.converged = settled && certified;
    result.status = result.converged ? SolveStatus::converged
                                     : SolveStatus::iteration_limit;
    return result;
}

double lasso_lipschitz(const Mat& G, const Vec& weights) {
    require_positive_weights(weights);
    const Mat B = scale_columns_by_inverse(G, weights);
    const Eigen::BDCSVD<Mat> svd(B);
    const double smax = svd.singularValues().size() > 0
                            ? svd.singularValues()(0)
                            : 0.0;
    return smax * smax;
}

SolveResult solve_weighted_lasso(const Mat& G, const Vec& d,
                                 const Vec& weights, double alpha,
                                 LassoOptions options) {
    if (!(alpha > 0.0)) {
        throw std::invalid_argument(
            "alpha must be positive; use the basis pursuit solver for alpha = 0");
    }
    if (d.size() != G.rows()) {
        throw std::invalid_argument("data length does not match operator rows");
    }
    require_positive_weights(weights);
    const Mat B = scale_columns_by_inverse(G, weights);
    const Index n = B.cols();

    const double L =
        options.lipschitz > 0.0 ? options.lipschitz : lasso_lipschitz(G, weights);
    SolveResult result;
    if (L == 0.0) {
        result.x = Vec::Zero(n);
        result.status = SolveStatus::converged;
        result.converged = true;
        result.objective = 0.5 * d.squaredNorm();
        result.residual_norm = d.norm();
        return result;
    }

    Vec z = Vec::Zero(n);
    if (options.warm_start) {
        if (options.warm_start->size() != n) {
            throw std::invalid_argument("warm start has wrong length");
        }
        z = options.warm_start->cwiseProduct(weights);
    }
    Vec z_prev = z;
    Vec y = z;
    double t = 1.0;
    double obj = lasso_objective(B, d, z, alpha);

    Index it = 0;
    bool done = false;
    double opt_residual = kInf;
    for (; it < options.max_iter && !done; ++it) {
        const Vec grad = B.transpose() * (B * y - d);
        Vec cand = soft_threshold(y - grad / L, alpha / L);
        double cand_obj = lasso_objective(B, d, cand, alpha);
        if (cand_obj > obj) {
            // restart: plain descent step from the last accepted iterate
            t = 1.0;
            const Vec grad_z = B.transpose() * (B * z - d);
            cand = soft_threshold(z - grad_z / L, alpha / L);
            cand_obj = lasso_objective(B, d, cand, alpha);
        }
        z_prev = z;
        z = cand;
        obj = cand_obj;

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = z + ((t - 1.0) / t_next) * (z - z_prev);
        t = t_next;

        const double change =
            (z - z_prev).norm() / std::max(1.0, z.norm());
        if (change < options.primal_tol) {
            done = true;
        }
        if (done || it % 25 == 24) {
            opt_residual = subgradient_residual(B, d, z, alpha);
            if (opt_residual <= options.dual_tol) done = true;
        }
    }
    if (!std::isfinite(opt_residual) || !done) {
        opt_residual = subgradient_residual(B, d, z, alpha);
        if (opt_residual <= options.dual_tol) done = true;
    }

    result.x = z.cwiseQuotient(weights);
    result.iterations = it;
    result.objective = obj;
    result.residual_norm = (B * z - d).norm();
    result.optimality = opt_residual;
    result.converged = done;
    result.status =
        done ? SolveStatus::converged : SolveStatus::iteration_limit;
    return result;
}

PredictedSolution predicted_solution(const SourceConfig& source, const Vec& a,
                                     double alpha) {
    source.validate();
    if (a.size() != source.sparsity()) {
        throw std::invalid_argument(
            "certificate coefficient count does not match the support");
    }
    if (!(alpha >= 0.0)) {
        throw std::invalid_argument("alpha must be nonnegative");
    }

    PredictedSolution predicted;
    predicted.alpha_max = kInf;
    for (Index pos = 0; pos < source.sparsity(); ++pos) {
        if (a(pos) == 0.0) continue;
        const double ratio = source.values(pos) / a(pos);
        if (ratio > 0.0) {
            predicted.alpha_max = std::min(predicted.alpha_max, ratio);
        }
    }
    predicted.in_regime = alpha < predicted.alpha_max;

    predicted.x = Vec::Zero(source.n);
    for (Index pos = 0; pos < source.sparsity(); ++pos) {
        predicted.x(source.support[static_cast<std::size_t>(pos)]) =
            source.values(pos) - alpha * a(pos);
    }
    return predicted;
}

std::vector<Index> extract_support(const Vec& x, double tau_supp) {
    if (tau_supp < 0.0) {
        throw std::invalid_argument("support threshold must be nonnegative");
    }
    std::vector<Index> support;
    for (Index i = 0; i < x.size(); ++i) {
        if (std::abs(x(i)) > tau_supp) support.push_back(i);
    }
    return support;
}

double default_support_threshold(const Vec& x) {
    return 1e-6 * x.lpNorm<Eigen::Infinity>();
}

} // namespace invsrc
