#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "invsrc/rng.hpp"
#include "invsrc/solvers.hpp"
#include "invsrc/source.hpp"
#include "invsrc/spectral.hpp"

using namespace invsrc;

namespace {

Mat two_by_three() {
    Mat A(2, 3);
    A << 1.0, 0.0, 1.0,
         0.0, 1.0, 1.0;
    return A;
}

Vec uniform_weights(Index n, double value) {
    return Vec::Constant(n, value);
}

double weighted_norm(const Vec& x, const Vec& w) {
    return (x.array() * w.array()).matrix().norm();
}

} // namespace

TEST_CASE("basis pursuit picks the cheapest column combination") {
    const Mat A = two_by_three();
    const Vec w = uniform_weights(3, std::sqrt(6.0) / 3.0);
    const Vec b = Vec::Ones(2);
    const SolveResult result = solve_weighted_bp(A, w, b);

    REQUIRE(result.converged);
    const Vec expected = (Vec(3) << 0.0, 0.0, 1.0).finished();
    CHECK(weighted_norm(result.x - expected, w) <= 1e-6);
    CHECK(result.residual_norm <= 1e-8);
    CHECK(result.objective ==
          doctest::Approx((w.array() * result.x.array().abs()).sum())
              .epsilon(1e-8));
}

TEST_CASE("zero data yields the zero minimizer immediately") {
    const SolveResult result =
        solve_weighted_bp(two_by_three(), uniform_weights(3, 1.0), Vec::Zero(2));
    CHECK(result.converged);
    CHECK(result.x.cwiseAbs().maxCoeff() == 0.0);
    CHECK(result.objective == 0.0);
}

TEST_CASE("data outside the operator range reports infeasibility") {
    Mat A(2, 2);
    A << 1.0, 0.5,
         2.0, 1.0;
    const Vec b = (Vec(2) << 1.0, 0.0).finished();
    const SolveResult result = solve_weighted_bp(A, uniform_weights(2, 1.0), b);
    CHECK_FALSE(result.converged);
    CHECK(result.status == SolveStatus::infeasible);
    CHECK(result.residual_norm > 0.1);
}

TEST_CASE("one-dimensional lasso reproduces the soft threshold") {
    const Mat G = Mat::Ones(1, 1);
    const Vec w = uniform_weights(1, 2.0);
    const Vec d = (Vec(1) << 1.5).finished();

    SUBCASE("shrinkage regime") {
        const double alpha = 0.25;
        const SolveResult result = solve_weighted_lasso(G, d, w, alpha);
        REQUIRE(result.converged);
        CHECK(result.x(0) == doctest::Approx(1.5 - alpha * 2.0).epsilon(1e-8));
    }
    SUBCASE("kill regime") {
        const SolveResult result = solve_weighted_lasso(G, d, w, 1.0);
        REQUIRE(result.converged);
        CHECK(std::abs(result.x(0)) <= 1e-10);
    }
    SUBCASE("negative data flips the sign") {
        const SolveResult result = solve_weighted_lasso(G, -d, w, 0.25);
        REQUIRE(result.converged);
        CHECK(result.x(0) == doctest::Approx(-1.0).epsilon(1e-8));
    }
}

TEST_CASE("alpha at the dual bound zeroes the lasso minimizer") {
    const SpectralModel model(two_by_three());
    const Mat P = model.projection(2);
    const Vec w = weight_vector(P);
    SourceConfig truth;
    truth.n = 3;
    truth.support = {2};
    truth.values = (Vec(1) << 1.0).finished();
    const Vec d = P * truth.dense();

    const Vec correlations = (P.transpose() * d).cwiseAbs();
    double bound = 0.0;
    for (Index i = 0; i < 3; ++i) {
        bound = std::max(bound, correlations(i) / w(i));
    }
    const SolveResult result = solve_weighted_lasso(P, d, w, 1.01 * bound);
    REQUIRE(result.converged);
    CHECK(result.x.cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("lasso on the 2x3 example shrinks by alpha times the certificate slope") {
    const SpectralModel model(two_by_three());
    const Mat P = model.projection(2);
    const Vec w = weight_vector(P);
    SourceConfig truth;
    truth.n = 3;
    truth.support = {2};
    truth.values = (Vec(1) << 1.0).finished();

    const SolveResult result = solve_weighted_lasso(P, P * truth.dense(), w, 0.1);
    REQUIRE(result.converged);
    CHECK(std::abs(result.x(0)) <= 1e-7);
    CHECK(std::abs(result.x(1)) <= 1e-7);
    CHECK(result.x(2) ==
          doctest::Approx(1.0 - 0.1 * 3.0 / std::sqrt(6.0)).epsilon(1e-6));
}

TEST_CASE("lasso solutions approach the basis pursuit limit as alpha vanishes") {
    const SpectralModel model(two_by_three());
    const Mat P = model.projection(2);
    const Vec w = weight_vector(P);
    SourceConfig truth;
    truth.n = 3;
    truth.support = {2};
    truth.values = (Vec(1) << 1.0).finished();
    const Vec d = P * truth.dense();

    const SolveResult bp = solve_weighted_bp(P, w, d);
    REQUIRE(bp.converged);

    LassoOptions options;
    for (double alpha : {1e-2, 1e-3, 1e-4}) {
        const SolveResult lasso = solve_weighted_lasso(P, d, w, alpha, options);
        REQUIRE(lasso.converged);
        CHECK(weighted_norm(lasso.x - bp.x, w) <= 10.0 * alpha * 3.0);
        options.warm_start = lasso.x;
    }
}

TEST_CASE("reported lasso minimizer satisfies the subgradient conditions") {
    const SpectralModel model(two_by_three());
    const Mat P = model.projection(2);
    const Vec w = weight_vector(P);
    SourceConfig truth;
    truth.n = 3;
    truth.support = {2};
    truth.values = (Vec(1) << 1.0).finished();
    const Vec d = P * truth.dense();
    const double alpha = 0.05;

    const SolveResult result = solve_weighted_lasso(P, d, w, alpha);
    REQUIRE(result.converged);
    const Vec g = P.transpose() * (P * result.x - d);
    for (Index i = 0; i < 3; ++i) {
        if (std::abs(result.x(i)) > 1e-9) {
            CHECK(std::abs(g(i) + alpha * w(i) * (result.x(i) > 0 ? 1.0 : -1.0)) <=
                  1e-6);
        } else {
            CHECK(std::abs(g(i)) <= alpha * w(i) + 1e-6);
        }
    }
    CHECK(result.optimality <= 1e-6);
}

TEST_CASE("warm starts shorten the iteration count") {
    const SpectralModel model(two_by_three());
    const Mat P = model.projection(2);
    const Vec w = weight_vector(P);
    const Vec d = P * (Vec(3) << 0.0, 0.0, 1.0).finished();

    const SolveResult cold = solve_weighted_lasso(P, d, w, 1e-3);
    REQUIRE(cold.converged);
    LassoOptions warm;
    warm.warm_start = cold.x;
    const SolveResult again = solve_weighted_lasso(P, d, w, 1e-3, warm);
    REQUIRE(again.converged);
    CHECK(again.iterations <= cold.iterations);
}

TEST_CASE("lipschitz constant reflects the weight scaling") {
    const Mat G = Mat::Identity(1, 1);
    CHECK(lasso_lipschitz(G, uniform_weights(1, 2.0)) ==
          doctest::Approx(0.25).epsilon(1e-12));
    const Mat P = SpectralModel(two_by_three()).projection(2);
    const Vec w = weight_vector(P);
    const double L = lasso_lipschitz(P, w);
    CHECK(L == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("a single source is recovered exactly by the weighted formulation") {
    Xoshiro256 rng(314);
    Mat A(4, 7);
    for (Index i = 0; i < A.rows(); ++i) {
        for (Index j = 0; j < A.cols(); ++j) {
            A(i, j) = rng.next_normal();
        }
    }
    const SpectralModel model(A);
    const Vec w = weight_vector(model.projection(-1));

    SourceConfig truth;
    truth.n = 7;
    truth.support = {4};
    truth.values = (Vec(1) << 1.3).finished();
    const Vec b = A * truth.dense();

    const SolveResult result = solve_weighted_bp(A, w, b);
    REQUIRE(result.converged);
    CHECK((result.x - truth.dense()).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("predicted solution shifts the support by alpha times the coefficients") {
    SourceConfig truth;
    truth.n = 3;
    truth.support = {2};
    truth.values = (Vec(1) << 1.0).finished();
    const Vec a = (Vec(1) << 3.0 / std::sqrt(6.0)).finished();

    const PredictedSolution at_tenth = predicted_solution(truth, a, 0.1);
    CHECK(at_tenth.x(2) ==
          doctest::Approx(1.0 - 0.1 * 3.0 / std::sqrt(6.0)).epsilon(1e-12));
    CHECK(at_tenth.alpha_max ==
          doctest::Approx(std::sqrt(6.0) / 3.0).epsilon(1e-12));
    CHECK(at_tenth.in_regime);

    const PredictedSolution beyond = predicted_solution(truth, a, 1.0);
    CHECK_FALSE(beyond.in_regime);
}

TEST_CASE("zero certificate coefficients leave the truth untouched at every alpha") {
    SourceConfig truth;
    truth.n = 4;
    truth.support = {0, 3};
    truth.values = (Vec(2) << 1.0, -2.0).finished();
    const Vec a = Vec::Zero(2);

    const PredictedSolution predicted = predicted_solution(truth, a, 5.0);
    CHECK((predicted.x - truth.dense()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::isinf(predicted.alpha_max));
    CHECK(predicted.in_regime);
}

TEST_CASE("support extraction applies a strict absolute cut") {
    CHECK(extract_support(Vec::Zero(5), 1e-8).empty());
    const Vec x = (Vec(2) << 1e-12, 0.5).finished();
    const std::vector<Index> support = extract_support(x, 1e-8);
    REQUIRE(support.size() == 1);
    CHECK(support[0] == 1);
    CHECK_THROWS_AS(extract_support(x, -1.0), std::invalid_argument);
}

TEST_CASE("default support threshold scales with the peak magnitude") {
    const Vec x = (Vec(3) << 0.0, -0.5, 0.25).finished();
    CHECK(default_support_threshold(x) == doctest::Approx(5e-7).epsilon(1e-12));
    CHECK(default_support_threshold(Vec::Zero(3)) == 0.0);
}

TEST_CASE("mismatched data length is rejected") {
    CHECK_THROWS_AS(
        solve_weighted_bp(two_by_three(), uniform_weights(3, 1.0), Vec::Ones(3)),
        std::invalid_argument);
    CHECK_THROWS_AS(
        solve_weighted_lasso(two_by_three(), Vec::Ones(3),
                             uniform_weights(3, 1.0), 0.1),
        std::invalid_argument);
}

TEST_CASE("nonpositive weights are rejected") {
    Vec w = uniform_weights(3, 1.0);
    w(1) = 0.0;
    CHECK_THROWS_AS(solve_weighted_bp(two_by_three(), w, Vec::Ones(2)),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        solve_weighted_lasso(two_by_three(), Vec::Ones(2), w, 0.1),
        std::invalid_argument);
}
