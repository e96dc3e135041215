#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "invsrc/conductivity.hpp"
#include "invsrc/forward.hpp"
#include "invsrc/matrix_io.hpp"
#include "invsrc/mesh.hpp"

using namespace invsrc;

namespace {

Mesh unit_square(int divisions) {
    DomainSpec spec;
    spec.type = DomainTag::unit_square;
    spec.divisions = divisions;
    return build_domain(spec);
}

Index vertex_at(const Mesh& mesh, double x, double y) {
    for (Index v = 0; v < mesh.vertex_count(); ++v) {
        if (std::abs(mesh.vertices(v, 0) - x) < 1e-12 &&
            std::abs(mesh.vertices(v, 1) - y) < 1e-12) {
            return v;
        }
    }
    REQUIRE(false);
    return -1;
}

} // namespace

TEST_CASE("stiffness of the two-triangle unit square matches the hand computation") {
    const Mesh mesh = unit_square(1);
    const NeumannSolver solver(mesh, Conductivity::constant(1.0));
    const Mat K = Mat(solver.stiffness());

    const Index v00 = vertex_at(mesh, 0, 0);
    const Index v10 = vertex_at(mesh, 1, 0);
    const Index v01 = vertex_at(mesh, 0, 1);
    const Index v11 = vertex_at(mesh, 1, 1);
    const Index order[4] = {v00, v10, v01, v11};

    Mat expected(4, 4);
    expected << 1.0, -0.5, -0.5, 0.0,
               -0.5,  1.0,  0.0, -0.5,
               -0.5,  0.0,  1.0, -0.5,
                0.0, -0.5, -0.5,  1.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            CHECK(K(order[i], order[j]) ==
                  doctest::Approx(expected(i, j)).epsilon(1e-14));
        }
    }
}

TEST_CASE("constants lie in the stiffness null space") {
    for (int div : {1, 4}) {
        const Mesh mesh = unit_square(div);
        const NeumannSolver solver(mesh, Conductivity::smooth_default());
        const Vec ones = Vec::Ones(mesh.vertex_count());
        CHECK((solver.stiffness() * ones).cwiseAbs().maxCoeff() <= 1e-13);
    }
}

TEST_CASE("stiffness is linear in the conductivity") {
    const Mesh mesh = unit_square(3);
    const Mat K1 = Mat(NeumannSolver(mesh, Conductivity::constant(1.0)).stiffness());
    const Mat K2 = Mat(NeumannSolver(mesh, Conductivity::constant(2.0)).stiffness());
    CHECK((K2 - 2.0 * K1).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("basis integrals sum to the mesh area") {
    const Mesh mesh = unit_square(5);
    const NeumannSolver solver(mesh, Conductivity::constant(1.0));
    CHECK(solver.basis_integrals().sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(solver.area() == doctest::Approx(1.0).epsilon(1e-12));

    const Vec ones = Vec::Ones(mesh.vertex_count());
    CHECK((solver.mass() * ones - solver.basis_integrals())
              .cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("boundary mass totals the perimeter") {
    for (int div : {1, 5}) {
        const NeumannSolver solver(unit_square(div), Conductivity::constant(1.0));
        CHECK(solver.boundary_mass().sum() == doctest::Approx(4.0).epsilon(1e-12));
    }
}

TEST_CASE("frame loads are mean-free") {
    const Mesh mesh = unit_square(4);
    const NeumannSolver solver(mesh, Conductivity::smooth_default());
    Vec x = Vec::Zero(mesh.vertex_count());
    x(3) = 2.0;
    x(7) = -0.4;
    const Vec load = solver.load_for(x);
    CHECK(std::abs(load.sum()) <= 1e-12 * x.norm());
}

TEST_CASE("potentials satisfy the zero boundary average constraint") {
    const Mesh mesh = unit_square(6);
    const NeumannSolver solver(mesh, Conductivity::smooth_default());
    Vec x = Vec::Zero(mesh.vertex_count());
    x(10) = 1.0;
    const Vec u = solver.solve(solver.load_for(x));
    CHECK(std::abs(solver.boundary_mass().dot(u)) <= 1e-12 * u.norm());
}

TEST_CASE("an unbalanced load is rejected") {
    const Mesh mesh = unit_square(3);
    const NeumannSolver solver(mesh, Conductivity::constant(1.0));
    const Vec bad = Vec::Ones(mesh.vertex_count());
    CHECK_THROWS_AS(solver.solve(bad), std::runtime_error);
}

TEST_CASE("bordered solve agrees with a dense Lagrange system") {
    const Mesh mesh = unit_square(2);
    const NeumannSolver solver(mesh, Conductivity::smooth_default());
    const Index n = mesh.vertex_count();

    Vec x = Vec::Zero(n);
    x(1) = 1.0;
    x(5) = -0.7;
    const Vec load = solver.load_for(x);
    const Vec u = solver.solve(load);

    Mat dense = Mat::Zero(n + 1, n + 1);
    dense.topLeftCorner(n, n) = Mat(solver.stiffness());
    dense.block(0, n, n, 1) = solver.boundary_mass();
    dense.block(n, 0, 1, n) = solver.boundary_mass().transpose();
    Vec rhs = Vec::Zero(n + 1);
    rhs.head(n) = load;
    const Vec z = dense.fullPivLu().solve(rhs);

    CHECK((u - z.head(n)).norm() <= 1e-10 * std::max(1.0, z.head(n).norm()));
}

TEST_CASE("trace gathers nodal values in boundary order") {
    const Mesh mesh = unit_square(3);
    const NeumannSolver solver(mesh, Conductivity::constant(1.0));
    Vec field(mesh.vertex_count());
    for (Index v = 0; v < mesh.vertex_count(); ++v) {
        field(v) = 3.0 * mesh.vertices(v, 0) - mesh.vertices(v, 1);
    }
    const Vec tr = solver.trace(field);
    REQUIRE(tr.size() == static_cast<Index>(mesh.boundary_nodes.size()));
    for (std::size_t i = 0; i < mesh.boundary_nodes.size(); ++i) {
        CHECK(tr(static_cast<Index>(i)) == field(mesh.boundary_nodes[i]));
    }
}

TEST_CASE("forward matrix has one row per boundary node and one column per vertex") {
    const Mesh mesh = unit_square(16);
    const NeumannSolver solver(mesh, Conductivity::constant(1.0));
    const Mat A = solver.forward_matrix();
    CHECK(A.rows() == 64);
    CHECK(A.cols() == 289);
}

TEST_CASE("the forward matrix kills constant coefficient vectors") {
    const Mesh mesh = unit_square(8);
    const NeumannSolver solver(mesh, Conductivity::smooth_default());
    const Mat A = solver.forward_matrix();
    const Vec ones = Vec::Ones(A.cols());
    CHECK((A * ones).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("every forward column has zero boundary-mass-weighted mean") {
    const Mesh mesh = unit_square(8);
    const NeumannSolver solver(mesh, Conductivity::smooth_default());
    const Mat A = solver.forward_matrix();
    Vec bm(A.rows());
    for (std::size_t i = 0; i < mesh.boundary_nodes.size(); ++i) {
        bm(static_cast<Index>(i)) = solver.boundary_mass()(mesh.boundary_nodes[i]);
    }
    CHECK((bm.transpose() * A).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("boundary pairing of forward columns is symmetric") {
    const Mesh mesh = unit_square(8);
    const NeumannSolver solver(mesh, Conductivity::smooth_default());
    const Mat A = solver.forward_matrix();
    Vec bm(A.rows());
    for (std::size_t i = 0; i < mesh.boundary_nodes.size(); ++i) {
        bm(static_cast<Index>(i)) = solver.boundary_mass()(mesh.boundary_nodes[i]);
    }
    const Mat G = A.transpose() * bm.asDiagonal() * A;
    CHECK((G - G.transpose()).cwiseAbs().maxCoeff() <=
          1e-8 * G.cwiseAbs().maxCoeff());
}

TEST_CASE("boundary traces converge to the separable exact potential") {
    const double pi = std::numbers::pi;
    double previous = 1e30;
    for (int div : {4, 8, 16}) {
        const Mesh mesh = unit_square(div);
        const NeumannSolver solver(mesh, Conductivity::constant(1.0));
        Vec coeffs(mesh.vertex_count());
        for (Index v = 0; v < mesh.vertex_count(); ++v) {
            coeffs(v) = std::cos(pi * mesh.vertices(v, 0)) *
                        std::cos(pi * mesh.vertices(v, 1));
        }
        const Vec u = solver.solve(solver.load_for(coeffs));
        const Vec tr = solver.trace(u);
        double err = 0.0;
        for (std::size_t i = 0; i < mesh.boundary_nodes.size(); ++i) {
            const int b = mesh.boundary_nodes[i];
            const double exact = std::cos(pi * mesh.vertices(b, 0)) *
                                 std::cos(pi * mesh.vertices(b, 1)) /
                                 (2.0 * pi * pi);
            err = std::max(err, std::abs(tr(static_cast<Index>(i)) - exact));
        }
        CHECK(err < previous);
        previous = err;
    }
    CHECK(previous <= 2e-3);
}

TEST_CASE("prolongation reproduces linear fields exactly") {
    const Mesh coarse = unit_square(3);
    const Refinement ref = refine_with_lineage(coarse);
    Vec coarse_field(coarse.vertex_count());
    for (Index v = 0; v < coarse.vertex_count(); ++v) {
        coarse_field(v) = 2.0 * coarse.vertices(v, 0) -
                          3.0 * coarse.vertices(v, 1) + 1.0;
    }
    const Vec fine_field = prolong(ref, coarse_field);
    for (Index v = 0; v < ref.mesh.vertex_count(); ++v) {
        const double exact = 2.0 * ref.mesh.vertices(v, 0) -
                             3.0 * ref.mesh.vertices(v, 1) + 1.0;
        CHECK(fine_field(v) == doctest::Approx(exact).epsilon(1e-13));
    }
}

TEST_CASE("quadrature order is validated and a nonpositive conductivity is caught") {
    const Mesh mesh = unit_square(2);
    AssemblyOptions bad;
    bad.quadrature_order = 3;
    CHECK_THROWS_AS(NeumannSolver(mesh, Conductivity::constant(1.0), bad),
                    std::invalid_argument);

    const Conductivity indefinite([](double x, double) { return x - 0.45; },
                                  "indefinite");
    CHECK_THROWS_AS(NeumannSolver(mesh, indefinite), std::runtime_error);
}

TEST_CASE("all supported quadrature orders assemble the same constant-sigma stiffness") {
    const Mesh mesh = unit_square(3);
    AssemblyOptions o1, o2, o4;
    o1.quadrature_order = 1;
    o2.quadrature_order = 2;
    o4.quadrature_order = 4;
    const Mat k1 = Mat(NeumannSolver(mesh, Conductivity::constant(2.5), o1).stiffness());
    const Mat k2 = Mat(NeumannSolver(mesh, Conductivity::constant(2.5), o2).stiffness());
    const Mat k4 = Mat(NeumannSolver(mesh, Conductivity::constant(2.5), o4).stiffness());
    CHECK((k1 - k2).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((k2 - k4).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("matrix market files round-trip bit-exactly") {
    Mat A(2, 3);
    A << 1.0, -0.25, 3.5e-7,
         0.125, 2.0 / 3.0, -1.0e12;
    std::stringstream buffer;
    write_matrix_market(A, buffer);
    const Mat back = read_matrix_market(buffer);
    REQUIRE(back.rows() == A.rows());
    REQUIRE(back.cols() == A.cols());
    CHECK((back - A).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forward metadata sidecar round-trips") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "invsrc_meta_test.txt";

    ForwardMetadata meta;
    meta.rows = 8;
    meta.cols = 25;
    meta.trace_order = {0, 1, 5, 7, 4, 3, 2, 6};
    meta.frame_size = 25;
    meta.domain = "unit_square:2";
    meta.conductivity = "smooth";
    meta.quadrature_order = 2;
    meta.h_max = 0.7071;

    write_forward_metadata_file(meta, path.string());
    const ForwardMetadata back = read_forward_metadata_file(path.string());
    std::remove(path.string().c_str());

    CHECK(back.rows == meta.rows);
    CHECK(back.cols == meta.cols);
    CHECK(back.trace_order == meta.trace_order);
    CHECK(back.frame_size == meta.frame_size);
    CHECK(back.domain == meta.domain);
    CHECK(back.conductivity == meta.conductivity);
    CHECK(back.quadrature_order == meta.quadrature_order);
    CHECK(back.h_max == meta.h_max);
}
