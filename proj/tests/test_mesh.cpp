#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "invsrc/mesh.hpp"

using namespace invsrc;

namespace {

DomainSpec square_spec(int divisions) {
    DomainSpec spec;
    spec.type = DomainTag::unit_square;
    spec.divisions = divisions;
    return spec;
}

DomainSpec cross_spec(int divisions) {
    DomainSpec spec;
    spec.type = DomainTag::cross;
    spec.divisions = divisions;
    return spec;
}

} // namespace

TEST_CASE("unit square with one division is two triangles") {
    const Mesh mesh = build_domain(square_spec(1));
    CHECK(mesh.vertex_count() == 4);
    CHECK(mesh.triangle_count() == 2);
    CHECK(mesh.boundary_nodes.size() == 4);
    check_mesh_invariants(mesh);
}

TEST_CASE("structured square counts follow (N+1)^2 and 2N^2") {
    for (int n : {2, 3, 5, 8}) {
        const Mesh mesh = build_domain(square_spec(n));
        CHECK(mesh.vertex_count() == (n + 1) * (n + 1));
        CHECK(mesh.triangle_count() == 2 * n * n);
        CHECK(mesh.boundary_nodes.size() == static_cast<std::size_t>(4 * n));
        check_mesh_invariants(mesh);
    }
}

TEST_CASE("triangles are positively oriented") {
    for (const Mesh& mesh :
         {build_domain(square_spec(4)), build_domain(cross_spec(6))}) {
        for (Index t = 0; t < mesh.triangle_count(); ++t) {
            CHECK(mesh.signed_area(t) > 0.0);
        }
    }
}

TEST_CASE("total area matches the analytic domain area") {
    const DomainSpec sq = square_spec(7);
    const Mesh square = build_domain(sq);
    CHECK(analytic_area(sq) == 1.0);
    CHECK(square.total_area() == doctest::Approx(1.0).epsilon(1e-12));

    const DomainSpec cr = cross_spec(6);
    const Mesh cross = build_domain(cr);
    CHECK(analytic_area(cr) == doctest::Approx(20.0 / 9.0).epsilon(1e-14));
    CHECK(cross.total_area() ==
          doctest::Approx(20.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("cross mesh satisfies Euler's formula for one hole-free region") {
    const Mesh mesh = build_domain(cross_spec(8));
    check_mesh_invariants(mesh);
    const Index V = mesh.vertex_count();
    const Index E = mesh.edge_count();
    const Index F = mesh.triangle_count();
    CHECK(V - E + F == 1);
}

TEST_CASE("boundary walk is closed, CCW, and starts at the lexicographic minimum") {
    for (const Mesh& mesh :
         {build_domain(square_spec(5)), build_domain(cross_spec(4))}) {
        REQUIRE(mesh.boundary_nodes.size() >= 3);
        int min_node = mesh.boundary_nodes[0];
        for (int b : mesh.boundary_nodes) {
            const bool earlier =
                mesh.vertices(b, 0) < mesh.vertices(min_node, 0) ||
                (mesh.vertices(b, 0) == mesh.vertices(min_node, 0) &&
                 mesh.vertices(b, 1) < mesh.vertices(min_node, 1));
            if (earlier) min_node = b;
        }
        CHECK(mesh.boundary_nodes[0] == min_node);

        double twice_area = 0.0;
        const auto& cycle = mesh.boundary_nodes;
        for (std::size_t i = 0; i < cycle.size(); ++i) {
            const std::size_t j = (i + 1) % cycle.size();
            twice_area += mesh.vertices(cycle[i], 0) * mesh.vertices(cycle[j], 1) -
                          mesh.vertices(cycle[j], 0) * mesh.vertices(cycle[i], 1);
        }
        CHECK(twice_area > 0.0);
        CHECK(0.5 * twice_area ==
              doctest::Approx(mesh.total_area()).epsilon(1e-12));
    }
}

TEST_CASE("refinement quarters every triangle and halves h_max") {
    const Mesh coarse = build_domain(square_spec(1));
    const Refinement ref = refine_with_lineage(coarse);
    const Mesh& fine = ref.mesh;
    check_mesh_invariants(fine);

    CHECK(fine.triangle_count() == 8);
    CHECK(fine.vertex_count() == 9);
    CHECK(ref.coarse_vertex_count == coarse.vertex_count());
    CHECK(fine.h_max == doctest::Approx(coarse.h_max / 2.0).epsilon(1e-12));

    for (Index t = 0; t < fine.triangle_count(); ++t) {
        CHECK(fine.signed_area(t) ==
              doctest::Approx(coarse.signed_area(0) / 4.0).epsilon(1e-12));
    }
    CHECK(fine.total_area() ==
          doctest::Approx(coarse.total_area()).epsilon(1e-12));
}

TEST_CASE("coarse vertices are a prefix of the refined vertex list") {
    const Mesh coarse = build_domain(cross_spec(4));
    const Refinement ref = refine_with_lineage(coarse);
    for (Index v = 0; v < coarse.vertex_count(); ++v) {
        CHECK(ref.mesh.vertices(v, 0) == coarse.vertices(v, 0));
        CHECK(ref.mesh.vertices(v, 1) == coarse.vertices(v, 1));
    }
    for (std::size_t i = 0; i < ref.parent_edges.size(); ++i) {
        const auto [a, b] = ref.parent_edges[i];
        const Index f = ref.coarse_vertex_count + static_cast<Index>(i);
        CHECK(ref.mesh.vertices(f, 0) ==
              doctest::Approx(0.5 * (coarse.vertices(a, 0) +
                                     coarse.vertices(b, 0))).epsilon(1e-15));
        CHECK(ref.mesh.vertices(f, 1) ==
              doctest::Approx(0.5 * (coarse.vertices(a, 1) +
                                     coarse.vertices(b, 1))).epsilon(1e-15));
    }
}

TEST_CASE("coarse boundary vertices stay on the refined boundary") {
    const Mesh coarse = build_domain(cross_spec(4));
    const Mesh fine = refine(coarse);
    const std::set<int> fine_boundary(fine.boundary_nodes.begin(),
                                      fine.boundary_nodes.end());
    for (int b : coarse.boundary_nodes) {
        CHECK(fine_boundary.count(b) == 1);
    }
}

TEST_CASE("double refinement divides h_max by four") {
    const Mesh coarse = build_domain(square_spec(3));
    const Mesh fine2 = refine(refine(coarse));
    CHECK(fine2.h_max == doctest::Approx(coarse.h_max / 4.0).epsilon(1e-12));
}

TEST_CASE("grading jitter is reproducible and respects the quality floor") {
    DomainSpec spec = square_spec(6);
    spec.grading_seed = 99;
    const Mesh a = build_domain(spec);
    const Mesh b = build_domain(spec);
    check_mesh_invariants(a);
    CHECK((a.vertices - b.vertices).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.min_quality() >= spec.quality_floor);

    const Mesh uniform = build_domain(square_spec(6));
    CHECK((a.vertices - uniform.vertices).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("an unreachable quality floor is rejected") {
    DomainSpec spec = square_spec(6);
    spec.grading_seed = 99;
    spec.quality_floor = 0.95;
    CHECK_THROWS_AS(build_domain(spec), std::runtime_error);
}

TEST_CASE("nonpositive division counts are rejected") {
    CHECK_THROWS_AS(build_domain(square_spec(0)), std::invalid_argument);
    CHECK_THROWS_AS(build_domain(square_spec(-2)), std::invalid_argument);
}

TEST_CASE("degenerate cross geometry is rejected") {
    DomainSpec spec = cross_spec(4);
    spec.arms.arm_halfwidth = 0.0;
    CHECK_THROWS_AS(build_domain(spec), std::invalid_argument);
    spec.arms.arm_halfwidth = 2.0;
    spec.arms.extent = 1.0;
    CHECK_THROWS_AS(build_domain(spec), std::invalid_argument);
}

TEST_CASE("mesh files round-trip exactly") {
    DomainSpec spec = cross_spec(3);
    spec.grading_seed = 7;
    const Mesh mesh = build_domain(spec);

    std::stringstream buffer;
    write_mesh(mesh, buffer);
    const Mesh back = read_mesh(buffer);

    REQUIRE(back.vertex_count() == mesh.vertex_count());
    REQUIRE(back.triangle_count() == mesh.triangle_count());
    CHECK((back.vertices - mesh.vertices).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.triangles - mesh.triangles).cwiseAbs().maxCoeff() == 0);
    CHECK(back.boundary_nodes == mesh.boundary_nodes);
    CHECK(back.h_max == mesh.h_max);

    std::stringstream second;
    write_mesh(back, second);
    CHECK(second.str() == buffer.str());
}

TEST_CASE("invariant checker flags a flipped triangle") {
    Mesh mesh = build_domain(square_spec(2));
    std::swap(mesh.triangles(0, 0), mesh.triangles(0, 1));
    CHECK_THROWS_AS(check_mesh_invariants(mesh), std::runtime_error);
}

TEST_CASE("invariant checker flags corrupted boundary bookkeeping") {
    Mesh mesh = build_domain(square_spec(2));
    mesh.boundary_nodes.pop_back();
    CHECK_THROWS_AS(check_mesh_invariants(mesh), std::runtime_error);
}

TEST_CASE("reading a malformed mesh file fails") {
    std::stringstream bad("mesh 2d\nv 0 0\nv 1 0\nt 0 1 7\n");
    CHECK_THROWS_AS(read_mesh(bad), std::runtime_error);
}
