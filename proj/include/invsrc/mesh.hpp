#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "invsrc/types.hpp"

namespace invsrc {

enum class DomainTag { unit_square, cross, external };

/// Conforming 2D triangulation with boundary bookkeeping. Immutable after
/// construction; safe to share across threads.
struct Mesh {
    Eigen::Matrix<double, Eigen::Dynamic, 2> vertices;
    Eigen::Matrix<int, Eigen::Dynamic, 3> triangles; // positively oriented
    std::vector<int> boundary_nodes; // CCW, starts at lexicographic minimum
    DomainTag domain_tag = DomainTag::external;
    double h_max = 0.0;

    Index vertex_count() const { return vertices.rows(); }
    Index triangle_count() const { return triangles.rows(); }

    double signed_area(Index t) const;
    double total_area() const;
    /// Worst inradius/circumradius ratio over all triangles.
    double min_quality() const;
    Index edge_count() const;
};

struct CrossGeometry {
    double arm_halfwidth = 1.0 / 3.0;
    double extent = 1.0; // cross bounded by [-extent, extent]^2
};

struct DomainSpec {
    DomainTag type = DomainTag::unit_square;
    int divisions = 1;
    std::optional<std::uint64_t> grading_seed; // none => uniform grid
    CrossGeometry arms;
    double quality_floor = 0.05;
};

/// Structured triangulation of the requested domain. A grading seed jitters
/// interior vertices by at most a quarter of the shortest incident edge;
/// the result is rejected if any triangle quality drops below the floor.
Mesh build_domain(const DomainSpec& spec);

/// Area of the domain described by `spec`, from its geometry parameters.
double analytic_area(const DomainSpec& spec);

struct Refinement {
    Mesh mesh;
    Index coarse_vertex_count = 0;
    /// Fine vertex coarse_vertex_count + i is the midpoint of this coarse edge.
    std::vector<std::pair<int, int>> parent_edges;
};

/// Uniform quadrisection. Coarse vertices keep their indices (they form a
/// prefix of the fine vertex list).
Refinement refine_with_lineage(const Mesh& mesh);
Mesh refine(const Mesh& mesh);

/// Throws std::runtime_error on orientation, conformity, or boundary
/// bookkeeping violations.
void check_mesh_invariants(const Mesh& mesh);

// Text format: "mesh 2d" header, then "v x y", "t i j k", "b i" lines
// (0-based indices). Round-trips exactly for finite decimal coordinates.
void write_mesh(const Mesh& mesh, std::ostream& out);
void write_mesh_file(const Mesh& mesh, const std::string& path);
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);

} // namespace invsrc
