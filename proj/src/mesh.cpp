#include "invsrc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "invsrc/rng.hpp"

namespace invsrc {

namespace {

double triangle_signed_area(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                            const Eigen::Vector2d& c) {
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) -
                  (b.y() - a.y()) * (c.x() - a.x()));
}

double triangle_quality(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                        const Eigen::Vector2d& c) {
    const double la = (b - c).norm();
    const double lb = (c - a).norm();
    const double lc = (a - b).norm();
    const double area = std::abs(triangle_signed_area(a, b, c));
    if (area <= 0.0 || la <= 0.0 || lb <= 0.0 || lc <= 0.0) return 0.0;
    const double inradius = 2.0 * area / (la + lb + lc);
    const double circumradius = la * lb * lc / (4.0 * area);
    return inradius / circumradius;
}

std::uint64_t edge_key(int a, int b) {
    const std::uint64_t lo = static_cast<std::uint32_t>(std::min(a, b));
    const std::uint64_t hi = static_cast<std::uint32_t>(std::max(a, b));
    return (hi << 32) | lo;
}

/// Directed boundary edges (tail -> head) of a positively oriented mesh,
/// walked into the CCW cycle starting at the lexicographically smallest
/// boundary vertex.
std::vector<int> extract_boundary(const Mesh& mesh) {
    std::unordered_map<std::uint64_t, int> edge_uses;
    edge_uses.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 3);
    for (Index t = 0; t < mesh.triangle_count(); ++t) {
        for (int e = 0; e < 3; ++e) {
            const int a = mesh.triangles(t, e);
            const int b = mesh.triangles(t, (e + 1) % 3);
            ++edge_uses[edge_key(a, b)];
        }
    }

    std::unordered_map<int, int> next_on_boundary;
    for (Index t = 0; t < mesh.triangle_count(); ++t) {
        for (int e = 0; e < 3; ++e) {
            const int a = mesh.triangles(t, e);
            const int b = mesh.triangles(t, (e + 1) % 3);
            if (edge_uses.at(edge_key(a, b)) != 1) continue;
            if (!next_on_boundary.emplace(a, b).second) {
                throw std::runtime_error(
                    "mesh boundary is pinched at vertex " + std::to_string(a));
            }
        }
    }
    if (next_on_boundary.empty()) {
        throw std::runtime_error("mesh has no boundary edges");
    }

    int start = -1;
    for (const auto& [tail, head] : next_on_boundary) {
        (void)head;
        if (start < 0) {
            start = tail;
            continue;
        }
        const auto cur = mesh.vertices.row(tail);
        const auto best = mesh.vertices.row(start);
        if (cur.x() < best.x() ||
            (cur.x() == best.x() && cur.y() < best.y())) {
            start = tail;
        }
    }

    std::vector<int> cycle;
    cycle.reserve(next_on_boundary.size());
    int v = start;
    do {
        cycle.push_back(v);
        const auto it = next_on_boundary.find(v);
        if (it == next_on_boundary.end()) {
            throw std::runtime_error("mesh boundary walk broke at vertex " +
                                     std::to_string(v));
        }
        v = it->second;
    } while (v != start && cycle.size() <= next_on_boundary.size());
    if (v != start || cycle.size() != next_on_boundary.size()) {
        throw std::runtime_error("mesh boundary is not a single cycle");
    }
    return cycle;
}

double compute_h_max(const Mesh& mesh) {
    double h = 0.0;
    for (Index t = 0; t < mesh.triangle_count(); ++t) {
        for (int e = 0; e < 3; ++e) {
            const int a = mesh.triangles(t, e);
            const int b = mesh.triangles(t, (e + 1) % 3);
            h = std::max(h, (mesh.vertices.row(a) - mesh.vertices.row(b)).norm());
        }
    }
    return h;
}

std::vector<double> axis_lines(const DomainSpec& spec) {
    std::vector<double> lines;
    if (spec.type == DomainTag::unit_square) {
        const int n = spec.divisions;
        lines.reserve(n + 1);
        for (int i = 0; i <= n; ++i) {
            lines.push_back(static_cast<double>(i) / n);
        }
        return lines;
    }
    const double a = spec.arms.arm_halfwidth;
    const double ext = spec.arms.extent;
    const double breaks[4] = {-ext, -a, a, ext};
    const int d = spec.divisions;
    lines.reserve(3 * d + 1);
    for (int b = 0; b < 3; ++b) {
        for (int i = 0; i < d; ++i) {
            lines.push_back(breaks[b] +
                            (breaks[b + 1] - breaks[b]) * i / d);
        }
    }
    lines.push_back(breaks[3]);
    return lines;
}

void apply_grading(Mesh& mesh, std::uint64_t seed, double quality_floor) {
    std::vector<bool> on_boundary(mesh.vertex_count(), false);
    for (int v : mesh.boundary_nodes) on_boundary[v] = true;

    std::vector<double> shortest_edge(
        mesh.vertex_count(), std::numeric_limits<double>::infinity());
    for (Index t = 0; t < mesh.triangle_count(); ++t) {
        for (int e = 0; e < 3; ++e) {
            const int a = mesh.triangles(t, e);
            const int b = mesh.triangles(t, (e + 1) % 3);
            const double len =
                (mesh.vertices.row(a) - mesh.vertices.row(b)).norm();
            shortest_edge[a] = std::min(shortest_edge[a], len);
            shortest_edge[b] = std::min(shortest_edge[b], len);
        }
    }

    Xoshiro256 rng(seed);
    for (Index v = 0; v < mesh.vertex_count(); ++v) {
        if (on_boundary[v]) continue;
        const double radius = 0.25 * shortest_edge[v] * rng.next_uniform();
        const double angle = 2.0 * M_PI * rng.next_uniform();
        mesh.vertices(v, 0) += radius * std::cos(angle);
        mesh.vertices(v, 1) += radius * std::sin(angle);
    }

    for (Index t = 0; t < mesh.triangle_count(); ++t) {
        if (mesh.signed_area(t) <= 0.0) {
            throw std::runtime_error(
                "grading inverted triangle " + std::to_string(t) +
                "; use a weaker grading or a finer mesh");
        }
    }
    const double q = mesh.min_quality();
    if (q < quality_floor) {
        std::ostringstream msg;
        msg << "grading left triangle quality " << q << " below floor "
            << quality_floor;
        throw std::runtime_error(msg.str());
    }
}

} // namespace

double Mesh::signed_area(Index t) const {
    return triangle_signed_area(vertices.row(triangles(t, 0)),
                                vertices.row(triangles(t, 1)),
                                vertices.row(triangles(t, 2)));
}

double Mesh::total_area() const {
    double sum = 0.0;
    for (Index t = 0; t < triangle_count(); ++t) sum += signed_area(t);
    return sum;
}

double Mesh::min_quality() const {
    double q = std::numeric_limits<double>::infinity();
    for (Index t = 0; t < triangle_count(); ++t) {
        q = std::min(q, triangle_quality(vertices.row(triangles(t, 0)),
                                         vertices.row(triangles(t, 1)),
                                         vertices.row(triangles(t, 2))));
    }
    return q;
}

Index Mesh::edge_count() const {
    std::unordered_map<std::uint64_t, int> seen;
    seen.reserve(static_cast<std::size_t>(triangle_count()) * 3);
    for (Index t = 0; t < triangle_count(); ++t) {
        for (int e = 0; e < 3; ++e) {
            seen.emplace(edge_key(triangles(t, e), triangles(t, (e + 1) % 3)),
                         0);
        }
    }
    return static_cast<Index>(seen.size());
}

double analytic_area(const DomainSpec& spec) {
    switch (spec.type) {
    case DomainTag::unit_square:
        return 1.0;
    case DomainTag::cross: {
        const double a = spec.arms.arm_halfwidth;
        const double ext = spec.arms.extent;
        return 4.0 * ext * ext - 4.0 * (ext - a) * (ext - a);
    }
    case DomainTag::external:
        throw std::invalid_argument("no analytic area for an external mesh");
    }
    throw std::invalid_argument("unknown domain tag");
}

Mesh build_domain(const DomainSpec& spec) {
    if (spec.divisions < 1) {
        throw std::invalid_argument("divisions must be at least 1");
    }
    if (spec.type == DomainTag::external) {
        throw std::invalid_argument("external meshes come from files");
    }
    if (spec.type == DomainTag::cross) {
        if (!(spec.arms.arm_halfwidth > 0.0) ||
            !(spec.arms.arm_halfwidth < spec.arms.extent)) {
            throw std::invalid_argument(
                "cross needs 0 < arm_halfwidth < extent");
        }
    }

    const std::vector<double> lines = axis_lines(spec);
    const int nl = static_cast<int>(lines.size());
    const int ncell = nl - 1;
    const int d = spec.divisions;

    const auto cell_kept = [&](int ix, int iy) {
        if (spec.type == DomainTag::unit_square) return true;
        return ix / d == 1 || iy / d == 1;
    };

    std::vector<int> lattice_to_vertex(
        static_cast<std::size_t>(nl) * nl, -1);
    const auto lattice_id = [nl](int ix, int iy) { return iy * nl + ix; };

    int nv = 0;
    for (int iy = 0; iy < nl; ++iy) {
        for (int ix = 0; ix < nl; ++ix) {
            bool used = false;
            for (int cy = iy - 1; cy <= iy && !used; ++cy) {
                for (int cx = ix - 1; cx <= ix && !used; ++cx) {
                    if (cx >= 0 && cy >= 0 && cx < ncell && cy < ncell &&
                        cell_kept(cx, cy)) {
                        used = true;
                    }
                }
            }
            if (used) lattice_to_vertex[lattice_id(ix, iy)] = nv++;
        }
    }

    Mesh mesh;
    mesh.domain_tag = spec.type;
    mesh.vertices.resize(nv, 2);
    for (int iy = 0; iy < nl; ++iy) {
        for (int ix = 0; ix < nl; ++ix) {
            const int v = lattice_to_vertex[lattice_id(ix, iy)];
            if (v < 0) continue;
            mesh.vertices(v, 0) = lines[ix];
            mesh.vertices(v, 1) = lines[iy];
        }
    }

    int nt = 0;
    for (int cy = 0; cy < ncell; ++cy) {
        for (int cx = 0; cx < ncell; ++cx) {
            if (cell_kept(cx, cy)) nt += 2;
        }
    }
    mesh.triangles.resize(nt, 3);
    int t = 0;
    for (int cy = 0; cy < ncell; ++cy) {
        for (int cx = 0; cx < ncell; ++cx) {
            if (!cell_kept(cx, cy)) continue;
            const int v00 = lattice_to_vertex[lattice_id(cx, cy)];
            const int v10 = lattice_to_vertex[lattice_id(cx + 1, cy)];
            const int v01 = lattice_to_vertex[lattice_id(cx, cy + 1)];
            const int v11 = lattice_to_vertex[lattice_id(cx + 1, cy + 1)];
            mesh.triangles.row(t++) << v00, v10, v11;
            mesh.triangles.row(t++) << v00, v11, v01;
        }
    }

    mesh.boundary_nodes = extract_boundary(mesh);
    if (spec.grading_seed) {
        apply_grading(mesh, *spec.grading_seed, spec.quality_floor);
        mesh.boundary_nodes = extract_boundary(mesh);
    }
    mesh.h_max = compute_h_max(mesh);
    return mesh;
}

Refinement refine_with_lineage(const Mesh& mesh) {
    check_mesh_invariants(mesh);

    Refinement out;
    out.coarse_vertex_count = mesh.vertex_count();

    std::unordered_map<std::uint64_t, int> midpoint;
    std::vector<std::pair<int, int>> parent_edges;
    const auto midpoint_of = [&](int a, int b) {
        const auto key = edge_key(a, b);
        const auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const int id = static_cast<int>(mesh.vertex_count()) +
                       static_cast<int>(parent_edges.size());
        midpoint.emplace(key, id);
        parent_edges.emplace_back(std::min(a, b), std::max(a, b));
        return id;
    };

    const Index nt = mesh.triangle_count();
    Eigen::Matrix<int, Eigen::Dynamic, 3> fine_tris(4 * nt, 3);
    for (Index t = 0; t < nt; ++t) {
        const int a = mesh.triangles(t, 0);
        const int b = mesh.triangles(t, 1);
        const int c = mesh.triangles(t, 2);
        const int mab = midpoint_of(a, b);
        const int mbc = midpoint_of(b, c);
        const int mca = midpoint_of(c, a);
        fine_tris.row(4 * t + 0) << a, mab, mca;
        fine_tris.row(4 * t + 1) << mab, b, mbc;
        fine_tris.row(4 * t + 2) << mca, mbc, c;
        fine_tris.row(4 * t + 3) << mab, mbc, mca;
    }

    Mesh fine;
    fine.domain_tag = mesh.domain_tag;
    fine.triangles = std::move(fine_tris);
    fine.vertices.resize(mesh.vertex_count() +
                             static_cast<Index>(parent_edges.size()),
                         2);
    fine.vertices.topRows(mesh.vertex_count()) = mesh.vertices;
    for (std::size_t e = 0; e < parent_edges.size(); ++e) {
        fine.vertices.row(mesh.vertex_count() + static_cast<Index>(e)) =
            0.5 * (mesh.vertices.row(parent_edges[e].first) +
                   mesh.vertices.row(parent_edges[e].second));
    }
    fine.boundary_nodes = extract_boundary(fine);
    fine.h_max = compute_h_max(fine);

    out.mesh = std::move(fine);
    out.parent_edges = std::move(parent_edges);
    return out;
}

Mesh refine(const Mesh& mesh) { return refine_with_lineage(mesh).mesh; }

void check_mesh_invariants(const Mesh& mesh) {
    if (mesh.vertex_count() < 3 || mesh.triangle_count() < 1) {
        throw std::runtime_error("mesh is empty");
    }
    for (Index t = 0; t < mesh.triangle_count(); ++t) {
        for (int e = 0; e < 3; ++e) {
            const int v = mesh.triangles(t, e);
            if (v < 0 || v >= mesh.vertex_count()) {
                throw std::runtime_error("triangle " + std::to_string(t) +
                                         " references vertex " +
                                         std::to_string(v));
            }
        }
        if (mesh.signed_area(t) <= 0.0) {
            throw std::runtime_error("triangle " + std::to_string(t) +
                                     " is not positively oriented");
        }
    }

    std::map<std::pair<double, double>, int> coord_seen;
    for (Index v = 0; v < mesh.vertex_count(); ++v) {
        const auto key = std::make_pair(mesh.vertices(v, 0), mesh.vertices(v, 1));
        const auto [it, inserted] = coord_seen.emplace(key, static_cast<int>(v));
        if (!inserted) {
            throw std::runtime_error(
                "vertices " + std::to_string(it->second) + " and " +
                std::to_string(v) + " coincide");
        }
    }

    std::unordered_map<std::uint64_t, int> edge_uses;
    for (Index t = 0; t < mesh.triangle_count(); ++t) {
        for (int e = 0; e < 3; ++e) {
            const int a = mesh.triangles(t, e);
            const int b = mesh.triangles(t, (e + 1) % 3);
            if (++edge_uses[edge_key(a, b)] > 2) {
                throw std::runtime_error("edge (" + std::to_string(a) + "," +
                                         std::to_string(b) +
                                         ") is shared by more than two triangles");
            }
        }
    }

    const std::vector<int> expected = extract_boundary(mesh);
    if (expected != mesh.boundary_nodes) {
        throw std::runtime_error("boundary_nodes is out of date");
    }
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
    out << "mesh 2d\n";
    out << std::setprecision(17);
    for (Index v = 0; v < mesh.vertex_count(); ++v) {
        out << "v " << mesh.vertices(v, 0) << ' ' << mesh.vertices(v, 1)
            << '\n';
    }
    for (Index t = 0; t < mesh.triangle_count(); ++t) {
        out << "t " << mesh.triangles(t, 0) << ' ' << mesh.triangles(t, 1)
            << ' ' << mesh.triangles(t, 2) << '\n';
    }
    for (int b : mesh.boundary_nodes) {
        out << "b " << b << '\n';
    }
}

void write_mesh_file(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_mesh(mesh, out);
    if (!out) throw std::runtime_error("failed writing " + path);
}

Mesh read_mesh(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("mesh file is empty");
    }
    {
        std::istringstream header(line);
        std::string word, dim, extra;
        header >> word >> dim;
        if (word != "mesh" || dim != "2d" || (header >> extra)) {
            throw std::runtime_error("expected 'mesh 2d' header, got '" +
                                     line + "'");
        }
    }

    std::vector<Eigen::Vector2d> verts;
    std::vector<Eigen::Vector3i> tris;
    std::vector<int> boundary;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        const auto fail = [&](const std::string& why) -> std::runtime_error {
            return std::runtime_error("mesh file line " +
                                      std::to_string(lineno) + ": " + why);
        };
        std::string extra;
        if (tag == "v") {
            double x, y;
            if (!(ls >> x >> y) || (ls >> extra)) {
                throw fail("expected 'v x y'");
            }
            verts.emplace_back(x, y);
        } else if (tag == "t") {
            int i, j, k;
            if (!(ls >> i >> j >> k) || (ls >> extra)) {
                throw fail("expected 't i j k'");
            }
            tris.emplace_back(i, j, k);
        } else if (tag == "b") {
            int i;
            if (!(ls >> i) || (ls >> extra)) {
                throw fail("expected 'b i'");
            }
            boundary.push_back(i);
        } else {
            throw fail("unknown record '" + tag + "'");
        }
    }

    Mesh mesh;
    mesh.domain_tag = DomainTag::external;
    mesh.vertices.resize(static_cast<Index>(verts.size()), 2);
    for (std::size_t v = 0; v < verts.size(); ++v) {
        mesh.vertices.row(static_cast<Index>(v)) = verts[v].transpose();
    }
    mesh.triangles.resize(static_cast<Index>(tris.size()), 3);
    for (std::size_t t = 0; t < tris.size(); ++t) {
        mesh.triangles.row(static_cast<Index>(t)) = tris[t].transpose();
    }
    mesh.boundary_nodes = std::move(boundary);
    check_mesh_invariants(mesh);
    mesh.h_max = compute_h_max(mesh);
    return mesh;
}

Mesh read_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_mesh(in);
}

} // namespace invsrc
