#include "invsrc/forward.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace invsrc {

namespace {

struct QuadratureRule {
    // barycentric coordinates, one row per point
    Eigen::Matrix<double, Eigen::Dynamic, 3> points;
    Vec weights; // sum to 1, scaled by |T| at use
};

QuadratureRule quadrature_rule(int order) {
    QuadratureRule rule;
    switch (order) {
    case 1:
        rule.points.resize(1, 3);
        rule.points << 1.0 / 3, 1.0 / 3, 1.0 / 3;
        rule.weights = Vec::Constant(1, 1.0);
        return rule;
    case 2:
        rule.points.resize(3, 3);
        rule.points << 0.5, 0.5, 0.0,
                       0.0, 0.5, 0.5,
                       0.5, 0.0, 0.5;
        rule.weights = Vec::Constant(3, 1.0 / 3);
        return rule;
    case 4: {
        rule.points.resize(6, 3);
        rule.weights.resize(6);
        const double a1 = 0.445948490915965;
        const double w1 = 0.223381589678011;
        const double a2 = 0.091576213509771;
        const double w2 = 0.109951743655322;
        int r = 0;
        for (int c = 0; c < 3; ++c) {
            Eigen::RowVector3d p(a1, a1, a1);
            p(c) = 1.0 - 2.0 * a1;
            rule.points.row(r) = p;
            rule.weights(r++) = w1;
        }
        for (int c = 0; c < 3; ++c) {
            Eigen::RowVector3d p(a2, a2, a2);
            p(c) = 1.0 - 2.0 * a2;
            rule.points.row(r) = p;
            rule.weights(r++) = w2;
        }
        return rule;
    }
    default:
        throw std::invalid_argument("quadrature_order must be 1, 2, or 4");
    }
}

} // namespace

NeumannSolver::NeumannSolver(const Mesh& mesh, const Conductivity& sigma,
                             AssemblyOptions options)
    : mesh_(&mesh), residual_tol_(options.residual_tol) {
    const Index n = mesh.vertex_count();
    const QuadratureRule rule = quadrature_rule(options.quadrature_order);

    std::vector<Eigen::Triplet<double>> k_entries;
    std::vector<Eigen::Triplet<double>> m_entries;
    k_entries.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 9);
    m_entries.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 9);
    basis_integrals_ = Vec::Zero(n);

    for (Index t = 0; t < mesh.triangle_count(); ++t) {
        const int v[3] = {mesh.triangles(t, 0), mesh.triangles(t, 1),
                          mesh.triangles(t, 2)};
        Eigen::Matrix<double, 3, 2> p;
        for (int i = 0; i < 3; ++i) p.row(i) = mesh.vertices.row(v[i]);

        const double area = mesh.signed_area(t);

        // gradient of hat i: rotate the opposite edge by +90deg, / (2 area)
        Eigen::Matrix<double, 3, 2> grad;
        for (int i = 0; i < 3; ++i) {
            const Eigen::RowVector2d edge = p.row((i + 2) % 3) - p.row((i + 1) % 3);
            grad.row(i) = Eigen::RowVector2d(-edge.y(), edge.x()) / (2.0 * area);
        }

        double sigma_avg = 0.0;
        for (Index q = 0; q < rule.weights.size(); ++q) {
            const Eigen::RowVector2d x = rule.points.row(q) * p;
            const double s = sigma(x.x(), x.y());
            if (!(s > 0.0) || !std::isfinite(s)) {
                std::ostringstream msg;
                msg << "conductivity " << sigma.name() << " is " << s
                    << " at (" << x.x() << ", " << x.y() << ")";
                throw std::runtime_error(msg.str());
            }
            sigma_avg += rule.weights(q) * s;
        }

        for (int i = 0; i < 3; ++i) {
            basis_integrals_(v[i]) += area / 3.0;
            for (int j = 0; j < 3; ++j) {
                k_entries.emplace_back(
                    v[i], v[j], area * sigma_avg * grad.row(i).dot(grad.row(j)));
                m_entries.emplace_back(v[i], v[j],
                                       area / 12.0 * (i == j ? 2.0 : 1.0));
            }
        }
    }

    stiffness_.resize(n, n);
    stiffness_.setFromTriplets(k_entries.begin(), k_entries.end());
    mass_.resize(n, n);
    mass_.setFromTriplets(m_entries.begin(), m_entries.end());
    area_ = basis_integrals_.sum();

    boundary_mass_ = Vec::Zero(n);
    const auto& bn = mesh.boundary_nodes;
    for (std::size_t e = 0; e < bn.size(); ++e) {
        const int a = bn[e];
        const int b = bn[(e + 1) % bn.size()];
        const double len = (mesh.vertices.row(a) - mesh.vertices.row(b)).norm();
        boundary_mass_(a) += 0.5 * len;
        boundary_mass_(b) += 0.5 * len;
    }

    // stiffness bordered by the boundary-average constraint
    std::vector<Eigen::Triplet<double>> s_entries;
    s_entries.reserve(k_entries.size() + 2 * bn.size());
    for (int col = 0; col < stiffness_.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(stiffness_, col); it;
             ++it) {
            s_entries.emplace_back(it.row(), it.col(), it.value());
        }
    }
    for (Index i = 0; i < n; ++i) {
        if (boundary_mass_(i) == 0.0) continue;
        s_entries.emplace_back(i, n, boundary_mass_(i));
        s_entries.emplace_back(n, i, boundary_mass_(i));
    }
    Eigen::SparseMatrix<double> bordered(n + 1, n + 1);
    bordered.setFromTriplets(s_entries.begin(), s_entries.end());

    bordered_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    bordered_->compute(bordered);
    if (bordered_->info() != Eigen::Success) {
        throw std::runtime_error("bordered stiffness factorization failed");
    }
}

Vec NeumannSolver::load_for(const Vec& coefficients) const {
    if (coefficients.size() != mesh_->vertex_count()) {
        throw std::invalid_argument("coefficient vector has wrong size");
    }
    const double mean = basis_integrals_.dot(coefficients) / area_;
    return mass_ * coefficients - mean * basis_integrals_;
}

Vec NeumannSolver::solve(const Vec& load) const {
    const Index n = mesh_->vertex_count();
    if (load.size() != n) {
        throw std::invalid_argument("load vector has wrong size");
    }
    const double imbalance = std::abs(load.sum());
    const double scale = std::max(1.0, load.lpNorm<1>());
    if (imbalance > 1e-8 * scale) {
        std::ostringstream msg;
        msg << "load is incompatible with the pure-flux problem: components sum to "
            << load.sum();
        throw std::runtime_error(msg.str());
    }

    Vec rhs = Vec::Zero(n + 1);
    rhs.head(n) = load;
    const Vec z = bordered_->solve(rhs);
    if (bordered_->info() != Eigen::Success) {
        throw std::runtime_error("bordered solve failed");
    }

    const Vec u = z.head(n);
    const double lambda = z(n);
    const Vec residual =
        stiffness_ * u + lambda * boundary_mass_ - load;
    const double rel =
        residual.norm() / std::max(load.norm(), 1e-300);
    if (rel > residual_tol_) {
        std::ostringstream msg;
        msg << "potential solve residual " << rel << " exceeds tolerance "
            << residual_tol_;
        throw std::runtime_error(msg.str());
    }
    return u;
}

Vec NeumannSolver::trace(const Vec& nodal_values) const {
    if (nodal_values.size() != mesh_->vertex_count()) {
        throw std::invalid_argument("nodal vector has wrong size");
    }
    const auto& bn = mesh_->boundary_nodes;
    Vec out(static_cast<Index>(bn.size()));
    for (std::size_t i = 0; i < bn.size(); ++i) {
        out(static_cast<Index>(i)) = nodal_values(bn[i]);
    }
    return out;
}

Mat NeumannSolver::forward_matrix() const {
    const Index n = mesh_->vertex_count();
    const Index m = static_cast<Index>(mesh_->boundary_nodes.size());
    Mat fwd(m, n);
    Vec coeff = Vec::Zero(n);
    for (Index j = 0; j < n; ++j) {
        coeff(j) = 1.0;
        fwd.col(j) = trace(solve(load_for(coeff)));
        coeff(j) = 0.0;
    }
    return fwd;
}

Vec prolong(const Refinement& refinement, const Vec& coarse_values) {
    if (coarse_values.size() != refinement.coarse_vertex_count) {
        throw std::invalid_argument("coarse vector has wrong size");
    }
    Vec fine(refinement.mesh.vertex_count());
    fine.head(refinement.coarse_vertex_count) = coarse_values;
    for (std::size_t e = 0; e < refinement.parent_edges.size(); ++e) {
        const auto [a, b] = refinement.parent_edges[e];
        fine(refinement.coarse_vertex_count + static_cast<Index>(e)) =
            0.5 * (coarse_values(a) + coarse_values(b));
    }
    return fine;
}

} // namespace invsrc
