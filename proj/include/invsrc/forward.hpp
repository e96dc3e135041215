#pragma once

#include <memory>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "invsrc/conductivity.hpp"
#include "invsrc/mesh.hpp"
#include "invsrc/types.hpp"

namespace invsrc {

struct AssemblyOptions {
    int quadrature_order = 2; // 1, 2, or 4
    double residual_tol = 1e-10;
};

/// Piecewise-linear finite element operator for the zero-Neumann diffusion
/// problem, with the constant nullspace pinned by a zero boundary average.
/// Source terms live in the mean-free span of the nodal hat functions; the
/// forward map sends a nodal coefficient vector to the boundary trace of the
/// resulting potential.
class NeumannSolver {
public:
    NeumannSolver(const Mesh& mesh, const Conductivity& sigma,
                  AssemblyOptions options = {});

    const Mesh& mesh() const { return *mesh_; }
    const Eigen::SparseMatrix<double>& stiffness() const { return stiffness_; }
    const Eigen::SparseMatrix<double>& mass() const { return mass_; }
    /// Integrals of the nodal hat functions; their sum is the mesh area.
    const Vec& basis_integrals() const { return basis_integrals_; }
    const Vec& boundary_mass() const { return boundary_mass_; }
    double area() const { return area_; }

    /// Load vector of the mean-free source with nodal coefficients x.
    Vec load_for(const Vec& coefficients) const;

    /// Potential with zero boundary average; throws if the load is
    /// incompatible or the linear solve leaves a large residual.
    Vec solve(const Vec& load) const;

    /// Values of a nodal field at the boundary nodes, in boundary order.
    Vec trace(const Vec& nodal_values) const;

    /// Dense boundary-trace-of-potential matrix, one column per frame
    /// element (one frame element per mesh vertex).
    Mat forward_matrix() const;

private:
    const Mesh* mesh_;
    Eigen::SparseMatrix<double> stiffness_;
    Eigen::SparseMatrix<double> mass_;
    Vec basis_integrals_;
    Vec boundary_mass_;
    double area_ = 0.0;
    double residual_tol_ = 1e-10;
    std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> bordered_;
};

/// Nodal values of a coarse piecewise-linear field on the refined mesh.
/// Exact: the function is unchanged, only re-expressed in the fine basis.
Vec prolong(const Refinement& refinement, const Vec& coarse_values);

} // namespace invsrc
