#ifndef EITLOG_FORWARD_HPP
#define EITLOG_FORWARD_HPP

#include "eitlog/basis.hpp"
#include "eitlog/conductivity.hpp"
#include "eitlog/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cstdint>
#include <filesystem>
#include <memory>

namespace eitlog {

/// Piecewise-constant gradient operators of the P1 space: (Dx u, Dy u)
/// give the gradient of a nodal function on each triangle.
struct P1Geometry {
    Eigen::SparseMatrix<double> grad_x; // n_tri x n_nodes
    Eigen::SparseMatrix<double> grad_y;
    Eigen::VectorXd area;
    // per-triangle shape gradients (gx0 gx1 gx2 gy0 gy1 gy2)
    Eigen::Matrix<double, Eigen::Dynamic, 6> local_grad;

    static P1Geometry build(const DiskMesh& mesh);
};

/// Energy form \int c grad(u) . grad(v) dx for a triangle-wise field c.
double field_bilinear(const P1Geometry& geom, const ConductivityField& c,
                      const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Factorization handle for the Neumann problem at fixed sigma. The
/// mean-zero gauge is enforced by one Lagrange multiplier constraining the
/// boundary quadrature mean of the trace, so the factorization is computed
/// once and reused across all right-hand sides. Immutable after
/// construction; concurrent solves are safe.
class FemSystem {
public:
    FemSystem(const DiskMesh& mesh, const BoundaryBasis& basis,
              ConductivityField sigma);

    const DiskMesh& mesh() const { return *mesh_; }
    const BoundaryBasis& basis() const { return *basis_; }
    const ConductivityField& sigma() const { return sigma_; }
    const P1Geometry& geometry() const { return geom_; }

    /// Solves the gauged system for an interior load; the result has
    /// zero boundary quadrature mean.
    Eigen::VectorXd solve(const Eigen::VectorXd& load) const;

    /// Load vector of a boundary current given by basis coefficients.
    Eigen::VectorXd neumann_load(const BoundaryVector& f) const;

    /// Load vector -\int eta grad(u) . grad(phi_a) of the perturbed problem.
    Eigen::VectorXd perturbation_load(const ConductivityField& eta,
                                      const Eigen::VectorXd& u) const;

    /// a_sigma(u, v)
    double energy(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

private:
    const DiskMesh* mesh_;
    const BoundaryBasis* basis_;
    ConductivityField sigma_;
    P1Geometry geom_;
    Eigen::SparseMatrix<double> bordered_;
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

/// FEM solution of the Neumann problem, fixed by zero-mean boundary trace.
struct InteriorSolution {
    Eigen::VectorXd nodal;
    BoundaryVector trace;
};

InteriorSolution solve_neumann(const FemSystem& fem, const BoundaryVector& f);

/// w with \int sigma grad(w).grad(v) = -\int eta grad(u).grad(v); linear in
/// eta and in u.
InteriorSolution apply_perturbation(const FemSystem& fem,
                                    const ConductivityField& eta,
                                    const InteriorSolution& u);

/// Galerkin section of the forward boundary map, explicitly symmetrized.
struct NDMatrix {
    Eigen::MatrixXd matrix; // 2N x 2N, symmetric positive definite
    Eigen::VectorXi frequencies;
    std::uint64_t sigma_hash = 0;

    int dim() const { return static_cast<int>(matrix.rows()); }
};

/// Assembles the boundary matrix from one solve per basis function; the
/// raw asymmetry is a Galerkin consistency diagnostic available through
/// raw_asymmetry_out. Throws DefinitenessError if the symmetrized matrix
/// is not positive definite.
NDMatrix nd_matrix(const FemSystem& fem, Eigen::MatrixXd* solutions_out = nullptr,
                   double* raw_asymmetry_out = nullptr);

NDMatrix nd_matrix(const DiskMesh& mesh, const ConductivityField& sigma,
                   const BoundaryBasis& basis);

/// Diagonal boundary matrix with entries 1/(sigma0 * n) for the unit disk
/// at constant conductivity.
NDMatrix analytic_nd_constant(double sigma0, const BoundaryBasis& basis);

/// Leading 2N x 2N block: the matrix the order-N basis would produce on
/// the same mesh, because lower frequencies are nested.
NDMatrix nd_leading_block(const NDMatrix& nd, int max_frequency);

std::uint64_t field_hash(const ConductivityField& sigma);

/// CSV round trip; header records the basis order and conductivity hash.
void save_nd_matrix(const NDMatrix& nd, const std::filesystem::path& path);
NDMatrix load_nd_matrix(const std::filesystem::path& path);

} // namespace eitlog

#endif
