#ifndef EITLOG_BASIS_HPP
#define EITLOG_BASIS_HPP

#include "eitlog/mesh.hpp"

#include <Eigen/Dense>

namespace eitlog {

/// Coefficients of a mean-free boundary function in a BoundaryBasis.
struct BoundaryVector {
    Eigen::VectorXd coeffs;
};

/// Truncated zero-mean trigonometric basis on the boundary circle,
/// ordered (cos t, sin t, cos 2t, sin 2t, ..., cos Nt, sin Nt), each
/// L^2-normalized. The quadrature rule is the periodic trapezoidal rule
/// in the boundary angle, under which the basis is orthonormal to
/// machine precision as long as the anti-aliasing rule 2N <= n_b/4 holds.
class BoundaryBasis {
public:
    BoundaryBasis(const DiskMesh& mesh, int max_frequency);

    int max_frequency() const { return max_frequency_; }
    int dim() const { return 2 * max_frequency_; }
    int n_boundary() const { return static_cast<int>(weights_.size()); }
    /// Frequency n of basis entry i (entries 2(n-1) and 2n-1 share n).
    int frequency_of(int i) const { return i / 2 + 1; }
    Eigen::VectorXi frequencies() const;

    /// Nodal values, one column per basis function (n_b x 2N).
    const Eigen::MatrixXd& nodal_values() const { return values_; }
    const Eigen::VectorXd& quad_weights() const { return weights_; }
    const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }

    Eigen::MatrixXd gram() const;

    double quad_mean(const Eigen::VectorXd& nodal_trace) const;
    /// Subtracts the quadrature mean, then expands in the basis.
    BoundaryVector project_mean_free(const Eigen::VectorXd& nodal_trace) const;
    /// Nodal values of a coefficient vector.
    Eigen::VectorXd reconstruct(const BoundaryVector& f) const;

private:
    int max_frequency_;
    std::vector<int> boundary_nodes_;
    Eigen::VectorXd weights_;
    Eigen::MatrixXd values_;
    double weight_sum_;
};

/// Throws AliasingError unless 2N <= (boundary nodes)/4.
BoundaryBasis boundary_trig_basis(const DiskMesh& mesh, int max_frequency);

} // namespace eitlog

#endif
