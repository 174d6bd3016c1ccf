#include "eitlog/basis.hpp"

#include "eitlog/errors.hpp"

#include <cmath>
#include <numbers>

namespace eitlog {

BoundaryBasis::BoundaryBasis(const DiskMesh& mesh, int max_frequency)
    : max_frequency_(max_frequency), boundary_nodes_(mesh.boundary_nodes) {
    if (max_frequency < 1)
        throw std::invalid_argument("boundary_trig_basis: N must be >= 1");
    if (max_frequency > 256)
        throw std::invalid_argument(
            "boundary_trig_basis: N > 256 exceeds the dense-calculus cap");
    const int n_b = static_cast<int>(boundary_nodes_.size());
    if (2 * max_frequency > n_b / 4)
        throw AliasingError("boundary_trig_basis: 2N = " +
                            std::to_string(2 * max_frequency) +
                            " exceeds (boundary nodes)/4 = " +
                            std::to_string(n_b / 4));

    Eigen::VectorXd theta(n_b);
    for (int j = 0; j < n_b; ++j) theta[j] = mesh.boundary_angle(j);

    // Periodic trapezoidal rule in angle; uniform 2*pi/n_b on our meshes.
    weights_.resize(n_b);
    const double two_pi = 2.0 * std::numbers::pi;
    for (int j = 0; j < n_b; ++j) {
        double fwd = theta[(j + 1) % n_b] - theta[j];
        double bwd = theta[j] - theta[(j - 1 + n_b) % n_b];
        if (fwd < 0) fwd += two_pi;
        if (bwd < 0) bwd += two_pi;
        weights_[j] = 0.5 * (fwd + bwd);
    }
    weight_sum_ = weights_.sum();

    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    values_.resize(n_b, 2 * max_frequency);
    for (int n = 1; n <= max_frequency; ++n) {
        for (int j = 0; j < n_b; ++j) {
            values_(j, 2 * (n - 1)) = std::cos(n * theta[j]) * inv_sqrt_pi;
            values_(j, 2 * (n - 1) + 1) = std::sin(n * theta[j]) * inv_sqrt_pi;
        }
    }
}

Eigen::VectorXi BoundaryBasis::frequencies() const {
    Eigen::VectorXi f(dim());
    for (int i = 0; i < dim(); ++i) f[i] = frequency_of(i);
    return f;
}

Eigen::MatrixXd BoundaryBasis::gram() const {
    return values_.transpose() * weights_.asDiagonal() * values_;
}

double BoundaryBasis::quad_mean(const Eigen::VectorXd& nodal_trace) const {
    return weights_.dot(nodal_trace) / weight_sum_;
}

BoundaryVector BoundaryBasis::project_mean_free(
    const Eigen::VectorXd& nodal_trace) const {
    Eigen::VectorXd centered =
        nodal_trace.array() - quad_mean(nodal_trace);
    return BoundaryVector{values_.transpose() * (weights_.asDiagonal() * centered)};
}

Eigen::VectorXd BoundaryBasis::reconstruct(const BoundaryVector& f) const {
    return values_ * f.coeffs;
}

BoundaryBasis boundary_trig_basis(const DiskMesh& mesh, int max_frequency) {
    return BoundaryBasis(mesh, max_frequency);
}

} // namespace eitlog
