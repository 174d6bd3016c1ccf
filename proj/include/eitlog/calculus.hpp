#ifndef EITLOG_CALCULUS_HPP
#define EITLOG_CALCULUS_HPP

#include "eitlog/basis.hpp"
#include "eitlog/forward.hpp"
#include "eitlog/sobolev.hpp"

#include <Eigen/Dense>

namespace eitlog {

/// Spectral decomposition of an NDMatrix. Eigenvalues are descending and
/// strictly positive; eigenvector signs follow a fixed convention (first
/// component of magnitude above 1e-8 is positive).
struct EigenSystem {
    Eigen::VectorXd eigenvalues;  // lambda_1 >= lambda_2 >= ... > 0
    Eigen::MatrixXd eigenvectors; // orthonormal columns
    Eigen::VectorXi frequencies;  // basis metadata carried along

    int dim() const { return static_cast<int>(eigenvalues.size()); }
    double lambda_min() const { return eigenvalues[dim() - 1]; }
    double lambda_max() const { return eigenvalues[0]; }
};

/// Throws DefinitenessError if any eigenvalue is <= 0.
EigenSystem eigensystem(const NDMatrix& nd);

/// Scalar function applied through the eigendecomposition.
struct SpectralFunctionSpec {
    enum class Kind { Log, ShiftedLog, Power };
    Kind kind = Kind::Log;
    double tau = 0.0;   // shift, >= 0
    double power = 1.0; // exponent 2r in [-1, 1] for Kind::Power

    static SpectralFunctionSpec log() { return {Kind::Log, 0.0, 0.0}; }
    static SpectralFunctionSpec shifted_log(double tau) {
        return {Kind::ShiftedLog, tau, 0.0};
    }
    static SpectralFunctionSpec power_2r(double two_r) {
        return {Kind::Power, 0.0, two_r};
    }
};

/// Phi diag(g(lambda + tau)) Phi^T. Signature: (eps, -eps) for the
/// unshifted log (default eps = 1/2), (0, 0) for tau > 0, (-r, r) for the
/// power 2r. Throws DomainError when the function is evaluated outside its
/// domain (nonpositive argument of log or of a negative power).
SobolevOperator apply_spectral_function(const EigenSystem& eig,
                                        const SpectralFunctionSpec& spec,
                                        double eps_signature = 0.5);

/// Contour-integral logarithm: trapezoidal quadrature of the resolvent
/// integral over a circle crossing the real axis at lambda_min/2 and
/// 2*lambda_max. The node count doubles from n_quad until the result moves
/// by less than tol; the discarded imaginary part's norm is reported.
SobolevOperator riesz_dunford_log(const NDMatrix& nd, int n_quad = 32,
                                  double tol = 1e-10,
                                  double* imag_residual = nullptr,
                                  double eps_signature = 0.5);

/// Conductivity-dependent Sobolev norm: sum_k lambda_k^{-2r} |<f, phi_k>|^2,
/// for r in [-1/2, 1/2].
double sigma_norm(const BoundaryVector& f, SobolevIndex r,
                  const EigenSystem& eig);

} // namespace eitlog

#endif
