#ifndef EITLOG_DERIVATIVES_HPP
#define EITLOG_DERIVATIVES_HPP

#include "eitlog/calculus.hpp"
#include "eitlog/forward.hpp"
#include "eitlog/quadrature.hpp"

#include <Eigen/Dense>
#include <span>

namespace eitlog {

/// Everything the derivative formulas reuse for a fixed (mesh, basis,
/// sigma): the factorization, the solutions for every basis current, their
/// triangle-wise gradients, the boundary matrix, and its eigensystem.
/// Immutable; one instance serves any number of directions.
class ForwardCache {
public:
    ForwardCache(const DiskMesh& mesh, const BoundaryBasis& basis,
                 ConductivityField sigma);

    const DiskMesh& mesh() const { return fem_.mesh(); }
    const BoundaryBasis& basis() const { return fem_.basis(); }
    const ConductivityField& sigma() const { return fem_.sigma(); }
    const FemSystem& fem() const { return fem_; }
    const NDMatrix& nd() const { return nd_; }
    const EigenSystem& eig() const { return eig_; }
    const Eigen::MatrixXd& solutions() const { return solutions_; }

    /// P(sigma, dir) applied to each column.
    Eigen::MatrixXd apply_p(const ConductivityField& dir,
                            const Eigen::MatrixXd& v) const;

    /// Matrix with entries \int field grad(v_c) . grad(u_j), u_j the cached
    /// basis solutions.
    Eigen::MatrixXd cross_form(const ConductivityField& field,
                               const Eigen::MatrixXd& v) const;

private:
    FemSystem fem_;
    Eigen::MatrixXd solutions_; // n_nodes x 2N
    Eigen::MatrixXd grad_x_;    // n_tri x 2N
    Eigen::MatrixXd grad_y_;
    NDMatrix nd_;
    EigenSystem eig_;
};

/// First/second divided differences of log at shifted eigenvalue pairs,
/// evaluated cancellation-safely near coincidence.
double log_divided_difference(double a, double b);
double log_second_divided_difference(double a, double b, double c);

/// Table of c_{j,k} = divided difference of log at (lambda_j + tau,
/// lambda_k + tau); the diagonal is exactly 1/(lambda_j + tau).
struct DividedDifferenceTable {
    Eigen::MatrixXd c;
    double tau = 0.0;
};

/// Throws DomainError when lambda_min + tau <= 0.
DividedDifferenceTable divided_differences(const EigenSystem& eig, double tau);

inline constexpr int kMaxDerivativeOrder = 3;

/// Bundled derivative evaluation: a base point (conductivity, or
/// log-conductivity when is_log is set), one direction per order, and the
/// spectral shift. Directions beyond the first matter only to the
/// boundary-map derivatives and the second logarithmic derivative.
struct DerivativeRequest {
    ConductivityField base;
    std::vector<ConductivityField> directions;
    double tau = 0.0;

    int order() const { return static_cast<int>(directions.size()); }
    /// base as an admissible conductivity (exponentiated when logarithmic)
    ConductivityField conductivity() const {
        return base.is_log ? base.exp_field() : base;
    }
};

/// Derivative of the shifted logarithmic map the request describes:
/// order 1 evaluates the first derivative (the fully logarithmic map's
/// derivative when the base is a log-conductivity), order 2 the second.
/// Throws OrderCapError above order 2 here; order-3 boundary-map
/// derivatives are reached through dk_lambda.
SobolevOperator evaluate_log_derivative(const DiskMesh& mesh,
                                        const BoundaryBasis& basis,
                                        const DerivativeRequest& request);

/// First derivative of the forward boundary map in direction eta;
/// entries -\int eta grad(u_k) . grad(u_j). Signature (-1/2, 1/2).
SobolevOperator dlambda(const ForwardCache& cache, const ConductivityField& eta);

/// Derivative of order k = directions.size() (cap 3) as the permutation
/// sum over perturbation chains. Multilinear and symmetric; k = 1 agrees
/// with dlambda.
SobolevOperator dk_lambda(const ForwardCache& cache,
                          std::span<const ConductivityField> directions);

/// Request form; the base point must match the cache's conductivity.
SobolevOperator dk_lambda(const ForwardCache& cache,
                          const DerivativeRequest& request);

/// Derivative of the shifted logarithm through the eigenbasis
/// representation with divided-difference weights. Signature (0, 0).
SobolevOperator df_tau_spectral(const ForwardCache& cache,
                                const ConductivityField& eta, double tau);

/// Eigenbasis representation assembled from precomputed parts. Basis
/// truncations reuse one forward solve: the leading sub-blocks of the
/// boundary matrix and of the dlambda matrix are exactly the smaller-basis
/// versions.
SobolevOperator df_spectral_from_parts(const EigenSystem& eig,
                                       const Eigen::MatrixXd& dlambda_matrix,
                                       double tau);

/// Same operator through the resolvent integral
/// int_0^inf R_{tau+s} DLambda R_{tau+s} ds evaluated by adaptive
/// quadrature with direct solves; an independent cross-check of the
/// closed form.
SobolevOperator df_tau_quadrature(const ForwardCache& cache,
                                  const ConductivityField& eta, double tau,
                                  const QuadControl& control = {});

/// Derivative of the fully logarithmic map at kappa = log(sigma) in the
/// log-domain direction eta: the shifted-log derivative at sigma with
/// direction eta * sigma and tau = 0.
SobolevOperator dl_map(const ForwardCache& cache_at_exp_kappa,
                       const ConductivityField& eta);

/// Second derivative of the shifted logarithm: resolvent integral of the
/// second boundary-map derivative minus the two resolvent-chain terms,
/// evaluated in closed form via second divided differences of log.
SobolevOperator d2f_tau(const ForwardCache& cache, const ConductivityField& eta,
                        const ConductivityField& xi, double tau);

/// Quadrature evaluation of the same three integrals; cross-check path.
SobolevOperator d2f_tau_quadrature(const ForwardCache& cache,
                                   const ConductivityField& eta,
                                   const ConductivityField& xi, double tau,
                                   const QuadControl& control = {});

} // namespace eitlog

#endif
