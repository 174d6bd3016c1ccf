#include "eitlog/calculus.hpp"

#include "eitlog/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <complex>
#include <numbers>

namespace eitlog {

EigenSystem eigensystem(const NDMatrix& nd) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(nd.matrix);
    if (es.info() != Eigen::Success)
        throw DefinitenessError("eigensystem: eigensolver failed");
    const int n = nd.dim();
    EigenSystem eig;
    eig.frequencies = nd.frequencies;
    eig.eigenvalues.resize(n);
    eig.eigenvectors.resize(n, n);
    for (int k = 0; k < n; ++k) {
        eig.eigenvalues[k] = es.eigenvalues()[n - 1 - k]; // descending
        Eigen::VectorXd v = es.eigenvectors().col(n - 1 - k);
        for (int i = 0; i < n; ++i) {
            if (std::abs(v[i]) > 1e-8) {
                if (v[i] < 0) v = -v;
                break;
            }
        }
        eig.eigenvectors.col(k) = v;
    }
    if (eig.eigenvalues[n - 1] <= 0.0)
        throw DefinitenessError("eigensystem: nonpositive eigenvalue " +
                                std::to_string(eig.eigenvalues[n - 1]));
    return eig;
}

SobolevOperator apply_spectral_function(const EigenSystem& eig,
                                        const SpectralFunctionSpec& spec,
                                        double eps_signature) {
    if (spec.tau < 0.0)
        throw DomainError("apply_spectral_function: tau must be >= 0");
    const int n = eig.dim();
    Eigen::VectorXd g(n);
    for (int k = 0; k < n; ++k) {
        const double t = eig.eigenvalues[k] + spec.tau;
        switch (spec.kind) {
        case SpectralFunctionSpec::Kind::Log:
        case SpectralFunctionSpec::Kind::ShiftedLog:
            if (t <= 0.0)
                throw DomainError("apply_spectral_function: log of nonpositive value");
            g[k] = std::log(t);
            break;
        case SpectralFunctionSpec::Kind::Power:
            if (spec.power < -1.0 || spec.power > 1.0)
                throw DomainError("apply_spectral_function: power 2r outside [-1, 1]");
            if (t <= 0.0 && spec.power < 0.0)
                throw DomainError("apply_spectral_function: negative power of nonpositive value");
            g[k] = std::pow(t, spec.power);
            break;
        }
    }
    SobolevOperator out;
    out.matrix = eig.eigenvectors * g.asDiagonal() * eig.eigenvectors.transpose();
    out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
    out.frequencies = eig.frequencies;
    out.symmetric = true;
    switch (spec.kind) {
    case SpectralFunctionSpec::Kind::Log:
        out.r_in = eps_signature;
        out.r_out = -eps_signature;
        break;
    case SpectralFunctionSpec::Kind::ShiftedLog:
        if (spec.tau > 0.0) {
            out.r_in = 0.0;
            out.r_out = 0.0;
        } else {
            out.r_in = eps_signature;
            out.r_out = -eps_signature;
        }
        break;
    case SpectralFunctionSpec::Kind::Power:
        out.r_in = -0.5 * spec.power;
        out.r_out = 0.5 * spec.power;
        break;
    }
    return out;
}

SobolevOperator riesz_dunford_log(const NDMatrix& nd, int n_quad, double tol,
                                  double* imag_residual, double eps_signature) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(nd.matrix,
                                                      Eigen::EigenvaluesOnly);
    const double lam_min = es.eigenvalues().minCoeff();
    const double lam_max = es.eigenvalues().maxCoeff();
    if (lam_min <= 0.0)
        throw ContourError("riesz_dunford_log: spectrum touches the branch cut");
    if (lam_min < 1e-14 * lam_max)
        throw ContourError("riesz_dunford_log: spectrum too close to the origin "
                           "for a resolvable contour");

    const int n = nd.dim();
    const std::complex<double> i_unit(0.0, 1.0);
    // circle crossing the real axis at lam_min/2 and 2*lam_max
    const double center = 0.5 * (0.5 * lam_min + 2.0 * lam_max);
    const double radius = 0.5 * (2.0 * lam_max - 0.5 * lam_min);

    const auto quadrature = [&](int m) {
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
        for (int q = 0; q < m; ++q) {
            const double theta = 2.0 * std::numbers::pi * q / m;
            const std::complex<double> z =
                center + radius * std::exp(i_unit * theta);
            Eigen::MatrixXcd shifted = -nd.matrix.cast<std::complex<double>>();
            shifted.diagonal().array() += z;
            const Eigen::MatrixXcd resolvent =
                shifted.partialPivLu().solve(Eigen::MatrixXcd::Identity(n, n));
            acc += std::log(z) * resolvent * (radius * std::exp(i_unit * theta));
        }
        return Eigen::MatrixXcd((acc / static_cast<double>(m)).eval());
    };

    constexpr int kMaxQuad = 1 << 14;
    Eigen::MatrixXcd prev = quadrature(n_quad);
    Eigen::MatrixXcd cur;
    bool converged = false;
    for (int m = 2 * n_quad; m <= kMaxQuad; m *= 2) {
        cur = quadrature(m);
        const double change = (cur - prev).norm();
        prev = cur;
        if (change <= tol * std::max(1.0, cur.norm())) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw ConvergenceError("riesz_dunford_log: quadrature did not settle below "
                               "tolerance by " + std::to_string(kMaxQuad) + " nodes");

    if (imag_residual) *imag_residual = prev.imag().norm();
    SobolevOperator out;
    out.matrix = prev.real();
    out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
    out.frequencies = nd.frequencies;
    out.symmetric = true;
    out.r_in = eps_signature;
    out.r_out = -eps_signature;
    return out;
}

double sigma_norm(const BoundaryVector& f, SobolevIndex r,
                  const EigenSystem& eig) {
    if (r.r < -0.5 || r.r > 0.5)
        throw DomainError("sigma_norm: r outside [-1/2, 1/2]");
    const Eigen::VectorXd proj = eig.eigenvectors.transpose() * f.coeffs;
    double s = 0.0;
    for (int k = 0; k < eig.dim(); ++k)
        s += std::pow(eig.eigenvalues[k], -2.0 * r.r) * proj[k] * proj[k];
    return std::sqrt(s);
}

} // namespace eitlog
