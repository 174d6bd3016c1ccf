#ifndef EITLOG_SOBOLEV_HPP
#define EITLOG_SOBOLEV_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <string>

namespace eitlog {

/// Sobolev smoothness index; sigma-dependent norms require |r| <= 1/2,
/// Fourier-weighted norms |r| <= 1.
struct SobolevIndex {
    double r = 0.0;
    SobolevIndex() = default;
    SobolevIndex(double value) : r(value) {} // NOLINT: implicit by design
};

/// Fourier weight w_n(r) = (1 + n^2)^(r/2) on the boundary circle.
double fourier_weight(int frequency, double r);

/// Matrix in a BoundaryBasis tagged with its input/output Sobolev indices.
struct SobolevOperator {
    Eigen::MatrixXd matrix;
    Eigen::VectorXi frequencies; // per basis entry, for Fourier weights
    SobolevIndex r_in;
    SobolevIndex r_out;
    bool symmetric = true;

    int dim() const { return static_cast<int>(matrix.rows()); }
};

/// Largest singular value of D_{r_out} * T * D_{r_in}^{-1} with Fourier
/// weight diagonals; the spectral norm when r_in = r_out = 0.
double sobolev_operator_norm(const SobolevOperator& T, SobolevIndex r_in,
                             SobolevIndex r_out);

/// Norm with the operator's own recorded signature.
double sobolev_operator_norm(const SobolevOperator& T);

/// Fourier-weighted norm of a coefficient vector.
double fourier_norm(const Eigen::VectorXd& coeffs,
                    const Eigen::VectorXi& frequencies, double r);

/// CSV round trip; the header records the signature metadata.
void save_sobolev_operator(const SobolevOperator& T,
                           const std::filesystem::path& path);
SobolevOperator load_sobolev_operator(const std::filesystem::path& path);

} // namespace eitlog

#endif
