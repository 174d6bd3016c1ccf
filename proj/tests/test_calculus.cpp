#include <doctest.h>

#include "eitlog/basis.hpp"
#include "eitlog/calculus.hpp"
#include "eitlog/errors.hpp"
#include "eitlog/forward.hpp"
#include "eitlog/mesh.hpp"

#include <cmath>
#include <random>

using namespace eitlog;

namespace {

NDMatrix diag_nd(std::initializer_list<double> values) {
    NDMatrix nd;
    const int n = static_cast<int>(values.size());
    nd.matrix = Eigen::MatrixXd::Zero(n, n);
    nd.frequencies.resize(n);
    int i = 0;
    for (double v : values) {
        nd.matrix(i, i) = v;
        nd.frequencies[i] = i / 2 + 1;
        ++i;
    }
    return nd;
}

NDMatrix random_spd(int n, std::uint64_t seed, double shift = 0.5) {
    std::mt19937_64 gen(seed);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = static_cast<double>(gen() >> 11) * 0x1p-52 - 1.0;
    NDMatrix nd;
    nd.matrix = m * m.transpose() / n;
    nd.matrix.diagonal().array() += shift;
    nd.frequencies.resize(n);
    for (int i = 0; i < n; ++i) nd.frequencies[i] = i / 2 + 1;
    return nd;
}

} // namespace

TEST_CASE("eigensystem: diagonal and analytic 2x2 inputs") {
    const EigenSystem diag = eigensystem(diag_nd({2.0, 1.0}));
    CHECK(diag.eigenvalues[0] == doctest::Approx(2.0));
    CHECK(diag.eigenvalues[1] == doctest::Approx(1.0));
    CHECK((diag.eigenvectors - Eigen::MatrixXd::Identity(2, 2))
              .cwiseAbs()
              .maxCoeff() < 1e-14);

    NDMatrix nd = diag_nd({2.0, 2.0});
    nd.matrix(0, 1) = nd.matrix(1, 0) = 1.0;
    const EigenSystem eig = eigensystem(nd);
    CHECK(eig.eigenvalues[0] == doctest::Approx(3.0));
    CHECK(eig.eigenvalues[1] == doctest::Approx(1.0));
    const double s = 1.0 / std::sqrt(2.0);
    CHECK((eig.eigenvectors.col(0) - Eigen::Vector2d(s, s)).norm() < 1e-14);
    CHECK(eig.eigenvectors(0, 1) > 0.0); // first-positive sign convention
    CHECK(std::abs(eig.eigenvectors(1, 1) + s) < 1e-14);
}

TEST_CASE("eigensystem: invariants on the disk matrix") {
    const DiskMesh mesh = build_disk_mesh(3);
    const BoundaryBasis basis = boundary_trig_basis(mesh, 8);
    const NDMatrix nd =
        nd_matrix(mesh, ConductivityField::constant(mesh, 1.0), basis);
    const EigenSystem eig = eigensystem(nd);
    const int n = eig.dim();
    CHECK((eig.eigenvectors.transpose() * eig.eigenvectors -
           Eigen::MatrixXd::Identity(n, n))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    const Eigen::MatrixXd rebuilt = eig.eigenvectors *
                                    eig.eigenvalues.asDiagonal() *
                                    eig.eigenvectors.transpose();
    CHECK((rebuilt - nd.matrix).norm() < 1e-10 * nd.matrix.norm());
    for (int k = 1; k <= 8; ++k) {
        CHECK(eig.eigenvalues[2 * k - 2] * k == doctest::Approx(1.0).epsilon(0.02));
        CHECK(eig.eigenvalues[2 * k - 1] * k == doctest::Approx(1.0).epsilon(0.02));
    }
}

TEST_CASE("eigensystem: rejects indefinite input") {
    CHECK_THROWS_AS(eigensystem(diag_nd({1.0, -0.5})), DefinitenessError);
}

TEST_CASE("spectral functions: scalar cases") {
    const EigenSystem e1 = eigensystem(diag_nd({std::exp(1.0), 1.0}));
    const SobolevOperator log_op =
        apply_spectral_function(e1, SpectralFunctionSpec::log());
    CHECK(log_op.matrix(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(log_op.matrix(1, 1)) < 1e-12);
    CHECK(log_op.r_in.r == doctest::Approx(0.5));
    CHECK(log_op.r_out.r == doctest::Approx(-0.5));

    const EigenSystem e2 = eigensystem(diag_nd({4.0, 1.0}));
    const SobolevOperator pow1 =
        apply_spectral_function(e2, SpectralFunctionSpec::power_2r(1.0));
    CHECK(pow1.matrix(0, 0) == doctest::Approx(4.0));
    const SobolevOperator pow_neg =
        apply_spectral_function(e2, SpectralFunctionSpec::power_2r(-1.0));
    CHECK(pow_neg.matrix(0, 0) == doctest::Approx(0.25));
    CHECK(pow_neg.matrix(1, 1) == doctest::Approx(1.0));
    CHECK(pow_neg.r_in.r == doctest::Approx(0.5));
    CHECK(pow_neg.r_out.r == doctest::Approx(-0.5));

    const EigenSystem e3 = eigensystem(diag_nd({1.0, 1.0}));
    const SobolevOperator shifted = apply_spectral_function(
        e3, SpectralFunctionSpec::shifted_log(std::exp(1.0) - 1.0));
    CHECK(shifted.matrix(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(shifted.r_in.r == 0.0);
    CHECK(shifted.r_out.r == 0.0);
}

TEST_CASE("spectral functions: power round trip is the identity") {
    for (double two_r : {1.0, 0.5, -0.6}) {
        const NDMatrix nd = random_spd(8, 42);
        const EigenSystem eig = eigensystem(nd);
        const SobolevOperator up =
            apply_spectral_function(eig, SpectralFunctionSpec::power_2r(two_r));
        const SobolevOperator down =
            apply_spectral_function(eig, SpectralFunctionSpec::power_2r(-two_r));
        const Eigen::MatrixXd prod = up.matrix * down.matrix;
        CHECK((prod - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() <
              1e-9);
    }
}

TEST_CASE("spectral functions: domain errors") {
    const EigenSystem eig = eigensystem(diag_nd({2.0, 1.0}));
    CHECK_THROWS_AS(
        apply_spectral_function(eig, SpectralFunctionSpec::shifted_log(-0.1)),
        DomainError);
    CHECK_THROWS_AS(
        apply_spectral_function(eig, SpectralFunctionSpec::power_2r(1.5)),
        DomainError);
}

TEST_CASE("shifted minus plain log has eigenvalues log(1 + tau/lambda)") {
    const NDMatrix nd = random_spd(10, 7);
    const EigenSystem eig = eigensystem(nd);
    const double tau = 0.3;
    const Eigen::MatrixXd diff =
        apply_spectral_function(eig, SpectralFunctionSpec::shifted_log(tau)).matrix -
        apply_spectral_function(eig, SpectralFunctionSpec::log()).matrix;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff, Eigen::EigenvaluesOnly);
    Eigen::VectorXd expected(eig.dim());
    for (int k = 0; k < eig.dim(); ++k)
        expected[k] = std::log1p(tau / eig.eigenvalues[k]);
    std::sort(expected.data(), expected.data() + expected.size());
    CHECK((es.eigenvalues() - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("riesz-dunford log: diagonal oracle") {
    double imag = 1.0;
    const SobolevOperator op =
        riesz_dunford_log(diag_nd({2.0, 1.0}), 64, 1e-12, &imag);
    CHECK(std::abs(op.matrix(0, 0) - std::log(2.0)) < 1e-10);
    CHECK(std::abs(op.matrix(1, 1)) < 1e-10);
    CHECK(std::abs(op.matrix(0, 1)) < 1e-10);
    CHECK(imag < 1e-10);
}

TEST_CASE("riesz-dunford log agrees with the spectral log") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const NDMatrix nd = random_spd(12, seed);
        double imag = 1.0;
        const SobolevOperator contour = riesz_dunford_log(nd, 32, 1e-11, &imag);
        const SobolevOperator spectral =
            apply_spectral_function(eigensystem(nd), SpectralFunctionSpec::log());
        CHECK((contour.matrix - spectral.matrix).norm() < 1e-8);
        CHECK(imag < 1e-10);
    }
}

TEST_CASE("riesz-dunford log: contour guard") {
    CHECK_THROWS_AS(riesz_dunford_log(diag_nd({1.0, -0.25})), ContourError);
}

TEST_CASE("sigma_norm on the disk spectrum") {
    const DiskMesh mesh = build_disk_mesh(3);
    const BoundaryBasis basis = boundary_trig_basis(mesh, 4);
    const NDMatrix nd =
        nd_matrix(mesh, ConductivityField::constant(mesh, 1.0), basis);
    const EigenSystem eig = eigensystem(nd);

    BoundaryVector f{Eigen::VectorXd::Zero(basis.dim())};
    f.coeffs[0] = 1.0; // cos(theta), lambda = 1
    CHECK(sigma_norm(f, 0.0, eig) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sigma_norm(f, 0.5, eig) == doctest::Approx(1.0).epsilon(1e-3));

    BoundaryVector g{Eigen::VectorXd::Zero(basis.dim())};
    g.coeffs[2] = 1.0; // cos(2 theta), lambda = 1/2, weight lambda^{-1} = 2
    CHECK(sigma_norm(g, 0.5, eig) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
    CHECK_THROWS_AS(sigma_norm(g, 0.75, eig), DomainError);
}

TEST_CASE("riesz-dunford log: unresolvable spectrum fails loudly") {
    // a 13-orders-of-magnitude spread defeats the fixed contour family
    CHECK_THROWS_AS(riesz_dunford_log(diag_nd({1.0, 2e-13}), 32, 1e-10),
                    ConvergenceError);
}
