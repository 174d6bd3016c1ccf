#include <doctest.h>

#include "eitlog/basis.hpp"
#include "eitlog/calculus.hpp"
#include "eitlog/sobolev.hpp"
#include "eitlog/derivatives.hpp"
#include "eitlog/ensemble.hpp"
#include "eitlog/errors.hpp"
#include "eitlog/forward.hpp"
#include "eitlog/mesh.hpp"

#include <array>
#include <cmath>
#include <vector>

using namespace eitlog;

namespace {

ConductivityField bump_field(const DiskMesh& mesh, double cx, double cy,
                             double amp, double width) {
    return ConductivityField::from_function(mesh, [=](double x, double y) {
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        return amp * std::exp(-d2 / (width * width));
    });
}

// slope of log(err) vs log(t) by least squares
double fitted_slope(const std::vector<double>& t, const std::vector<double>& e) {
    const int n = static_cast<int>(t.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = std::log(t[i]), y = std::log(e[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct Setup {
    DiskMesh mesh = build_disk_mesh(2);
    BoundaryBasis basis{mesh, 4};
    ConductivityField sigma = ConductivityField::from_function(
        mesh, [](double x, double y) { return 1.2 + 0.4 * x - 0.2 * y * y; });
    ConductivityField eta = bump_field(mesh, 0.3, -0.2, 0.5, 0.4);
    ForwardCache cache{mesh, basis, sigma};
};

} // namespace

TEST_CASE("dlambda: zero direction, scaling-family oracle, linearity") {
    Setup s;
    const SobolevOperator zero =
        dlambda(s.cache, ConductivityField::constant(s.mesh, 0.0));
    CHECK(zero.matrix.cwiseAbs().maxCoeff() < 1e-14);

    // differentiate Lambda((1+t) sigma) = Lambda(sigma)/(1+t) at t = 0
    const SobolevOperator d_sigma = dlambda(s.cache, s.sigma);
    CHECK((d_sigma.matrix + s.cache.nd().matrix).cwiseAbs().maxCoeff() < 1e-10);

    const SobolevOperator d1 = dlambda(s.cache, s.eta);
    const SobolevOperator d2 = dlambda(s.cache, 2.0 * s.eta);
    CHECK((d2.matrix - 2.0 * d1.matrix).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((d1.matrix - d1.matrix.transpose()).norm() == 0.0);
    CHECK(d1.r_in.r == doctest::Approx(-0.5));
    CHECK(d1.r_out.r == doctest::Approx(0.5));
}

TEST_CASE("dlambda: central differences converge at order 2") {
    Setup s;
    const Eigen::MatrixXd d = dlambda(s.cache, s.eta).matrix;
    std::vector<double> steps = {0.2, 0.1, 0.05, 0.025};
    std::vector<double> errs;
    for (double t : steps) {
        const NDMatrix plus = nd_matrix(s.mesh, s.sigma + t * s.eta, s.basis);
        const NDMatrix minus = nd_matrix(s.mesh, s.sigma + (-t) * s.eta, s.basis);
        errs.push_back((plus.matrix - minus.matrix - 2.0 * t * d).norm() /
                       (2.0 * t));
    }
    CHECK(fitted_slope(steps, errs) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("dk_lambda: order consistency and the scaling-family oracle") {
    Setup s;
    const std::array<ConductivityField, 1> one = {s.eta};
    CHECK((dk_lambda(s.cache, one).matrix - dlambda(s.cache, s.eta).matrix)
              .cwiseAbs()
              .maxCoeff() < 1e-14);

    // d^2/dt^2 of Lambda(sigma)/(1+t) at 0 is 2 Lambda(sigma)
    const std::array<ConductivityField, 2> twice = {s.sigma, s.sigma};
    CHECK((dk_lambda(s.cache, twice).matrix - 2.0 * s.cache.nd().matrix)
              .cwiseAbs()
              .maxCoeff() < 1e-10);

    const std::array<ConductivityField, 4> four = {s.eta, s.eta, s.eta, s.eta};
    CHECK_THROWS_AS(dk_lambda(s.cache, four), OrderCapError);
}

TEST_CASE("dk_lambda: second-order finite-difference agreement") {
    Setup s;
    const ConductivityField xi = bump_field(s.mesh, -0.4, 0.1, 0.3, 0.5);
    const std::array<ConductivityField, 2> dirs = {s.eta, xi};
    const Eigen::MatrixXd d2 = dk_lambda(s.cache, dirs).matrix;
    // mixed second central difference of Lambda(sigma + t eta + u xi)
    std::vector<double> steps = {0.2, 0.1, 0.05};
    std::vector<double> errs;
    for (double t : steps) {
        const auto at = [&](double a, double b) {
            return nd_matrix(s.mesh, s.sigma + a * s.eta + b * xi, s.basis).matrix;
        };
        const Eigen::MatrixXd mixed =
            (at(t, t) - at(t, -t) - at(-t, t) + at(-t, -t)) / (4.0 * t * t);
        errs.push_back((mixed - d2).norm());
    }
    CHECK(fitted_slope(steps, errs) == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("divided differences: stated values and invariants") {
    CHECK(log_divided_difference(std::exp(1.0), std::exp(1.0)) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(log_divided_difference(2.0, 1.0) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-14));
    // (log 2 - log 4) / (1 - 3) = log(2)/2 with tau = 1
    CHECK(log_divided_difference(1.0 + 1.0, 3.0 + 1.0) ==
          doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-14));
    // near-coincident pair stays accurate
    const double a = 0.7, d = 1e-9;
    CHECK(log_divided_difference(a + d, a) ==
          doctest::Approx(1.0 / (a + 0.5 * d)).epsilon(1e-10));

    Setup s;
    for (double tau : {0.0, 0.05, 1.0}) {
        const DividedDifferenceTable table = divided_differences(s.cache.eig(), tau);
        CHECK((table.c - table.c.transpose()).norm() == 0.0);
        CHECK(table.c.minCoeff() > 0.0);
        for (int j = 0; j < s.cache.eig().dim(); ++j)
            CHECK(table.c(j, j) == 1.0 / (s.cache.eig().eigenvalues[j] + tau));
    }
}

TEST_CASE("second divided difference of log") {
    // distinct points: symmetric closed form
    const double v = log_second_divided_difference(1.0, 2.0, 4.0);
    const double direct = (std::log(1.0) / ((1.0 - 2.0) * (1.0 - 4.0)) +
                           std::log(2.0) / ((2.0 - 1.0) * (2.0 - 4.0)) +
                           std::log(4.0) / ((4.0 - 1.0) * (4.0 - 2.0)));
    CHECK(v == doctest::Approx(direct).epsilon(1e-12));
    // permutation invariance
    CHECK(log_second_divided_difference(4.0, 1.0, 2.0) ==
          doctest::Approx(v).epsilon(1e-12));
    // coincident triple: f''(a)/2 = -1/(2 a^2)
    CHECK(log_second_divided_difference(0.5, 0.5, 0.5) ==
          doctest::Approx(-2.0).epsilon(1e-12));
    // clustered triple stays near the coincident value
    CHECK(log_second_divided_difference(0.5, 0.5 + 1e-9, 0.5 - 1e-9) ==
          doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("df_tau_spectral: constant-conductivity oracle and linearity") {
    Setup s;
    const DiskMesh& mesh = s.mesh;
    const ConductivityField c2 = ConductivityField::constant(mesh, 2.0);
    const ConductivityField c_eta = ConductivityField::constant(mesh, 0.6);
    ForwardCache cache(mesh, s.basis, c2);
    const SobolevOperator d = df_tau_spectral(cache, c_eta, 0.0);
    const Eigen::MatrixXd expected =
        -(0.6 / 2.0) * Eigen::MatrixXd::Identity(d.dim(), d.dim());
    CHECK((d.matrix - expected).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(d.r_in.r == 0.0);
    CHECK(d.r_out.r == 0.0);

    const SobolevOperator zero =
        df_tau_spectral(s.cache, ConductivityField::constant(mesh, 0.0), 0.3);
    CHECK(zero.matrix.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("df_tau_spectral: finite differences of the shifted log") {
    Setup s;
    for (double tau : {0.1, 1.0}) {
        const Eigen::MatrixXd d = df_tau_spectral(s.cache, s.eta, tau).matrix;
        const auto log_at = [&](double t) {
            const NDMatrix nd = nd_matrix(s.mesh, s.sigma + t * s.eta, s.basis);
            return apply_spectral_function(eigensystem(nd),
                                           SpectralFunctionSpec::shifted_log(tau))
                .matrix;
        };
        std::vector<double> steps = {0.2, 0.1, 0.05, 0.025};
        std::vector<double> errs;
        for (double t : steps)
            errs.push_back((log_at(t) - log_at(-t) - 2.0 * t * d).norm() /
                           (2.0 * t));
        CHECK(fitted_slope(steps, errs) == doctest::Approx(2.0).epsilon(0.1));
    }
}

TEST_CASE("df_tau_quadrature matches the closed form") {
    Setup s;
    // scalar sanity: int_0^inf ds/(1+s)^2 = 1
    CHECK(integrate_half_line_scalar(
              [](double u) { return 1.0 / ((1.0 + u) * (1.0 + u)); }, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-10));

    for (double tau : {0.0, 0.1, 1.0}) {
        const SobolevOperator spectral = df_tau_spectral(s.cache, s.eta, tau);
        const SobolevOperator quad = df_tau_quadrature(s.cache, s.eta, tau);
        CHECK((spectral.matrix - quad.matrix).norm() < 1e-8);
    }
    const SobolevOperator zero = df_tau_quadrature(
        s.cache, ConductivityField::constant(s.mesh, 0.0), 0.1);
    CHECK(zero.matrix.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("dl_map: constant oracle and shift covariance") {
    Setup s;
    // constant kappa, constant direction: the derivative is -eta I exactly
    const ConductivityField kappa = ConductivityField::constant(s.mesh, 0.4, true);
    ForwardCache cache(s.mesh, s.basis, kappa.exp_field());
    const ConductivityField eta_const = ConductivityField::constant(s.mesh, 0.8);
    const SobolevOperator d = dl_map(cache, eta_const);
    CHECK((d.matrix + 0.8 * Eigen::MatrixXd::Identity(d.dim(), d.dim()))
              .cwiseAbs()
              .maxCoeff() < 1e-8);

    const SobolevOperator zero =
        dl_map(cache, ConductivityField::constant(s.mesh, 0.0));
    CHECK(zero.matrix.cwiseAbs().maxCoeff() < 1e-14);

    // dl(kappa + c, eta) = dl(kappa, eta)
    const ConductivityField kappa_smooth = ConductivityField::from_function(
        s.mesh, [](double x, double y) { return 0.2 * x + 0.1 * y; }, true);
    ForwardCache cache_a(s.mesh, s.basis, kappa_smooth.exp_field());
    ConductivityField shifted = kappa_smooth;
    shifted.values.array() += 0.7;
    ForwardCache cache_b(s.mesh, s.basis, shifted.exp_field());
    const SobolevOperator da = dl_map(cache_a, s.eta);
    const SobolevOperator db = dl_map(cache_b, s.eta);
    CHECK((da.matrix - db.matrix).norm() < 1e-9 * da.matrix.norm());
}

TEST_CASE("dl_map: finite differences of the fully logarithmic map") {
    Setup s;
    const ConductivityField kappa = ConductivityField::from_function(
        s.mesh, [](double x, double y) { return 0.3 * x - 0.2 * y; }, true);
    ForwardCache cache(s.mesh, s.basis, kappa.exp_field());
    const Eigen::MatrixXd d = dl_map(cache, s.eta).matrix;
    const auto log_at = [&](double t) {
        ConductivityField k = kappa;
        k.values += t * s.eta.values;
        const NDMatrix nd = nd_matrix(s.mesh, k.exp_field(), s.basis);
        return apply_spectral_function(eigensystem(nd), SpectralFunctionSpec::log())
            .matrix;
    };
    std::vector<double> steps = {0.2, 0.1, 0.05, 0.025};
    std::vector<double> errs;
    for (double t : steps)
        errs.push_back((log_at(t) - log_at(-t) - 2.0 * t * d).norm() / (2.0 * t));
    CHECK(fitted_slope(steps, errs) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("d2f_tau: constant oracle, swap symmetry, quadrature cross-check") {
    Setup s;
    const ConductivityField c2 = ConductivityField::constant(s.mesh, 2.0);
    ForwardCache cache(s.mesh, s.basis, c2);
    const ConductivityField ca = ConductivityField::constant(s.mesh, 0.5);
    const ConductivityField cb = ConductivityField::constant(s.mesh, 0.8);
    const SobolevOperator d2 = d2f_tau(cache, ca, cb, 0.0);
    const Eigen::MatrixXd expected = (0.5 * 0.8 / 4.0) *
                                     Eigen::MatrixXd::Identity(d2.dim(), d2.dim());
    CHECK((d2.matrix - expected).cwiseAbs().maxCoeff() < 1e-7);

    const ConductivityField xi = bump_field(s.mesh, -0.3, 0.4, 0.4, 0.5);
    const SobolevOperator ab = d2f_tau(s.cache, s.eta, xi, 0.2);
    const SobolevOperator ba = d2f_tau(s.cache, xi, s.eta, 0.2);
    CHECK((ab.matrix - ba.matrix).cwiseAbs().maxCoeff() < 1e-13);

    for (double tau : {0.0, 0.1}) {
        const SobolevOperator closed = d2f_tau(s.cache, s.eta, xi, tau);
        const SobolevOperator quad = d2f_tau_quadrature(s.cache, s.eta, xi, tau);
        CHECK((closed.matrix - quad.matrix).norm() < 1e-8);
    }
}

TEST_CASE("d2f_tau: second-order finite differences of the shifted log") {
    Setup s;
    const double tau = 0.5;
    const Eigen::MatrixXd d2 = d2f_tau(s.cache, s.eta, s.eta, tau).matrix;
    const auto log_at = [&](double t) {
        const NDMatrix nd = nd_matrix(s.mesh, s.sigma + t * s.eta, s.basis);
        return apply_spectral_function(eigensystem(nd),
                                       SpectralFunctionSpec::shifted_log(tau))
            .matrix;
    };
    const Eigen::MatrixXd base = log_at(0.0);
    std::vector<double> steps = {0.4, 0.2, 0.1};
    std::vector<double> errs;
    for (double t : steps) {
        const Eigen::MatrixXd second =
            (log_at(t) - 2.0 * base + log_at(-t)) / (t * t);
        errs.push_back((second - d2).norm());
    }
    CHECK(fitted_slope(steps, errs) == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("uniform-in-tau bounds survive basis doubling") {
    const DiskMesh mesh = build_disk_mesh(2);
    Rng rng(77);
    const ConductivityField sigma = sample_smooth(mesh, rng, 0.5, 2.0);
    const ConductivityField eta = sample_direction(mesh, rng, 0.5, 0);
    double df_max[2] = {0.0, 0.0}, d2f_max[2] = {0.0, 0.0};
    int idx = 0;
    for (int n : {4, 8}) {
        const BoundaryBasis basis(mesh, n);
        ForwardCache cache(mesh, basis, sigma);
        for (double tau : {0.0, 1e-3, 1e-2, 1e-1, 1.0}) {
            df_max[idx] = std::max(
                df_max[idx],
                sobolev_operator_norm(df_tau_spectral(cache, eta, tau), 0.0, 0.0));
            d2f_max[idx] = std::max(
                d2f_max[idx],
                sobolev_operator_norm(d2f_tau(cache, eta, eta, tau), 0.0, 0.0));
        }
        ++idx;
    }
    CHECK(df_max[1] <= 1.1 * df_max[0]);
    CHECK(d2f_max[1] <= 1.1 * d2f_max[0]);
}

TEST_CASE("d2f_tau is bilinear in the directions") {
    Setup s;
    const ConductivityField xi = bump_field(s.mesh, -0.3, 0.4, 0.4, 0.5);
    const Eigen::MatrixXd one = d2f_tau(s.cache, s.eta, xi, 0.1).matrix;
    const Eigen::MatrixXd two = d2f_tau(s.cache, 2.0 * s.eta, xi, 0.1).matrix;
    CHECK((two - 2.0 * one).cwiseAbs().maxCoeff() <
          1e-12 * one.cwiseAbs().maxCoeff());
}

TEST_CASE("df_tau_quadrature reports exhausted refinement") {
    Setup s;
    QuadControl strangled;
    strangled.points_per_panel = 2;
    strangled.initial_panels = 1;
    strangled.max_panels = 2;
    strangled.rel_tol = 1e-14;
    CHECK_THROWS_AS(df_tau_quadrature(s.cache, s.eta, 0.1, strangled),
                    ConvergenceError);
}

TEST_CASE("derivative requests dispatch to the explicit entry points") {
    Setup s;
    DerivativeRequest req;
    req.base = s.sigma;
    req.directions = {s.eta};
    req.tau = 0.3;
    const SobolevOperator via_request =
        evaluate_log_derivative(s.mesh, s.basis, req);
    const SobolevOperator direct = df_tau_spectral(s.cache, s.eta, 0.3);
    CHECK((via_request.matrix - direct.matrix).cwiseAbs().maxCoeff() < 1e-14);

    DerivativeRequest log_req;
    log_req.base = ConductivityField{s.sigma.values.array().log().matrix(), true};
    log_req.directions = {s.eta};
    const SobolevOperator via_log =
        evaluate_log_derivative(s.mesh, s.basis, log_req);
    const SobolevOperator dl_direct = dl_map(s.cache, s.eta);
    CHECK((via_log.matrix - dl_direct.matrix).cwiseAbs().maxCoeff() < 1e-12);

    DerivativeRequest second;
    second.base = s.sigma;
    second.directions = {s.eta, s.eta};
    second.tau = 0.1;
    const SobolevOperator via_second =
        evaluate_log_derivative(s.mesh, s.basis, second);
    CHECK((via_second.matrix - d2f_tau(s.cache, s.eta, s.eta, 0.1).matrix)
              .cwiseAbs()
              .maxCoeff() < 1e-14);

    // the second derivative of the log-conductivity parametrization is not
    // provided; the request form refuses it rather than guessing
    second.base.is_log = true;
    second.base.values = s.sigma.values.array().log();
    CHECK_THROWS_AS(evaluate_log_derivative(s.mesh, s.basis, second), DomainError);

    DerivativeRequest overfull;
    overfull.base = s.sigma;
    overfull.directions = {s.eta, s.eta, s.eta};
    CHECK_THROWS_AS(evaluate_log_derivative(s.mesh, s.basis, overfull),
                    OrderCapError);

    // request form of the boundary-map derivative
    const std::array<ConductivityField, 2> pair = {s.eta, s.eta};
    DerivativeRequest dk;
    dk.base = s.sigma;
    dk.directions = {s.eta, s.eta};
    CHECK((dk_lambda(s.cache, dk).matrix - dk_lambda(s.cache, pair).matrix)
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("dk_lambda: third-order scaling-family oracle") {
    Setup s;
    // d^3/dt^3 of Lambda(sigma)/(1+t) at t = 0 is -6 Lambda(sigma)
    const std::array<ConductivityField, 3> dirs = {s.sigma, s.sigma, s.sigma};
    const SobolevOperator d3 = dk_lambda(s.cache, dirs);
    CHECK((d3.matrix + 6.0 * s.cache.nd().matrix).cwiseAbs().maxCoeff() < 1e-9);
}
