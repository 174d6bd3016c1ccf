#include "eitlog/derivatives.hpp"

#include "eitlog/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace eitlog {

ForwardCache::ForwardCache(const DiskMesh& mesh, const BoundaryBasis& basis,
                           ConductivityField sigma)
    : fem_(mesh, basis, std::move(sigma)) {
    nd_ = nd_matrix(fem_, &solutions_);
    grad_x_ = fem_.geometry().grad_x * solutions_;
    grad_y_ = fem_.geometry().grad_y * solutions_;
    eig_ = eigensystem(nd_);
}

Eigen::MatrixXd ForwardCache::apply_p(const ConductivityField& dir,
                                      const Eigen::MatrixXd& v) const {
    Eigen::MatrixXd w(v.rows(), v.cols());
    for (int c = 0; c < v.cols(); ++c)
        w.col(c) = fem_.solve(fem_.perturbation_load(dir, v.col(c)));
    return w;
}

Eigen::MatrixXd ForwardCache::cross_form(const ConductivityField& field,
                                         const Eigen::MatrixXd& v) const {
    const auto& geom = fem_.geometry();
    const Eigen::VectorXd w = field.values.cwiseProduct(geom.area);
    const Eigen::MatrixXd vx = geom.grad_x * v;
    const Eigen::MatrixXd vy = geom.grad_y * v;
    return grad_x_.transpose() * w.asDiagonal() * vx +
           grad_y_.transpose() * w.asDiagonal() * vy;
}

double log_divided_difference(double a, double b) {
    if (a <= 0.0 || b <= 0.0)
        throw DomainError("log_divided_difference: nonpositive argument");
    if (a == b) return 1.0 / a;
    const double delta = a - b;
    if (std::abs(delta) < 1e-6 * (a + b)) return std::log1p(delta / b) / delta;
    return (std::log(a) - std::log(b)) / delta;
}

double log_second_divided_difference(double a, double b, double c) {
    double x0 = a, x1 = b, x2 = c;
    if (x0 > x1) std::swap(x0, x1);
    if (x1 > x2) std::swap(x1, x2);
    if (x0 > x1) std::swap(x0, x1);
    const double mean = (x0 + x1 + x2) / 3.0;
    if (x2 - x0 < 1e-5 * mean) return -1.0 / (2.0 * mean * mean);
    // divide by the widest gap; the inner differences are log1p-stable
    return (log_divided_difference(x1, x2) - log_divided_difference(x0, x1)) /
           (x2 - x0);
}

DividedDifferenceTable divided_differences(const EigenSystem& eig, double tau) {
    if (eig.lambda_min() + tau <= 0.0)
        throw DomainError("divided_differences: lambda_min + tau <= 0");
    const int n = eig.dim();
    DividedDifferenceTable table;
    table.tau = tau;
    table.c.resize(n, n);
    for (int j = 0; j < n; ++j) {
        table.c(j, j) = 1.0 / (eig.eigenvalues[j] + tau);
        for (int k = j + 1; k < n; ++k) {
            const double v = log_divided_difference(eig.eigenvalues[j] + tau,
                                                    eig.eigenvalues[k] + tau);
            table.c(j, k) = v;
            table.c(k, j) = v;
        }
    }
    return table;
}

namespace {

SobolevOperator make_symmetric_op(Eigen::MatrixXd m, const Eigen::VectorXi& freq,
                                  double r_in, double r_out) {
    SobolevOperator op;
    op.matrix = 0.5 * (m + m.transpose()).eval();
    op.frequencies = freq;
    op.r_in = r_in;
    op.r_out = r_out;
    op.symmetric = true;
    return op;
}

} // namespace

SobolevOperator dlambda(const ForwardCache& cache, const ConductivityField& eta) {
    return make_symmetric_op(-cache.cross_form(eta, cache.solutions()),
                             cache.nd().frequencies, -0.5, 0.5);
}

SobolevOperator dk_lambda(const ForwardCache& cache,
                          std::span<const ConductivityField> directions) {
    const int k = static_cast<int>(directions.size());
    if (k < 1) throw std::invalid_argument("dk_lambda: needs at least one direction");
    if (k > kMaxDerivativeOrder)
        throw OrderCapError("dk_lambda: order " + std::to_string(k) +
                            " above cap " + std::to_string(kMaxDerivativeOrder));
    const Eigen::MatrixXd& u = cache.solutions();
    const int dim = cache.basis().dim();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim, dim);
    if (k == 1) {
        acc = -cache.cross_form(directions[0], u);
    } else if (k == 2) {
        const Eigen::MatrixXd w0 = cache.apply_p(directions[0], u);
        const Eigen::MatrixXd w1 = cache.apply_p(directions[1], u);
        acc = -cache.cross_form(directions[0], w1) -
              cache.cross_form(directions[1], w0);
    } else {
        // chains P_{a2} P_{a3} u over all permutations (a1 a2 a3)
        std::array<Eigen::MatrixXd, 3> first;
        for (int j = 0; j < 3; ++j) first[j] = cache.apply_p(directions[j], u);
        for (int a1 = 0; a1 < 3; ++a1)
            for (int a2 = 0; a2 < 3; ++a2) {
                if (a2 == a1) continue;
                const int a3 = 3 - a1 - a2;
                acc -= cache.cross_form(directions[a1],
                                        cache.apply_p(directions[a2], first[a3]));
            }
    }
    return make_symmetric_op(std::move(acc), cache.nd().frequencies, -0.5, 0.5);
}

SobolevOperator dk_lambda(const ForwardCache& cache,
                          const DerivativeRequest& request) {
    return dk_lambda(cache, std::span<const ConductivityField>(
                                request.directions.data(),
                                request.directions.size()));
}

SobolevOperator evaluate_log_derivative(const DiskMesh& mesh,
                                        const BoundaryBasis& basis,
                                        const DerivativeRequest& request) {
    if (request.order() < 1)
        throw std::invalid_argument("evaluate_log_derivative: needs a direction");
    if (request.order() > 2)
        throw OrderCapError("evaluate_log_derivative: order " +
                            std::to_string(request.order()) + " above cap 2");
    ForwardCache cache(mesh, basis, request.conductivity());
    if (request.order() == 2) {
        if (request.base.is_log)
            throw DomainError(
                "evaluate_log_derivative: no second derivative in the "
                "log-conductivity parametrization");
        return d2f_tau(cache, request.directions[0], request.directions[1],
                       request.tau);
    }
    if (request.base.is_log) {
        if (request.tau != 0.0)
            throw DomainError("evaluate_log_derivative: the fully logarithmic "
                              "map has no shift");
        return dl_map(cache, request.directions[0]);
    }
    return df_tau_spectral(cache, request.directions[0], request.tau);
}

SobolevOperator df_spectral_from_parts(const EigenSystem& eig,
                                       const Eigen::MatrixXd& dlambda_matrix,
                                       double tau) {
    if (tau < 0.0) throw DomainError("df_spectral_from_parts: tau must be >= 0");
    const DividedDifferenceTable table = divided_differences(eig, tau);
    const Eigen::MatrixXd g =
        eig.eigenvectors.transpose() * dlambda_matrix * eig.eigenvectors;
    const Eigen::MatrixXd h = table.c.cwiseProduct(g);
    return make_symmetric_op(
        eig.eigenvectors * h * eig.eigenvectors.transpose(), eig.frequencies,
        0.0, 0.0);
}

SobolevOperator df_tau_spectral(const ForwardCache& cache,
                                const ConductivityField& eta, double tau) {
    return df_spectral_from_parts(cache.eig(), dlambda(cache, eta).matrix, tau);
}

namespace {

// resolvent (A + (tau + s) I)^{-1} applied by Cholesky solve
Eigen::MatrixXd resolvent_apply(const Eigen::MatrixXd& a, double shift,
                                const Eigen::MatrixXd& rhs) {
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += shift;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() != Eigen::Success)
        throw DomainError("resolvent_apply: shifted matrix not positive definite");
    return llt.solve(rhs);
}

} // namespace

SobolevOperator df_tau_quadrature(const ForwardCache& cache,
                                  const ConductivityField& eta, double tau,
                                  const QuadControl& control) {
    if (tau < 0.0) throw DomainError("df_tau_quadrature: tau must be >= 0");
    const Eigen::MatrixXd& a = cache.nd().matrix;
    const Eigen::MatrixXd dlam = dlambda(cache, eta).matrix;
    const int n = static_cast<int>(a.rows());
    const double scale = std::sqrt((cache.eig().lambda_min() + tau) *
                                   (cache.eig().lambda_max() + tau));
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
    const auto integrand = [&](double s) {
        const Eigen::MatrixXd r = resolvent_apply(a, tau + s, identity);
        return Eigen::MatrixXd(r * dlam * r);
    };
    Eigen::MatrixXd result =
        integrate_half_line(integrand, n, n, scale, control);
    return make_symmetric_op(std::move(result), cache.nd().frequencies, 0.0, 0.0);
}

SobolevOperator dl_map(const ForwardCache& cache_at_exp_kappa,
                       const ConductivityField& eta) {
    const ConductivityField scaled{
        eta.values.cwiseProduct(cache_at_exp_kappa.sigma().values), false};
    return df_tau_spectral(cache_at_exp_kappa, scaled, 0.0);
}

SobolevOperator d2f_tau(const ForwardCache& cache, const ConductivityField& eta,
                        const ConductivityField& xi, double tau) {
    if (tau < 0.0) throw DomainError("d2f_tau: tau must be >= 0");
    const EigenSystem& eig = cache.eig();
    const int n = eig.dim();
    const Eigen::MatrixXd& phi = eig.eigenvectors;

    const std::array<ConductivityField, 2> dirs = {eta, xi};
    const Eigen::MatrixXd d2 =
        dk_lambda(cache, std::span<const ConductivityField>(dirs)).matrix;
    const Eigen::MatrixXd g2 = phi.transpose() * d2 * phi;
    const Eigen::MatrixXd g_eta =
        phi.transpose() * dlambda(cache, eta).matrix * phi;
    const Eigen::MatrixXd g_xi =
        phi.transpose() * dlambda(cache, xi).matrix * phi;

    const DividedDifferenceTable table = divided_differences(eig, tau);
    Eigen::VectorXd shifted(n);
    for (int k = 0; k < n; ++k) shifted[k] = eig.eigenvalues[k] + tau;

    Eigen::MatrixXd h(n, n);
    for (int j = 0; j < n; ++j) {
        for (int k = j; k < n; ++k) {
            double chain = 0.0;
            for (int m = 0; m < n; ++m) {
                const double triple = -log_second_divided_difference(
                    shifted[j], shifted[m], shifted[k]);
                chain += triple * (g_eta(j, m) * g_xi(m, k) +
                                   g_xi(j, m) * g_eta(m, k));
            }
            const double v = table.c(j, k) * g2(j, k) - chain;
            h(j, k) = v;
            h(k, j) = v;
        }
    }
    return make_symmetric_op(phi * h * phi.transpose(), cache.nd().frequencies,
                             0.0, 0.0);
}

SobolevOperator d2f_tau_quadrature(const ForwardCache& cache,
                                   const ConductivityField& eta,
                                   const ConductivityField& xi, double tau,
                                   const QuadControl& control) {
    if (tau < 0.0) throw DomainError("d2f_tau_quadrature: tau must be >= 0");
    const Eigen::MatrixXd& a = cache.nd().matrix;
    const int n = static_cast<int>(a.rows());
    const std::array<ConductivityField, 2> dirs = {eta, xi};
    const Eigen::MatrixXd d2 =
        dk_lambda(cache, std::span<const ConductivityField>(dirs)).matrix;
    const Eigen::MatrixXd d_eta = dlambda(cache, eta).matrix;
    const Eigen::MatrixXd d_xi = dlambda(cache, xi).matrix;
    const double scale = std::sqrt((cache.eig().lambda_min() + tau) *
                                   (cache.eig().lambda_max() + tau));
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
    const auto integrand = [&](double s) {
        const Eigen::MatrixXd r = resolvent_apply(a, tau + s, identity);
        const Eigen::MatrixXd r_eta = r * d_eta * r;
        const Eigen::MatrixXd r_xi = r * d_xi * r;
        return Eigen::MatrixXd(r * d2 * r - r_eta * d_xi * r - r_xi * d_eta * r);
    };
    Eigen::MatrixXd result =
        integrate_half_line(integrand, n, n, scale, control);
    return make_symmetric_op(std::move(result), cache.nd().frequencies, 0.0, 0.0);
}

} // namespace eitlog
