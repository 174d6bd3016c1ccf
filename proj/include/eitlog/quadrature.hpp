#ifndef EITLOG_QUADRATURE_HPP
#define EITLOG_QUADRATURE_HPP

#include <Eigen/Dense>
#include <functional>

namespace eitlog {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

/// Deterministic Newton construction; cached per order.
const GaussRule& gauss_legendre(int order);

struct QuadControl {
    int points_per_panel = 16;
    int initial_panels = 4;
    int max_panels = 4096;
    double rel_tol = 1e-10;
};

/// Integrates a matrix-valued function over (0, 1) on uniform panels,
/// doubling the panel count until the result moves by less than rel_tol
/// relatively. Throws ConvergenceError when max_panels is exhausted.
Eigen::MatrixXd integrate_unit_interval(
    const std::function<Eigen::MatrixXd(double)>& f, int rows, int cols,
    const QuadControl& control = {});

/// Improper integral over s in (0, inf) after the substitution
/// s = scale * t / (1 - t); scale should match the natural scale of the
/// integrand (geometric mean of the extreme resolvent shifts).
Eigen::MatrixXd integrate_half_line(
    const std::function<Eigen::MatrixXd(double)>& f, int rows, int cols,
    double scale, const QuadControl& control = {});

/// Scalar convenience wrapper around integrate_half_line.
double integrate_half_line_scalar(const std::function<double(double)>& f,
                                  double scale, const QuadControl& control = {});

} // namespace eitlog

#endif
