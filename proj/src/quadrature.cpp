#include "eitlog/quadrature.hpp"

#include "eitlog/errors.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace eitlog {

namespace {

GaussRule compute_gauss_legendre(int order) {
    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    // Newton on P_n with Chebyshev-like initial guesses
    for (int i = 0; i < order; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double p_prime = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            p_prime = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / p_prime;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[order - 1 - i] = x;
        rule.weights[order - 1 - i] = 2.0 / ((1.0 - x * x) * p_prime * p_prime);
    }
    return rule;
}

} // namespace

const GaussRule& gauss_legendre(int order) {
    static std::map<int, GaussRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end())
        it = cache.emplace(order, compute_gauss_legendre(order)).first;
    return it->second;
}

Eigen::MatrixXd integrate_unit_interval(
    const std::function<Eigen::MatrixXd(double)>& f, int rows, int cols,
    const QuadControl& control) {
    const GaussRule& rule = gauss_legendre(control.points_per_panel);

    const auto evaluate = [&](int panels) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(rows, cols);
        const double h = 1.0 / panels;
        for (int p = 0; p < panels; ++p) {
            const double a = p * h;
            for (int q = 0; q < control.points_per_panel; ++q) {
                const double t = a + 0.5 * h * (rule.nodes[q] + 1.0);
                acc += (0.5 * h * rule.weights[q]) * f(t);
            }
        }
        return acc;
    };

    Eigen::MatrixXd prev = evaluate(control.initial_panels);
    for (int panels = 2 * control.initial_panels; panels <= control.max_panels;
         panels *= 2) {
        Eigen::MatrixXd cur = evaluate(panels);
        const double change = (cur - prev).norm();
        prev = std::move(cur);
        if (change <= control.rel_tol * std::max(prev.norm(), 1e-300)) return prev;
    }
    throw ConvergenceError("integrate_unit_interval: no convergence within " +
                           std::to_string(control.max_panels) + " panels");
}

Eigen::MatrixXd integrate_half_line(
    const std::function<Eigen::MatrixXd(double)>& f, int rows, int cols,
    double scale, const QuadControl& control) {
    const auto transformed = [&](double t) {
        const double one_minus = 1.0 - t;
        const double s = scale * t / one_minus;
        const double jacobian = scale / (one_minus * one_minus);
        return Eigen::MatrixXd(jacobian * f(s));
    };
    return integrate_unit_interval(transformed, rows, cols, control);
}

double integrate_half_line_scalar(const std::function<double(double)>& f,
                                  double scale, const QuadControl& control) {
    const auto wrapped = [&](double s) {
        Eigen::MatrixXd m(1, 1);
        m(0, 0) = f(s);
        return m;
    };
    return integrate_half_line(wrapped, 1, 1, scale, control)(0, 0);
}

} // namespace eitlog
