#include "eitlog/experiments.hpp"

#include "eitlog/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace eitlog {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

double spectral_norm(const Eigen::MatrixXd& m, const Eigen::VectorXi& freq) {
    SobolevOperator op;
    op.matrix = m;
    op.frequencies = freq;
    return sobolev_operator_norm(op, 0.0, 0.0);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    if (n == 0) return 0.0;
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Eigen::VectorXd random_coeffs(Rng& rng, int dim) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x[i] = rng.uniform(-1.0, 1.0);
    return x;
}

} // namespace

bool ExperimentReport::passed() const {
    for (const SlopeFit& s : slopes)
        if (!s.pass) return false;
    for (const CheckItem& c : checks)
        if (!c.pass) return false;
    return true;
}

const Curve& ExperimentReport::curve(const std::string& name) const {
    for (const Curve& c : curves)
        if (c.name == name) return c;
    throw std::out_of_range("ExperimentReport: no curve named " + name);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    if (n < 2 || y.size() != x.size())
        throw std::invalid_argument("fit_line: need at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LineFit fit;
    const double denom = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double rss = 0;
    for (int i = 0; i < n; ++i) {
        const double r = y[i] - fit.slope * x[i] - fit.intercept;
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / n);
    return fit;
}

std::vector<double> default_tau_grid(const EigenSystem& eig, double eps,
                                     int n_points) {
    // Windows inside [lambda_min, lambda_max] where the finite spectrum
    // resolves the rate: the interior maximizer of t^{2e} log(1 + tau/t)
    // exists only for mid-range eps; small eps rides the truncation edge
    // and large eps saturates logarithmically near lambda_max.
    const double lmin = eig.lambda_min();
    const double lmax = eig.lambda_max();
    double a, b;
    if (eps <= 0.15) {
        a = 12.0 * lmin;
        b = std::min(40.0 * lmin, lmax);
    } else if (eps < 0.4) {
        a = 4.0 * lmin;
        b = lmax;
    } else {
        a = 2.0 * lmin;
        b = 0.08 * lmax;
    }
    a = std::clamp(a, lmin, 0.5 * lmax);
    b = std::clamp(b, 2.0 * a, lmax);
    std::vector<double> grid(static_cast<size_t>(n_points));
    for (int i = 0; i < n_points; ++i)
        grid[static_cast<size_t>(i)] =
            a * std::pow(b / a, static_cast<double>(i) / (n_points - 1));
    return grid;
}

// --- fd_check ---------------------------------------------------------------

ExperimentReport fd_check(const DiskMesh& mesh, const BoundaryBasis& basis,
                          FdMapKind map, double tau,
                          const ConductivityField& base,
                          const ConductivityField& direction,
                          const FdCheckOptions& options) {
    if (options.steps.size() < 4)
        throw std::invalid_argument("fd_check: need at least 4 steps");
    for (size_t i = 1; i < options.steps.size(); ++i)
        if (options.steps[i] >= options.steps[i - 1])
            throw std::invalid_argument("fd_check: steps must decrease");

    const auto evaluate = [&](double t) -> Eigen::MatrixXd {
        switch (map) {
        case FdMapKind::Lambda:
            return nd_matrix(mesh, base + t * direction, basis).matrix;
        case FdMapKind::ShiftedLog: {
            const NDMatrix nd = nd_matrix(mesh, base + t * direction, basis);
            return apply_spectral_function(eigensystem(nd),
                                           SpectralFunctionSpec::shifted_log(tau))
                .matrix;
        }
        case FdMapKind::FullyLog: {
            ConductivityField kappa = base;
            kappa.values += t * direction.values;
            const NDMatrix nd = nd_matrix(mesh, kappa.exp_field(), basis);
            return apply_spectral_function(eigensystem(nd),
                                           SpectralFunctionSpec::log())
                .matrix;
        }
        }
        throw std::logic_error("fd_check: unknown map");
    };

    Eigen::MatrixXd derivative;
    switch (map) {
    case FdMapKind::Lambda: {
        ForwardCache cache(mesh, basis, base);
        derivative = dlambda(cache, direction).matrix;
        break;
    }
    case FdMapKind::ShiftedLog: {
        ForwardCache cache(mesh, basis, base);
        derivative = df_tau_spectral(cache, direction, tau).matrix;
        break;
    }
    case FdMapKind::FullyLog: {
        ForwardCache cache(mesh, basis, base.exp_field());
        derivative = dl_map(cache, direction).matrix;
        break;
    }
    }

    ExperimentReport report;
    report.experiment = "fd_check";
    report.params = {{"map", map == FdMapKind::Lambda      ? "lambda"
                             : map == FdMapKind::ShiftedLog ? "shifted_log"
                                                            : "fully_log"},
                     {"tau", fmt(tau)},
                     {"mode", options.fit_slope ? "fit" : "exact"}};

    Curve errs{"fd_error", "step", "error", {}};
    bool all_below_floor = true;
    double max_err = 0.0;
    for (double t : options.steps) {
        const Eigen::MatrixXd plus = evaluate(t);
        const Eigen::MatrixXd minus = evaluate(-t);
        const double err =
            (plus - minus - 2.0 * t * derivative).norm() / (2.0 * t);
        const double floor =
            100.0 * kEps * std::max(1.0, plus.norm()) / (2.0 * t);
        if (err > floor) all_below_floor = false;
        max_err = std::max(max_err, err);
        errs.points.push_back({t, err});
    }
    report.curves.push_back(errs);

    if (options.fit_slope) {
        if (all_below_floor)
            throw DegenerateFitError(
                "fd_check: errors at the roundoff floor for every step");
        std::vector<double> lx, ly;
        for (const auto& p : errs.points) {
            lx.push_back(std::log(p[0]));
            ly.push_back(std::log(p[1]));
        }
        const LineFit fit = fit_line(lx, ly);
        report.slopes.push_back({"fd_slope", "fd_error", fit.slope, fit.intercept,
                                 fit.residual, options.slope_lo, options.slope_hi,
                                 fit.slope >= options.slope_lo &&
                                     fit.slope <= options.slope_hi});
    } else {
        report.checks.push_back({"fd_error_max", max_err, options.exact_tolerance,
                                 "<=", max_err <= options.exact_tolerance});
    }
    report.scalars.emplace_back("derivative_norm", derivative.norm());
    return report;
}

// --- tau_rate_experiment ----------------------------------------------------

ExperimentReport tau_rate_experiment(const DiskMesh& mesh,
                                     const BoundaryBasis& basis,
                                     const ConductivityField& sigma, double eps,
                                     const ConductivityField& direction,
                                     const TauRateOptions& options) {
    if (eps <= 0.0 || eps > 0.5)
        throw std::invalid_argument("tau_rate_experiment: eps outside (0, 1/2]");
    ForwardCache cache(mesh, basis, sigma);
    const EigenSystem& eig = cache.eig();

    std::vector<double> taus = options.tau_grid.empty()
                                   ? default_tau_grid(eig, eps)
                                   : options.tau_grid;
    for (double t : taus)
        if (t < eig.lambda_min() * (1.0 - 1e-12) ||
            t > eig.lambda_max() * (1.0 + 1e-12))
            throw PlateauError("tau_rate_experiment: tau " + fmt(t) +
                               " outside the resolvable range [" +
                               fmt(eig.lambda_min()) + ", " +
                               fmt(eig.lambda_max()) + "]");

    const SobolevOperator log0 =
        apply_spectral_function(eig, SpectralFunctionSpec::log(), eps);
    // the boundary-map derivative is shift-independent; reuse it per tau
    const Eigen::MatrixXd dlam = dlambda(cache, direction).matrix;
    const SobolevOperator df0 = df_spectral_from_parts(eig, dlam, 0.0);

    ExperimentReport report;
    report.experiment = "tau_rate";
    report.params = {{"eps", fmt(eps)},
                     {"lambda_min", fmt(eig.lambda_min())},
                     {"lambda_max", fmt(eig.lambda_max())}};

    Curve log_curve{"log_diff", "tau", "log_diff_norm", {}};
    Curve df_curve{"df_diff", "tau", "df_diff_norm", {}};
    std::vector<double> lx, ly_log, ly_df;
    for (double tau : taus) {
        const SobolevOperator logt = apply_spectral_function(
            eig, SpectralFunctionSpec::shifted_log(tau), eps);
        SobolevOperator diff = log0;
        diff.matrix = log0.matrix - logt.matrix;
        const double dn = sobolev_operator_norm(diff, eps, -eps);
        const SobolevOperator dft = df_spectral_from_parts(eig, dlam, tau);
        SobolevOperator ddiff = df0;
        ddiff.matrix = df0.matrix - dft.matrix;
        const double ddn = sobolev_operator_norm(ddiff, eps, -eps);
        log_curve.points.push_back({tau, dn});
        df_curve.points.push_back({tau, ddn});
        lx.push_back(std::log(tau));
        ly_log.push_back(std::log(dn));
        ly_df.push_back(std::log(ddn));
    }
    report.curves.push_back(log_curve);
    report.curves.push_back(df_curve);

    const LineFit log_fit = fit_line(lx, ly_log);
    const LineFit df_fit = fit_line(lx, ly_df);
    const double lo = 2.0 * eps - options.slope_margin_lo;
    const double hi = 2.0 * eps + options.slope_margin_hi;
    report.slopes.push_back({"log_diff_slope", "log_diff", log_fit.slope,
                             log_fit.intercept, log_fit.residual, lo, hi,
                             log_fit.slope >= lo && log_fit.slope <= hi});
    const double dlo = eps - 0.1;
    report.slopes.push_back({"df_diff_slope", "df_diff", df_fit.slope,
                             df_fit.intercept, df_fit.residual, dlo, 10.0,
                             df_fit.slope >= dlo && df_fit.slope <= 10.0});

    // shared-eigenbasis identity at the middle of the grid
    {
        const double tau = taus[taus.size() / 2];
        const SobolevOperator logt = apply_spectral_function(
            eig, SpectralFunctionSpec::shifted_log(tau), eps);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            logt.matrix - log0.matrix, Eigen::EigenvaluesOnly);
        Eigen::VectorXd expected(eig.dim());
        for (int k = 0; k < eig.dim(); ++k)
            expected[k] = std::log1p(tau / eig.eigenvalues[k]);
        std::sort(expected.data(), expected.data() + expected.size());
        const double dev = (es.eigenvalues() - expected).cwiseAbs().maxCoeff();
        report.checks.push_back(
            {"eigenvalue_identity_dev", dev, 1e-11, "<=", dev <= 1e-11});
    }
    // the log difference grows monotonically with the shift
    bool monotone = true;
    for (size_t i = 1; i < log_curve.points.size(); ++i)
        if (log_curve.points[i][1] < log_curve.points[i - 1][1] * (1.0 - 1e-12))
            monotone = false;
    report.checks.push_back({"log_diff_monotone", monotone ? 1.0 : 0.0, 1.0,
                             ">=", monotone});
    return report;
}

// --- relative_boundedness_experiment ---------------------------------------

ExperimentReport relative_boundedness_experiment(
    const DiskMesh& mesh, const ConductivityField& kappa1,
    const ConductivityField& kappa2, const std::vector<int>& n_grid) {
    if (n_grid.empty())
        throw std::invalid_argument("relative_boundedness_experiment: empty grid");
    const int n_max = *std::max_element(n_grid.begin(), n_grid.end());
    const BoundaryBasis basis(mesh, n_max);
    const ConductivityField sigma1 = kappa1.exp_field();
    const ConductivityField sigma2 = kappa2.exp_field();
    const NDMatrix nd1 = nd_matrix(mesh, sigma1, basis);
    const NDMatrix nd2 = nd_matrix(mesh, sigma2, basis);
    const double exp_diff = (sigma2.values - sigma1.values).cwiseAbs().maxCoeff();

    ExperimentReport report;
    report.experiment = "relative_boundedness";
    report.params = {{"n_max", std::to_string(n_max)},
                     {"exp_diff_sup", fmt(exp_diff)}};

    Curve diff_curve{"L_diff", "N", "L_diff_norm", {}};
    Curve log_curve{"log_norm", "N", "log_norm", {}};
    std::vector<double> xs, ys;
    std::vector<double> diffs;
    for (int n : n_grid) {
        const NDMatrix sub1 = nd_leading_block(nd1, n);
        const NDMatrix sub2 = nd_leading_block(nd2, n);
        const EigenSystem e1 = eigensystem(sub1);
        const EigenSystem e2 = eigensystem(sub2);
        const Eigen::MatrixXd l1 =
            apply_spectral_function(e1, SpectralFunctionSpec::log()).matrix;
        const Eigen::MatrixXd l2 =
            apply_spectral_function(e2, SpectralFunctionSpec::log()).matrix;
        const double dn = spectral_norm(l2 - l1, sub1.frequencies);
        const double gn = spectral_norm(l1, sub1.frequencies);
        diff_curve.points.push_back({static_cast<double>(n), dn});
        log_curve.points.push_back({static_cast<double>(n), gn});
        xs.push_back(std::log(static_cast<double>(n)));
        ys.push_back(gn);
        diffs.push_back(dn);
    }
    report.curves.push_back(diff_curve);
    report.curves.push_back(log_curve);

    const double dmax = *std::max_element(diffs.begin(), diffs.end());
    const double dmin = *std::min_element(diffs.begin(), diffs.end());
    const double spread = dmax < 1e-14 ? 1.0 : dmax / dmin;
    report.checks.push_back({"L_diff_spread", spread, 1.5, "<=", spread <= 1.5});

    const LineFit fit = fit_line(xs, ys); // growth against log N
    report.slopes.push_back({"log_norm_growth", "log_norm", fit.slope,
                             fit.intercept, fit.residual, 0.8, 1.2,
                             fit.slope >= 0.8 && fit.slope <= 1.2,
                             FitSpace::LinLog});
    if (exp_diff > 0.0)
        report.scalars.emplace_back("diff_to_exp_ratio", dmax / exp_diff);
    return report;
}

// --- monotonicity_check -----------------------------------------------------

ExperimentReport monotonicity_check(const DiskMesh& mesh,
                                    const BoundaryBasis& basis,
                                    const ConductivityField& sigma1,
                                    const ConductivityField& sigma2,
                                    int n_vectors, std::uint64_t seed) {
    if (!pointwise_leq(sigma1, sigma2))
        throw InputOrderError("monotonicity_check: sigma1 must be <= sigma2");
    const NDMatrix a1 = nd_matrix(mesh, sigma1, basis);
    const NDMatrix a2 = nd_matrix(mesh, sigma2, basis);
    const Eigen::MatrixXd diff = a1.matrix - a2.matrix;

    Rng rng(seed);
    double min_form = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_vectors; ++k) {
        const Eigen::VectorXd x = random_coeffs(rng, basis.dim());
        min_form = std::min(min_form, x.dot(diff * x) / x.squaredNorm());
    }

    ExperimentReport report;
    report.experiment = "monotonicity";
    report.params = {{"n_vectors", std::to_string(n_vectors)},
                     {"seed", std::to_string(seed)}};
    report.checks.push_back(
        {"min_normalized_form", min_form, -1e-10, ">=", min_form >= -1e-10});
    return report;
}

// --- loewner_heinz_check ----------------------------------------------------

ExperimentReport loewner_heinz_check(const DiskMesh& mesh,
                                     const BoundaryBasis& basis,
                                     const ConductivityField& sigma1,
                                     const ConductivityField& sigma2, double r,
                                     int n_vectors, std::uint64_t seed) {
    if (!pointwise_leq(sigma1, sigma2))
        throw InputOrderError("loewner_heinz_check: sigma1 must be <= sigma2");
    if (r < 0.0 || r > 0.5)
        throw std::invalid_argument("loewner_heinz_check: r outside [0, 1/2]");
    const EigenSystem e1 = eigensystem(nd_matrix(mesh, sigma1, basis));
    const EigenSystem e2 = eigensystem(nd_matrix(mesh, sigma2, basis));

    const Eigen::MatrixXd fwd1 =
        apply_spectral_function(e1, SpectralFunctionSpec::power_2r(2.0 * r)).matrix;
    const Eigen::MatrixXd fwd2 =
        apply_spectral_function(e2, SpectralFunctionSpec::power_2r(2.0 * r)).matrix;
    const Eigen::MatrixXd inv1 =
        apply_spectral_function(e1, SpectralFunctionSpec::power_2r(-2.0 * r)).matrix;
    const Eigen::MatrixXd inv2 =
        apply_spectral_function(e2, SpectralFunctionSpec::power_2r(-2.0 * r)).matrix;

    Rng rng(seed);
    double min_forward = std::numeric_limits<double>::infinity();
    double min_inverse = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_vectors; ++k) {
        const Eigen::VectorXd x = random_coeffs(rng, basis.dim());
        // sigma1 <= sigma2: the map and its positive powers reverse the order
        const double s_fwd =
            0.5 * (std::abs(x.dot(fwd1 * x)) + std::abs(x.dot(fwd2 * x)));
        min_forward =
            std::min(min_forward, x.dot((fwd1 - fwd2) * x) / std::max(s_fwd, kEps));
        // negative powers restore it
        const double s_inv =
            0.5 * (std::abs(x.dot(inv1 * x)) + std::abs(x.dot(inv2 * x)));
        min_inverse =
            std::min(min_inverse, x.dot((inv2 - inv1) * x) / std::max(s_inv, kEps));
    }

    ExperimentReport report;
    report.experiment = "loewner_heinz";
    report.params = {{"r", fmt(r)},
                     {"n_vectors", std::to_string(n_vectors)},
                     {"seed", std::to_string(seed)}};
    report.checks.push_back({"min_forward_form_rel", min_forward, -1e-9,
                             ">=", min_forward >= -1e-9});
    report.checks.push_back({"min_inverse_form_rel", min_inverse, -1e-9,
                             ">=", min_inverse >= -1e-9});
    return report;
}

// --- norm_equivalence_survey ------------------------------------------------

namespace {

struct RatioScan {
    double worst = 1.0;   // max of ratio and its reciprocal
    double violation = 0.0; // worst relative sandwich violation
};

RatioScan scan_norms(const std::vector<EigenSystem>& eigs,
                     const EigenSystem& eig_lo, const EigenSystem& eig_hi,
                     const Eigen::VectorXi& freq, double r, int n_vectors,
                     Rng& rng) {
    RatioScan scan;
    const int dim = eig_lo.dim();
    for (const EigenSystem& eig : eigs) {
        for (int k = 0; k < n_vectors; ++k) {
            BoundaryVector f{random_coeffs(rng, dim)};
            const double n_sigma = sigma_norm(f, r, eig);
            const double n_lo = sigma_norm(f, r, eig_lo);
            const double n_hi = sigma_norm(f, r, eig_hi);
            // r <= 0: ||f||_{r, hi} <= ||f||_{r, sigma} <= ||f||_{r, lo};
            // reversed for r >= 0
            const double lower = r <= 0.0 ? n_hi : n_lo;
            const double upper = r <= 0.0 ? n_lo : n_hi;
            const double scale = std::max({lower, upper, kEps});
            scan.violation = std::max(scan.violation,
                                      std::max(lower - n_sigma, n_sigma - upper) /
                                          scale);
            const double fourier = fourier_norm(f.coeffs, freq, r);
            const double rho = n_sigma / fourier;
            scan.worst = std::max({scan.worst, rho, 1.0 / rho});
        }
    }
    return scan;
}

} // namespace

ExperimentReport norm_equivalence_survey(const DiskMesh& mesh,
                                         const BoundaryBasis& basis,
                                         const ConductivityEnsemble& ensemble,
                                         double r, int n_vectors) {
    const int n = basis.max_frequency();
    const BoundaryBasis doubled(mesh, 2 * n);
    const EnsembleSpec& spec = ensemble.spec();

    const NDMatrix nd_lo =
        nd_matrix(mesh, ConductivityField::constant(mesh, spec.lo), doubled);
    const NDMatrix nd_hi =
        nd_matrix(mesh, ConductivityField::constant(mesh, spec.hi), doubled);
    const EigenSystem full_lo = eigensystem(nd_lo);
    const EigenSystem full_hi = eigensystem(nd_hi);

    std::vector<EigenSystem> full_eigs;
    std::vector<NDMatrix> full_nds;
    for (const ConductivityField& sigma : ensemble.generate(mesh)) {
        full_nds.push_back(nd_matrix(mesh, sigma, doubled));
        full_eigs.push_back(eigensystem(full_nds.back()));
    }

    // leading blocks reproduce the order-n survey exactly
    const auto block_eigs = [&](int order) {
        std::vector<EigenSystem> eigs;
        for (const NDMatrix& nd : full_nds)
            eigs.push_back(eigensystem(nd_leading_block(nd, order)));
        return eigs;
    };

    ExperimentReport report;
    report.experiment = "norm_equivalence";
    report.params = {{"r", fmt(r)},
                     {"n", std::to_string(n)},
                     {"count", std::to_string(spec.count)},
                     {"lo", fmt(spec.lo)},
                     {"hi", fmt(spec.hi)},
                     {"seed", std::to_string(spec.seed)}};

    Rng rng_a(spec.seed ^ 0x5eedULL);
    const std::vector<EigenSystem> eigs_n = block_eigs(n);
    const EigenSystem lo_n = eigensystem(nd_leading_block(nd_lo, n));
    const EigenSystem hi_n = eigensystem(nd_leading_block(nd_hi, n));
    const RatioScan at_n = scan_norms(eigs_n, lo_n, hi_n,
                                      basis.frequencies(), r, n_vectors, rng_a);

    Rng rng_b(spec.seed ^ 0xd0b1eULL);
    const RatioScan at_2n = scan_norms(full_eigs, full_lo, full_hi,
                                       doubled.frequencies(), r, n_vectors, rng_b);

    // resampled ensemble at the original order
    EnsembleSpec respec = spec;
    respec.seed = spec.seed + 1;
    std::vector<EigenSystem> re_eigs;
    for (const ConductivityField& sigma :
         ConductivityEnsemble(respec).generate(mesh))
        re_eigs.push_back(
            eigensystem(nd_leading_block(nd_matrix(mesh, sigma, doubled), n)));
    Rng rng_c(spec.seed ^ 0x7e5a317eULL);
    const RatioScan resampled = scan_norms(re_eigs, lo_n, hi_n,
                                           basis.frequencies(), r, n_vectors,
                                           rng_c);

    const double drift_n = std::abs(at_2n.worst - at_n.worst) / at_n.worst;
    const double drift_re = std::abs(resampled.worst - at_n.worst) / at_n.worst;
    const double violation = std::max(at_n.violation, at_2n.violation);

    report.checks.push_back(
        {"sandwich_violation_rel", violation, 1e-9, "<=", violation <= 1e-9});
    report.checks.push_back({"ratio_drift_doubling", drift_n, 0.1, "<=",
                             drift_n <= 0.1});
    report.checks.push_back({"ratio_drift_resample", drift_re, 0.1, "<=",
                             drift_re <= 0.1});
    report.scalars.emplace_back("worst_ratio_n", at_n.worst);
    report.scalars.emplace_back("worst_ratio_2n", at_2n.worst);
    report.scalars.emplace_back("worst_ratio_resampled", resampled.worst);
    return report;
}

// --- dl_lipschitz_check -----------------------------------------------------

ExperimentReport dl_lipschitz_check(const DiskMesh& mesh,
                                    const BoundaryBasis& basis, int n_pairs,
                                    std::uint64_t seed) {
    const int n = basis.max_frequency();
    const BoundaryBasis doubled(mesh, 2 * n);

    ExperimentReport report;
    report.experiment = "dl_lipschitz";
    report.params = {{"n", std::to_string(n)},
                     {"n_pairs", std::to_string(n_pairs)},
                     {"seed", std::to_string(seed)}};

    Curve curve_n{"ratio_n", "pair", "ratio", {}};
    Curve curve_2n{"ratio_2n", "pair", "ratio", {}};
    double max_n = 0.0, max_2n = 0.0;
    for (int i = 0; i < n_pairs; ++i) {
        Rng rng(seed + 7919ull * static_cast<std::uint64_t>(i));
        ConductivityField k1 = sample_smooth(mesh, rng, 0.5, 2.0);
        ConductivityField k2 = sample_smooth(mesh, rng, 0.5, 2.0);
        k1.values = k1.values.array().log();
        k1.is_log = true;
        k2.values = k2.values.array().log();
        k2.is_log = true;
        const ConductivityField eta = sample_direction(mesh, rng, 1.0, i);

        const ConductivityField s1 = k1.exp_field();
        const ConductivityField s2 = k2.exp_field();
        ForwardCache c1(mesh, doubled, s1);
        ForwardCache c2(mesh, doubled, s2);
        const Eigen::MatrixXd d1 =
            dlambda(c1, ConductivityField{eta.values.cwiseProduct(s1.values),
                                          false})
                .matrix;
        const Eigen::MatrixXd d2 =
            dlambda(c2, ConductivityField{eta.values.cwiseProduct(s2.values),
                                          false})
                .matrix;
        const double denom =
            eta.sup_norm() * (s2.values - s1.values).cwiseAbs().maxCoeff();

        const auto ratio_at = [&](int order) {
            const EigenSystem e1 =
                eigensystem(nd_leading_block(c1.nd(), order));
            const EigenSystem e2 =
                eigensystem(nd_leading_block(c2.nd(), order));
            const int dim = 2 * order;
            const Eigen::MatrixXd dl1 =
                df_spectral_from_parts(e1, d1.topLeftCorner(dim, dim), 0.0).matrix;
            const Eigen::MatrixXd dl2 =
                df_spectral_from_parts(e2, d2.topLeftCorner(dim, dim), 0.0).matrix;
            return spectral_norm(dl2 - dl1, e1.frequencies) / denom;
        };
        const double rn = ratio_at(n);
        const double r2n = ratio_at(2 * n);
        curve_n.points.push_back({static_cast<double>(i), rn});
        curve_2n.points.push_back({static_cast<double>(i), r2n});
        max_n = std::max(max_n, rn);
        max_2n = std::max(max_2n, r2n);
    }
    report.curves.push_back(curve_n);
    report.curves.push_back(curve_2n);

    const double drift = std::abs(max_2n - max_n) / max_n;
    report.checks.push_back({"max_ratio_drift", drift, 0.1, "<=", drift <= 0.1});
    report.scalars.emplace_back("max_ratio_n", max_n);
    report.scalars.emplace_back("max_ratio_2n", max_2n);
    return report;
}

// --- neumann_series_check ---------------------------------------------------

ExperimentReport neumann_series_check(const DiskMesh& mesh,
                                      const BoundaryBasis& basis,
                                      const ConductivityField& sigma,
                                      const ConductivityField& eta,
                                      std::uint64_t seed) {
    ForwardCache cache(mesh, basis, sigma);
    const FemSystem& fem = cache.fem();

    // power iteration for the energy-norm contraction of the perturbation
    Rng rng(seed);
    Eigen::VectorXd v(mesh.n_nodes());
    for (int i = 0; i < v.size(); ++i) v[i] = rng.uniform(-1.0, 1.0);
    double rho = 0.0;
    for (int it = 0; it < 40; ++it) {
        const Eigen::VectorXd w = fem.solve(fem.perturbation_load(eta, v));
        const double num = fem.energy(w, w), den = fem.energy(v, v);
        rho = std::sqrt(num / den);
        if (num == 0.0) break; // vanishing direction
        v = w / std::sqrt(num);
    }
    if (rho >= 1.0)
        throw ContractionError("neumann_series_check: estimated contraction " +
                               fmt(rho) + " is not < 1");

    ConductivityField perturbed = sigma + eta;
    if (!perturbed.admissible())
        throw ContractionError("neumann_series_check: sigma + eta inadmissible");
    const NDMatrix target = nd_matrix(mesh, perturbed, basis);

    ExperimentReport report;
    report.experiment = "neumann_series";
    report.params = {{"seed", std::to_string(seed)}};

    Curve rem{"remainder", "order", "remainder_norm", {}};
    Eigen::MatrixXd partial = cache.nd().matrix;
    std::vector<double> remainders;
    double factorial = 1.0;
    std::vector<ConductivityField> dirs;
    for (int k = 0; k <= 3; ++k) {
        if (k > 0) {
            dirs.push_back(eta);
            factorial *= k;
            partial += dk_lambda(cache, dirs).matrix / factorial;
        }
        const double r = spectral_norm(target.matrix - partial,
                                       target.frequencies);
        remainders.push_back(r);
        rem.points.push_back({static_cast<double>(k), r});
    }
    report.curves.push_back(rem);

    const double floor = 1e-13 * spectral_norm(target.matrix, target.frequencies);
    if (remainders[0] <= floor) {
        // zeroth partial sum already exact
        report.checks.push_back(
            {"zeroth_sum_exact", remainders[0], floor, "<=", true});
        report.scalars.emplace_back("estimated_contraction", rho);
        report.scalars.emplace_back("measured_ratio", 0.0);
        return report;
    }

    bool monotone = true;
    for (size_t k = 1; k < remainders.size(); ++k)
        if (remainders[k] >= remainders[k - 1]) monotone = false;
    const double measured =
        std::pow(remainders[3] / remainders[0], 1.0 / 3.0);
    const double rel_dev = std::abs(measured - rho) / rho;

    report.checks.push_back({"remainder_monotone", monotone ? 1.0 : 0.0, 1.0,
                             ">=", monotone});
    report.checks.push_back(
        {"contraction_ratio_rel_dev", rel_dev, 0.25, "<=", rel_dev <= 0.25});
    report.scalars.emplace_back("estimated_contraction", rho);
    report.scalars.emplace_back("measured_ratio", measured);
    return report;
}

// --- linearization_error_compare --------------------------------------------

ExperimentReport linearization_error_compare(
    const DiskMesh& mesh, const BoundaryBasis& basis,
    const ConductivityField& kappa0, const LinearizationOptions& options) {
    const ConductivityField sigma0 = kappa0.exp_field();
    ForwardCache cache(mesh, basis, sigma0);
    const Eigen::MatrixXd l0 =
        apply_spectral_function(cache.eig(), SpectralFunctionSpec::log()).matrix;

    const auto signed_norm = [&](const Eigen::MatrixXd& m) {
        SobolevOperator op;
        op.matrix = m;
        op.frequencies = cache.nd().frequencies;
        return sobolev_operator_norm(op, -0.5, 0.5);
    };

    ExperimentReport report;
    report.experiment = "linearization_compare";
    report.params = {{"count", std::to_string(options.count)},
                     {"contrast", fmt(options.contrast)},
                     {"seed", std::to_string(options.seed)},
                     {"step_scale", fmt(options.step_scale)}};

    Curve curve_std{"rel_err_lambda", "sample", "rel_err", {}};
    Curve curve_log{"rel_err_L", "sample", "rel_err", {}};
    std::vector<double> errs_std, errs_log;
    for (int i = 0; i < options.count; ++i) {
        Rng rng(options.seed + 104729ull * static_cast<std::uint64_t>(i));
        const double cx = rng.uniform(-0.6, 0.6), cy = rng.uniform(-0.6, 0.6);
        const double radius = rng.uniform(0.15, 0.4);
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const double level = sign * options.step_scale * std::log(options.contrast);
        ConductivityField h =
            ConductivityField::from_function(mesh, [&](double x, double y) {
                const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                return d2 < radius * radius ? level : 0.0;
            });
        h.is_log = true;

        ConductivityField kappa1 = kappa0;
        kappa1.values += h.values;
        const ConductivityField sigma1 = kappa1.exp_field();
        const NDMatrix nd1 = nd_matrix(mesh, sigma1, basis);

        // standard parametrization: perturbation in the conductivity domain
        const ConductivityField h_sigma{sigma1.values - sigma0.values, false};
        const Eigen::MatrixXd dlam = dlambda(cache, h_sigma).matrix;
        const Eigen::MatrixXd lam_diff = nd1.matrix - cache.nd().matrix;
        const double rel_std =
            signed_norm(lam_diff - dlam) / signed_norm(lam_diff);

        // fully logarithmic parametrization
        const Eigen::MatrixXd l1 =
            apply_spectral_function(eigensystem(nd1), SpectralFunctionSpec::log())
                .matrix;
        const Eigen::MatrixXd dl = dl_map(cache, h).matrix;
        const Eigen::MatrixXd l_diff = l1 - l0;
        const double rel_log = spectral_norm(l_diff - dl, nd1.frequencies) /
                               spectral_norm(l_diff, nd1.frequencies);

        errs_std.push_back(rel_std);
        errs_log.push_back(rel_log);
        curve_std.points.push_back({static_cast<double>(i), rel_std});
        curve_log.points.push_back({static_cast<double>(i), rel_log});
    }
    report.curves.push_back(curve_std);
    report.curves.push_back(curve_log);

    const double med_std = median(errs_std);
    const double med_log = median(errs_log);
    report.scalars.emplace_back("median_rel_err_lambda", med_std);
    report.scalars.emplace_back("median_rel_err_L", med_log);
    report.scalars.emplace_back("median_ratio", med_log / med_std);
    report.checks.push_back({"log_map_less_nonlinear", med_log, med_std, "<",
                             med_log < med_std});
    return report;
}

} // namespace eitlog
