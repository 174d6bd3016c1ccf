#ifndef EITLOG_EXPERIMENTS_HPP
#define EITLOG_EXPERIMENTS_HPP

#include "eitlog/basis.hpp"
#include "eitlog/calculus.hpp"
#include "eitlog/conductivity.hpp"
#include "eitlog/derivatives.hpp"
#include "eitlog/ensemble.hpp"
#include "eitlog/forward.hpp"
#include "eitlog/mesh.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace eitlog {

enum class FitSpace { LogLog, LinLog };

struct SlopeFit {
    std::string name;
    std::string curve;   // curve the fit belongs to, for plot emission
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0; // rms of the least-squares fit residuals
    double lo = 0.0;       // accepted slope band
    double hi = 0.0;
    bool pass = false;
    FitSpace space = FitSpace::LogLog;
};

struct CheckItem {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string relation; // "<=", ">=", documented in the report
    bool pass = false;
};

struct Curve {
    std::string name;
    std::string x_label;
    std::string y_label;
    std::vector<std::array<double, 2>> points;
};

/// Result of one experiment: measured quantities, fitted slopes with their
/// residuals, and pass/fail gates with the thresholds they used. The
/// runtime is console-only; serialized artifacts stay deterministic.
struct ExperimentReport {
    std::string experiment;
    std::vector<std::pair<std::string, std::string>> params;
    std::vector<Curve> curves;
    std::vector<SlopeFit> slopes;
    std::vector<CheckItem> checks;
    std::vector<std::pair<std::string, double>> scalars;
    double runtime_seconds = 0.0;

    bool passed() const;
    const Curve& curve(const std::string& name) const;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
};

/// Least squares line through (x, y); residual is the rms misfit.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Per-epsilon tau window inside [lambda_min, lambda_max], placed where
/// the finite spectrum resolves the rate (see tau_rate_experiment).
std::vector<double> default_tau_grid(const EigenSystem& eig, double eps,
                                     int n_points = 8);

// --- experiments -----------------------------------------------------------

enum class FdMapKind { Lambda, ShiftedLog, FullyLog };

struct FdCheckOptions {
    std::vector<double> steps = {0.08, 0.04, 0.02, 0.01};
    bool fit_slope = true;        // false: assert the error floor instead
    double exact_tolerance = 1e-8; // used when fit_slope is false
    double slope_lo = 1.8;
    double slope_hi = 2.2;
};

/// Central-difference consistency of one derivative map along one
/// direction. For FullyLog the base point is the log-conductivity.
ExperimentReport fd_check(const DiskMesh& mesh, const BoundaryBasis& basis,
                          FdMapKind map, double tau,
                          const ConductivityField& base,
                          const ConductivityField& direction,
                          const FdCheckOptions& options = {});

struct TauRateOptions {
    std::vector<double> tau_grid; // empty: default_tau_grid rule
    double slope_margin_lo = 0.1; // band [2e - lo, 2e + hi]
    double slope_margin_hi = 0.15;
};

/// Convergence of the shifted logarithm and of its derivative as the
/// shift vanishes, measured in the (eps, -eps) operator norm.
ExperimentReport tau_rate_experiment(const DiskMesh& mesh,
                                     const BoundaryBasis& basis,
                                     const ConductivityField& sigma, double eps,
                                     const ConductivityField& direction,
                                     const TauRateOptions& options = {});

/// Boundedness of log-map differences across basis sizes against the
/// log N growth of a single logarithm. kappa1/kappa2 are log-conductivities.
ExperimentReport relative_boundedness_experiment(
    const DiskMesh& mesh, const ConductivityField& kappa1,
    const ConductivityField& kappa2, const std::vector<int>& n_grid);

/// Quadratic-form ordering of the boundary matrices of an ordered pair.
ExperimentReport monotonicity_check(const DiskMesh& mesh,
                                    const BoundaryBasis& basis,
                                    const ConductivityField& sigma1,
                                    const ConductivityField& sigma2,
                                    int n_vectors, std::uint64_t seed);

/// Both fractional-power orderings (forward for powers in [0,1] and the
/// inverse estimate for the negative powers) on an ordered pair.
ExperimentReport loewner_heinz_check(const DiskMesh& mesh,
                                     const BoundaryBasis& basis,
                                     const ConductivityField& sigma1,
                                     const ConductivityField& sigma2, double r,
                                     int n_vectors, std::uint64_t seed);

/// Sandwich inequalities of the sigma-dependent norms between the bound
/// conductivities, plus stability of the worst Fourier-equivalence ratio
/// under basis doubling.
ExperimentReport norm_equivalence_survey(const DiskMesh& mesh,
                                         const BoundaryBasis& basis,
                                         const ConductivityEnsemble& ensemble,
                                         double r, int n_vectors);

/// Stability of the Lipschitz ratio of the log-map derivative under basis
/// doubling, over an ensemble of log-conductivity pairs.
ExperimentReport dl_lipschitz_check(const DiskMesh& mesh,
                                    const BoundaryBasis& basis, int n_pairs,
                                    std::uint64_t seed);

/// Geometric decay of the forward-map Taylor remainder through order 3
/// against a power-iteration estimate of the perturbation contraction.
ExperimentReport neumann_series_check(const DiskMesh& mesh,
                                      const BoundaryBasis& basis,
                                      const ConductivityField& sigma,
                                      const ConductivityField& eta,
                                      std::uint64_t seed);

struct LinearizationOptions {
    int count = 100;
    double contrast = 2.0;
    std::uint64_t seed = 1;
    double step_scale = 1.0; // scales every perturbation
};

/// Relative linearization errors of the standard and fully logarithmic
/// parametrizations over an inclusion ensemble; reports the medians.
ExperimentReport linearization_error_compare(const DiskMesh& mesh,
                                             const BoundaryBasis& basis,
                                             const ConductivityField& kappa0,
                                             const LinearizationOptions& options);

} // namespace eitlog

#endif
