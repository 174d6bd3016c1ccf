#ifndef EITLOG_CONDUCTIVITY_HPP
#define EITLOG_CONDUCTIVITY_HPP

#include "eitlog/mesh.hpp"

#include <Eigen/Dense>
#include <functional>

namespace eitlog {

/// Piecewise-constant field over mesh triangles. Holds conductivities,
/// log-conductivities, and perturbation directions alike; only admissible
/// conductivities (min > 0) may drive the forward solver.
struct ConductivityField {
    Eigen::VectorXd values; // one per triangle
    bool is_log = false;

    int size() const { return static_cast<int>(values.size()); }
    double min() const { return values.minCoeff(); }
    double max() const { return values.maxCoeff(); }
    double sup_norm() const { return values.cwiseAbs().maxCoeff(); }
    bool admissible() const { return values.size() > 0 && min() > 0.0; }

    /// e^kappa, triangle-wise.
    ConductivityField exp_field() const;

    static ConductivityField constant(const DiskMesh& mesh, double value,
                                      bool is_log = false);
    /// Evaluates f at triangle centroids.
    static ConductivityField from_function(
        const DiskMesh& mesh, const std::function<double(double, double)>& f,
        bool is_log = false);
};

ConductivityField operator+(const ConductivityField& a,
                            const ConductivityField& b);
ConductivityField operator-(const ConductivityField& a,
                            const ConductivityField& b);
ConductivityField operator*(double s, const ConductivityField& a);

/// Pointwise a <= b on every triangle.
bool pointwise_leq(const ConductivityField& a, const ConductivityField& b);

} // namespace eitlog

#endif
