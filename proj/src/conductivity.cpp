#include "eitlog/conductivity.hpp"

#include <cassert>

namespace eitlog {

ConductivityField ConductivityField::exp_field() const {
    return ConductivityField{values.array().exp().matrix(), false};
}

ConductivityField ConductivityField::constant(const DiskMesh& mesh, double value,
                                              bool is_log) {
    return ConductivityField{
        Eigen::VectorXd::Constant(mesh.n_triangles(), value), is_log};
}

ConductivityField ConductivityField::from_function(
    const DiskMesh& mesh, const std::function<double(double, double)>& f,
    bool is_log) {
    Eigen::VectorXd v(mesh.n_triangles());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const Eigen::Vector2d c = mesh.centroid(t);
        v[t] = f(c.x(), c.y());
    }
    return ConductivityField{std::move(v), is_log};
}

ConductivityField operator+(const ConductivityField& a,
                            const ConductivityField& b) {
    assert(a.size() == b.size());
    return ConductivityField{a.values + b.values, a.is_log};
}

ConductivityField operator-(const ConductivityField& a,
                            const ConductivityField& b) {
    assert(a.size() == b.size());
    return ConductivityField{a.values - b.values, a.is_log};
}

ConductivityField operator*(double s, const ConductivityField& a) {
    return ConductivityField{s * a.values, a.is_log};
}

bool pointwise_leq(const ConductivityField& a, const ConductivityField& b) {
    return a.size() == b.size() && (a.values.array() <= b.values.array()).all();
}

} // namespace eitlog
