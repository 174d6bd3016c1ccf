#include "eitlog/forward.hpp"

#include "eitlog/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace eitlog {

P1Geometry P1Geometry::build(const DiskMesh& mesh) {
    const int n_tri = mesh.n_triangles();
    P1Geometry geom;
    geom.area.resize(n_tri);
    geom.local_grad.resize(n_tri, 6);
    std::vector<Eigen::Triplet<double>> tx, ty;
    tx.reserve(static_cast<size_t>(n_tri) * 3);
    ty.reserve(static_cast<size_t>(n_tri) * 3);
    for (int t = 0; t < n_tri; ++t) {
        const auto tri = mesh.triangles.row(t);
        const Eigen::Vector2d p0 = mesh.nodes.row(tri[0]);
        const Eigen::Vector2d p1 = mesh.nodes.row(tri[1]);
        const Eigen::Vector2d p2 = mesh.nodes.row(tri[2]);
        const double two_a = (p1.x() - p0.x()) * (p2.y() - p0.y()) -
                             (p2.x() - p0.x()) * (p1.y() - p0.y());
        geom.area[t] = 0.5 * two_a;
        // grad(phi_i) = rot(p_{i+1} - p_{i+2}) / (2A), rot(v) = (v_y, -v_x)
        const Eigen::Vector2d e0 = p1 - p2, e1 = p2 - p0, e2 = p0 - p1;
        geom.local_grad.row(t) << e0.y() / two_a, e1.y() / two_a, e2.y() / two_a,
            -e0.x() / two_a, -e1.x() / two_a, -e2.x() / two_a;
        for (int i = 0; i < 3; ++i) {
            tx.emplace_back(t, tri[i], geom.local_grad(t, i));
            ty.emplace_back(t, tri[i], geom.local_grad(t, 3 + i));
        }
    }
    geom.grad_x.resize(n_tri, mesh.n_nodes());
    geom.grad_y.resize(n_tri, mesh.n_nodes());
    geom.grad_x.setFromTriplets(tx.begin(), tx.end());
    geom.grad_y.setFromTriplets(ty.begin(), ty.end());
    return geom;
}

double field_bilinear(const P1Geometry& geom, const ConductivityField& c,
                      const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    const Eigen::VectorXd w = c.values.cwiseProduct(geom.area);
    const Eigen::VectorXd ux = geom.grad_x * u, uy = geom.grad_y * u;
    const Eigen::VectorXd vx = geom.grad_x * v, vy = geom.grad_y * v;
    return w.dot(ux.cwiseProduct(vx)) + w.dot(uy.cwiseProduct(vy));
}

FemSystem::FemSystem(const DiskMesh& mesh, const BoundaryBasis& basis,
                     ConductivityField sigma)
    : mesh_(&mesh), basis_(&basis), sigma_(std::move(sigma)),
      geom_(P1Geometry::build(mesh)) {
    if (!sigma_.admissible())
        throw SingularSystemError("FemSystem: conductivity not bounded away from zero");
    if (sigma_.size() != mesh.n_triangles())
        throw std::invalid_argument("FemSystem: field size does not match mesh");

    const int n = mesh.n_nodes();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(mesh.n_triangles()) * 9 +
                 basis.boundary_nodes().size() * 2 + 1);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto tri = mesh.triangles.row(t);
        const double w = sigma_.values[t] * geom_.area[t];
        const auto g = geom_.local_grad.row(t);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trip.emplace_back(tri[i], tri[j],
                                  w * (g[i] * g[j] + g[3 + i] * g[3 + j]));
    }
    // gauge row/column: boundary quadrature mean of the trace is zero
    const auto& bn = basis.boundary_nodes();
    const auto& bw = basis.quad_weights();
    for (size_t j = 0; j < bn.size(); ++j) {
        trip.emplace_back(n, bn[j], bw[static_cast<int>(j)]);
        trip.emplace_back(bn[j], n, bw[static_cast<int>(j)]);
    }
    bordered_.resize(n + 1, n + 1);
    bordered_.setFromTriplets(trip.begin(), trip.end());
    bordered_.makeCompressed();

    lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->compute(bordered_);
    if (lu_->info() != Eigen::Success)
        throw SingularSystemError("FemSystem: factorization failed");
}

Eigen::VectorXd FemSystem::solve(const Eigen::VectorXd& load) const {
    const int n = mesh_->n_nodes();
    Eigen::VectorXd rhs(n + 1);
    rhs.head(n) = load;
    rhs[n] = 0.0;
    Eigen::VectorXd x = lu_->solve(rhs);
    if (lu_->info() != Eigen::Success)
        throw SingularSystemError("FemSystem: solve failed");
    const double rhs_norm = rhs.norm();
    if (rhs_norm > 0.0) {
        const double residual = (bordered_ * x - rhs).norm() / rhs_norm;
        if (residual > 1e-10)
            throw SingularSystemError("FemSystem: relative residual " +
                                      std::to_string(residual));
    }
    return x.head(n);
}

Eigen::VectorXd FemSystem::neumann_load(const BoundaryVector& f) const {
    Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh_->n_nodes());
    const Eigen::VectorXd nodal = basis_->reconstruct(f);
    const auto& bn = basis_->boundary_nodes();
    const auto& bw = basis_->quad_weights();
    for (size_t j = 0; j < bn.size(); ++j)
        load[bn[j]] = bw[static_cast<int>(j)] * nodal[static_cast<int>(j)];
    return load;
}

Eigen::VectorXd FemSystem::perturbation_load(const ConductivityField& eta,
                                             const Eigen::VectorXd& u) const {
    const Eigen::VectorXd w = eta.values.cwiseProduct(geom_.area);
    return -(geom_.grad_x.transpose() * w.cwiseProduct(geom_.grad_x * u) +
             geom_.grad_y.transpose() * w.cwiseProduct(geom_.grad_y * u));
}

double FemSystem::energy(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    return field_bilinear(geom_, sigma_, u, v);
}

namespace {

InteriorSolution make_solution(const FemSystem& fem, Eigen::VectorXd nodal) {
    const auto& basis = fem.basis();
    const auto& bn = basis.boundary_nodes();
    Eigen::VectorXd bvals(static_cast<int>(bn.size()));
    for (size_t j = 0; j < bn.size(); ++j)
        bvals[static_cast<int>(j)] = nodal[bn[j]];
    return InteriorSolution{std::move(nodal), basis.project_mean_free(bvals)};
}

} // namespace

InteriorSolution solve_neumann(const FemSystem& fem, const BoundaryVector& f) {
    return make_solution(fem, fem.solve(fem.neumann_load(f)));
}

InteriorSolution apply_perturbation(const FemSystem& fem,
                                    const ConductivityField& eta,
                                    const InteriorSolution& u) {
    return make_solution(fem, fem.solve(fem.perturbation_load(eta, u.nodal)));
}

NDMatrix nd_matrix(const FemSystem& fem, Eigen::MatrixXd* solutions_out,
                   double* raw_asymmetry_out) {
    const auto& basis = fem.basis();
    const int dim = basis.dim();
    const auto& bn = basis.boundary_nodes();
    const int n_b = static_cast<int>(bn.size());

    Eigen::MatrixXd traces(n_b, dim);
    Eigen::MatrixXd solutions(fem.mesh().n_nodes(), dim);
    for (int k = 0; k < dim; ++k) {
        BoundaryVector f{Eigen::VectorXd::Unit(dim, k)};
        Eigen::VectorXd u = fem.solve(fem.neumann_load(f));
        for (int j = 0; j < n_b; ++j) traces(j, k) = u[bn[static_cast<size_t>(j)]];
        solutions.col(k) = std::move(u);
    }

    // A_{jk} = boundary quadrature of trace(u_k) against f_j
    Eigen::MatrixXd raw = basis.nodal_values().transpose() *
                          (basis.quad_weights().asDiagonal() * traces);
    if (raw_asymmetry_out) *raw_asymmetry_out = (raw - raw.transpose()).norm();

    NDMatrix nd;
    nd.matrix = 0.5 * (raw + raw.transpose());
    nd.frequencies = basis.frequencies();
    nd.sigma_hash = field_hash(fem.sigma());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(nd.matrix,
                                                      Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw DefinitenessError("nd_matrix: symmetrized matrix is not positive definite");

    if (solutions_out) *solutions_out = std::move(solutions);
    return nd;
}

NDMatrix nd_matrix(const DiskMesh& mesh, const ConductivityField& sigma,
                   const BoundaryBasis& basis) {
    FemSystem fem(mesh, basis, sigma);
    return nd_matrix(fem);
}

NDMatrix analytic_nd_constant(double sigma0, const BoundaryBasis& basis) {
    if (sigma0 <= 0.0)
        throw std::invalid_argument("analytic_nd_constant: sigma0 must be positive");
    NDMatrix nd;
    nd.frequencies = basis.frequencies();
    nd.matrix = Eigen::MatrixXd::Zero(basis.dim(), basis.dim());
    for (int i = 0; i < basis.dim(); ++i)
        nd.matrix(i, i) = 1.0 / (sigma0 * nd.frequencies[i]);
    ConductivityField c{Eigen::VectorXd::Constant(1, sigma0), false};
    nd.sigma_hash = field_hash(c);
    return nd;
}

NDMatrix nd_leading_block(const NDMatrix& nd, int max_frequency) {
    const int dim = 2 * max_frequency;
    if (dim > nd.dim())
        throw std::invalid_argument("nd_leading_block: block larger than source");
    NDMatrix out;
    out.matrix = nd.matrix.topLeftCorner(dim, dim);
    out.frequencies = nd.frequencies.head(dim);
    out.sigma_hash = nd.sigma_hash;
    return out;
}

std::uint64_t field_hash(const ConductivityField& sigma) {
    // FNV-1a over the raw value bytes
    std::uint64_t h = 0xcbf29ce484222325ull;
    const auto* bytes = reinterpret_cast<const unsigned char*>(sigma.values.data());
    const size_t n = sizeof(double) * static_cast<size_t>(sigma.values.size());
    for (size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

void save_nd_matrix(const NDMatrix& nd, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IOError("save_nd_matrix: cannot open " + path.string());
    out.precision(17);
    std::ostringstream hash;
    hash << std::hex << nd.sigma_hash;
    out << "# ndmatrix N=" << nd.dim() / 2 << " sigma_hash=" << hash.str() << '\n';
    for (int i = 0; i < nd.dim(); ++i) {
        for (int j = 0; j < nd.dim(); ++j) {
            if (j) out << ',';
            out << nd.matrix(i, j);
        }
        out << '\n';
    }
    if (!out) throw IOError("save_nd_matrix: write failed");
}

NDMatrix load_nd_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IOError("load_nd_matrix: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IOError("load_nd_matrix: empty file");
    NDMatrix nd;
    int order = 0;
    {
        std::istringstream hs(line);
        std::string tok;
        while (hs >> tok) {
            if (tok.rfind("N=", 0) == 0) order = std::stoi(tok.substr(2));
            else if (tok.rfind("sigma_hash=", 0) == 0)
                nd.sigma_hash = std::stoull(tok.substr(11), nullptr, 16);
        }
    }
    if (order <= 0) throw IOError("load_nd_matrix: bad header");
    const int dim = 2 * order;
    nd.matrix.resize(dim, dim);
    nd.frequencies.resize(dim);
    for (int i = 0; i < dim; ++i) nd.frequencies[i] = i / 2 + 1;
    for (int i = 0; i < dim; ++i) {
        if (!std::getline(in, line)) throw IOError("load_nd_matrix: truncated");
        std::istringstream rs(line);
        std::string cell;
        for (int j = 0; j < dim; ++j) {
            if (!std::getline(rs, cell, ',')) throw IOError("load_nd_matrix: short row");
            nd.matrix(i, j) = std::stod(cell);
        }
    }
    return nd;
}

} // namespace eitlog
