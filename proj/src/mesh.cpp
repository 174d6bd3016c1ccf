#include "eitlog/mesh.hpp"

#include "eitlog/errors.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace eitlog {

namespace {

double signed_area(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                   const Eigen::Vector2d& c) {
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) -
                  (c.x() - a.x()) * (b.y() - a.y()));
}

} // namespace

double DiskMesh::triangle_area(int t) const {
    const auto tri = triangles.row(t);
    return signed_area(nodes.row(tri[0]), nodes.row(tri[1]), nodes.row(tri[2]));
}

Eigen::Vector2d DiskMesh::centroid(int t) const {
    const auto tri = triangles.row(t);
    return (nodes.row(tri[0]) + nodes.row(tri[1]) + nodes.row(tri[2])) / 3.0;
}

double DiskMesh::max_edge_length() const {
    double h = 0.0;
    for (int t = 0; t < n_triangles(); ++t) {
        const auto tri = triangles.row(t);
        for (int e = 0; e < 3; ++e) {
            const Eigen::Vector2d d =
                nodes.row(tri[e]) - nodes.row(tri[(e + 1) % 3]);
            h = std::max(h, d.norm());
        }
    }
    return h;
}

double DiskMesh::total_area() const {
    double a = 0.0;
    for (int t = 0; t < n_triangles(); ++t) a += triangle_area(t);
    return a;
}

double DiskMesh::boundary_angle(int j) const {
    const auto p = nodes.row(boundary_nodes[static_cast<size_t>(j)]);
    return std::atan2(p[1], p[0]);
}

DiskMesh build_disk_mesh(int refinement_level) {
    if (refinement_level < 0 || refinement_level > kMaxRefinementLevel)
        throw std::invalid_argument("build_disk_mesh: refinement_level out of [0, " +
                                    std::to_string(kMaxRefinementLevel) + "]");

    const int rings = kBaseRings << refinement_level;
    const double two_pi = 2.0 * std::numbers::pi;

    DiskMesh mesh;
    mesh.refinement_level = refinement_level;

    int n_nodes = 1;
    for (int i = 1; i <= rings; ++i) n_nodes += 6 * i;
    mesh.nodes.resize(n_nodes, 2);
    mesh.nodes.row(0) << 0.0, 0.0;

    std::vector<int> ring_start(static_cast<size_t>(rings) + 1, 0);
    int idx = 1;
    for (int i = 1; i <= rings; ++i) {
        ring_start[static_cast<size_t>(i)] = idx;
        const double r = static_cast<double>(i) / rings;
        const int n = 6 * i;
        for (int j = 0; j < n; ++j) {
            const double theta = two_pi * j / n;
            mesh.nodes.row(idx++) << r * std::cos(theta), r * std::sin(theta);
        }
    }

    int n_tris = 6; // center fan
    for (int i = 1; i < rings; ++i) n_tris += 6 * i + 6 * (i + 1);
    mesh.triangles.resize(n_tris, 3);

    int t = 0;
    for (int j = 0; j < 6; ++j)
        mesh.triangles.row(t++) << 0, ring_start[1] + j, ring_start[1] + (j + 1) % 6;

    // Band between ring i and ring i+1: advance whichever side's next node
    // comes first in angle. Produces n_in + n_out CCW triangles per band.
    for (int i = 1; i < rings; ++i) {
        const int n_in = 6 * i;
        const int n_out = 6 * (i + 1);
        const int in0 = ring_start[static_cast<size_t>(i)];
        const int out0 = ring_start[static_cast<size_t>(i) + 1];
        int a = 0, b = 0;
        while (a < n_in || b < n_out) {
            const bool advance_inner =
                b == n_out ||
                (a < n_in && static_cast<double>(a + 1) * n_out <=
                                 static_cast<double>(b + 1) * n_in);
            if (advance_inner) {
                mesh.triangles.row(t++) << in0 + a % n_in, out0 + b % n_out,
                    in0 + (a + 1) % n_in;
                ++a;
            } else {
                mesh.triangles.row(t++) << in0 + a % n_in, out0 + b % n_out,
                    out0 + (b + 1) % n_out;
                ++b;
            }
        }
    }

    mesh.boundary_nodes.resize(static_cast<size_t>(6) * rings);
    for (int j = 0; j < 6 * rings; ++j)
        mesh.boundary_nodes[static_cast<size_t>(j)] =
            ring_start[static_cast<size_t>(rings)] + j;

    return mesh;
}

void save_mesh(const DiskMesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IOError("save_mesh: cannot open " + path.string());
    out.precision(17);
    out << "diskmesh v1 " << mesh.refinement_level << ' ' << mesh.n_nodes() << ' '
        << mesh.n_triangles() << '\n';
    for (int i = 0; i < mesh.n_nodes(); ++i)
        out << mesh.nodes(i, 0) << ' ' << mesh.nodes(i, 1) << '\n';
    for (int i = 0; i < mesh.n_triangles(); ++i)
        out << mesh.triangles(i, 0) << ' ' << mesh.triangles(i, 1) << ' '
            << mesh.triangles(i, 2) << '\n';
    out << mesh.n_boundary() << '\n';
    for (int b : mesh.boundary_nodes) out << b << '\n';
    if (!out) throw IOError("save_mesh: write failed for " + path.string());
}

DiskMesh load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IOError("load_mesh: cannot open " + path.string());
    std::string magic, version;
    DiskMesh mesh;
    int n_nodes = 0, n_tris = 0;
    in >> magic >> version >> mesh.refinement_level >> n_nodes >> n_tris;
    if (!in || magic != "diskmesh" || version != "v1")
        throw IOError("load_mesh: bad header in " + path.string());
    mesh.nodes.resize(n_nodes, 2);
    for (int i = 0; i < n_nodes; ++i) in >> mesh.nodes(i, 0) >> mesh.nodes(i, 1);
    mesh.triangles.resize(n_tris, 3);
    for (int i = 0; i < n_tris; ++i)
        in >> mesh.triangles(i, 0) >> mesh.triangles(i, 1) >> mesh.triangles(i, 2);
    int n_boundary = 0;
    in >> n_boundary;
    mesh.boundary_nodes.resize(static_cast<size_t>(n_boundary));
    for (int i = 0; i < n_boundary; ++i) in >> mesh.boundary_nodes[static_cast<size_t>(i)];
    if (!in) throw IOError("load_mesh: truncated file " + path.string());
    return mesh;
}

DiskMesh load_or_build_mesh(int refinement_level,
                            const std::filesystem::path& cache_dir) {
    std::ostringstream name;
    name << "diskmesh_level" << refinement_level << ".txt";
    const auto path = cache_dir / name.str();
    if (std::filesystem::exists(path)) return load_mesh(path);
    DiskMesh mesh = build_disk_mesh(refinement_level);
    std::filesystem::create_directories(cache_dir);
    save_mesh(mesh, path);
    return mesh;
}

} // namespace eitlog
