#include <doctest.h>

#include "eitlog/mesh.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace eitlog;

namespace {

// Exact area of the polygon spanned by n equispaced boundary nodes.
double inscribed_polygon_area(int n) {
    return 0.5 * n * std::sin(2.0 * std::numbers::pi / n);
}

} // namespace

TEST_CASE("disk mesh: boundary nodes sit on the unit circle") {
    for (int level : {0, 2}) {
        const DiskMesh mesh = build_disk_mesh(level);
        for (int b : mesh.boundary_nodes) {
            const double r = mesh.nodes.row(b).norm();
            CHECK(std::abs(r - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("disk mesh: all triangles positively oriented") {
    const DiskMesh mesh = build_disk_mesh(2);
    for (int t = 0; t < mesh.n_triangles(); ++t)
        CHECK(mesh.triangle_area(t) > 0.0);
}

TEST_CASE("disk mesh: boundary edges form one closed polygon") {
    const DiskMesh mesh = build_disk_mesh(1);
    const int n_b = mesh.n_boundary();
    CHECK(n_b == 6 * (kBaseRings << 1));
    // consecutive boundary nodes strictly increase in angle
    double prev = mesh.boundary_angle(0);
    for (int j = 1; j < n_b; ++j) {
        double a = mesh.boundary_angle(j);
        if (a < prev) a += 2.0 * std::numbers::pi;
        CHECK(a > prev);
        prev = a;
    }
}

TEST_CASE("disk mesh: edge length roughly halves per refinement") {
    double h_prev = build_disk_mesh(0).max_edge_length();
    for (int level = 1; level <= 3; ++level) {
        const double h = build_disk_mesh(level).max_edge_length();
        const double ratio = h / h_prev;
        CHECK(ratio > 0.4);
        CHECK(ratio < 0.6);
        h_prev = h;
    }
}

TEST_CASE("disk mesh: triangulation fills the boundary polygon exactly") {
    for (int level : {0, 1, 2}) {
        const DiskMesh mesh = build_disk_mesh(level);
        const double polygon = inscribed_polygon_area(mesh.n_boundary());
        CHECK(std::abs(mesh.total_area() - polygon) < 1e-12 * polygon);
        // pi - area ~ (2 pi^3 / 3) / n^2 for the inscribed n-gon
        const double deficit = std::numbers::pi - mesh.total_area();
        const double predicted = 2.0 * std::pow(std::numbers::pi, 3) / 3.0 /
                                 (static_cast<double>(mesh.n_boundary()) *
                                  mesh.n_boundary());
        CHECK(deficit / predicted > 0.9);
        CHECK(deficit / predicted < 1.1);
    }
}

TEST_CASE("disk mesh: deterministic for fixed level") {
    const DiskMesh a = build_disk_mesh(1);
    const DiskMesh b = build_disk_mesh(1);
    CHECK(a.nodes == b.nodes);
    CHECK(a.triangles == b.triangles);
}

TEST_CASE("disk mesh: cache file round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "eitlog_mesh_cache";
    std::filesystem::remove_all(dir);
    const DiskMesh fresh = load_or_build_mesh(1, dir);
    CHECK(std::filesystem::exists(dir / "diskmesh_level1.txt"));
    const DiskMesh cached = load_or_build_mesh(1, dir);
    CHECK(fresh.refinement_level == cached.refinement_level);
    CHECK(fresh.triangles == cached.triangles);
    CHECK((fresh.nodes - cached.nodes).cwiseAbs().maxCoeff() == 0.0);
    CHECK(fresh.boundary_nodes == cached.boundary_nodes);
    std::filesystem::remove_all(dir);
}

TEST_CASE("disk mesh: level bounds enforced") {
    CHECK_THROWS_AS(build_disk_mesh(-1), std::invalid_argument);
    CHECK_THROWS_AS(build_disk_mesh(kMaxRefinementLevel + 1), std::invalid_argument);
}
