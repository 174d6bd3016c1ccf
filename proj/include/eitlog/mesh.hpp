#ifndef EITLOG_MESH_HPP
#define EITLOG_MESH_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

namespace eitlog {

/// Triangulation of the unit disk built from concentric rings of nodes.
///
/// Node 0 is the center; ring i (1 <= i <= R) holds 6*i nodes at radius i/R,
/// so the outermost ring forms the boundary polygon. Boundary nodes are
/// equispaced in angle and listed in counter-clockwise order.
struct DiskMesh {
    Eigen::Matrix<double, Eigen::Dynamic, 2> nodes;
    Eigen::Matrix<int, Eigen::Dynamic, 3> triangles; // CCW node index triples
    std::vector<int> boundary_nodes;                 // ordered by angle
    int refinement_level = 0;

    int n_nodes() const { return static_cast<int>(nodes.rows()); }
    int n_triangles() const { return static_cast<int>(triangles.rows()); }
    int n_boundary() const { return static_cast<int>(boundary_nodes.size()); }

    double triangle_area(int t) const;
    Eigen::Vector2d centroid(int t) const;
    double max_edge_length() const;
    double total_area() const;
    /// Angle of the j-th boundary node.
    double boundary_angle(int j) const;
};

/// Rings at level 0; each refinement doubles the ring count.
inline constexpr int kBaseRings = 8;
/// Levels above this exhaust desk-scale memory.
inline constexpr int kMaxRefinementLevel = 7;

/// Deterministic shape-regular triangulation; boundary node count and max
/// edge length halve per level.
DiskMesh build_disk_mesh(int refinement_level);

/// Plain-text cache, header `diskmesh v1 <level> <n_nodes> <n_tris>`.
void save_mesh(const DiskMesh& mesh, const std::filesystem::path& path);
DiskMesh load_mesh(const std::filesystem::path& path);

/// Loads `diskmesh_level<k>.txt` from cache_dir, regenerating if absent.
DiskMesh load_or_build_mesh(int refinement_level,
                            const std::filesystem::path& cache_dir);

} // namespace eitlog

#endif
