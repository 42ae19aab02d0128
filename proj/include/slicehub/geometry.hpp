#ifndef SLICEHUB_GEOMETRY_HPP
#define SLICEHUB_GEOMETRY_HPP

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace slicehub {

using Vec3 = Eigen::Vector3d;

/// Three vertices in millimeters. Orientation follows the STL file.
using Triangle = std::array<Vec3, 3>;

struct TriangleMesh {
  std::vector<Triangle> triangles;

  std::size_t size() const { return triangles.size(); }
  bool empty() const { return triangles.empty(); }
};

struct MeshMetrics {
  double volume_mm3 = 0.0;
  double surface_area_mm2 = 0.0;
  Vec3 bbox_min = Vec3::Zero();
  Vec3 bbox_max = Vec3::Zero();
  double height_mm = 0.0;  // extent along Z, the build axis
};

/// Auto-detects binary vs ASCII. A buffer is treated as binary when its
/// declared triangle count matches the byte length exactly (84 + 50n);
/// otherwise it must start with `solid` and parse as ASCII.
TriangleMesh parse_stl(std::span<const std::byte> bytes);
TriangleMesh parse_stl(const std::string& bytes);

TriangleMesh read_stl_file(const std::string& path);

/// Binary STL with an all-zero header and computed facet normals.
std::string write_stl_binary(const TriangleMesh& mesh);

/// Volume is the absolute value of the signed-tetrahedron sum, so open or
/// inconsistently oriented meshes still produce a number. Zero-area
/// triangles contribute nothing.
MeshMetrics compute_metrics(const TriangleMesh& mesh);

/// Uniform scaling about the origin.
TriangleMesh scaled(const TriangleMesh& mesh, double factor);
TriangleMesh translated(const TriangleMesh& mesh, const Vec3& offset);

/// Axis-aligned box with one corner at `min`, 12 outward-facing triangles.
TriangleMesh make_box(const Vec3& min, const Vec3& max);

}  // namespace slicehub

#endif  // SLICEHUB_GEOMETRY_HPP
