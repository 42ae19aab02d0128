#include "slicehub/corpus.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <utility>

#include "slicehub/error.hpp"

namespace slicehub {
namespace {

using std::numbers::pi;

/// Portable uniform [0, 1) from a 64-bit engine.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }

TriangleMesh on_bed(TriangleMesh mesh) {
  const MeshMetrics m = compute_metrics(mesh);
  return translated(mesh, Vec3(0.0, 0.0, -m.bbox_min.z()));
}

}  // namespace

TriangleMesh make_cylinder(double radius, double height, std::size_t segments) {
  TriangleMesh mesh;
  const Vec3 bottom_center(0, 0, 0);
  const Vec3 top_center(0, 0, height);
  for (std::size_t i = 0; i < segments; ++i) {
    const double a0 = 2 * pi * static_cast<double>(i) / static_cast<double>(segments);
    const double a1 = 2 * pi * static_cast<double>(i + 1) / static_cast<double>(segments);
    const Vec3 b0(radius * std::cos(a0), radius * std::sin(a0), 0);
    const Vec3 b1(radius * std::cos(a1), radius * std::sin(a1), 0);
    const Vec3 t0 = b0 + top_center;
    const Vec3 t1 = b1 + top_center;
    mesh.triangles.push_back({b0, b1, t1});
    mesh.triangles.push_back({b0, t1, t0});
    mesh.triangles.push_back({top_center, t0, t1});
    mesh.triangles.push_back({bottom_center, b1, b0});
  }
  return mesh;
}

TriangleMesh make_torus(double major_radius, double minor_radius, std::size_t major_segments,
                        std::size_t minor_segments) {
  const auto point = [&](std::size_t i, std::size_t j) {
    const double u = 2 * pi * static_cast<double>(i % major_segments) / static_cast<double>(major_segments);
    const double v = 2 * pi * static_cast<double>(j % minor_segments) / static_cast<double>(minor_segments);
    const double ring = major_radius + minor_radius * std::cos(v);
    return Vec3(ring * std::cos(u), ring * std::sin(u), minor_radius * std::sin(v));
  };
  TriangleMesh mesh;
  for (std::size_t i = 0; i < major_segments; ++i) {
    for (std::size_t j = 0; j < minor_segments; ++j) {
      const Vec3 p00 = point(i, j), p10 = point(i + 1, j), p11 = point(i + 1, j + 1),
                 p01 = point(i, j + 1);
      mesh.triangles.push_back({p00, p10, p11});
      mesh.triangles.push_back({p00, p11, p01});
    }
  }
  return mesh;
}

TriangleMesh make_icosphere(double radius, std::size_t subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                             {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                             {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& v : verts) v.normalize();
  std::vector<std::array<std::size_t, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

  for (std::size_t level = 0; level < subdivisions; ++level) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> midpoints;
    const auto midpoint = [&](std::size_t a, std::size_t b) {
      const auto key = std::minmax(a, b);
      if (auto it = midpoints.find(key); it != midpoints.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      return midpoints[key] = verts.size() - 1;
    };
    std::vector<std::array<std::size_t, 3>> refined;
    refined.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const std::size_t ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
      refined.push_back({f[0], ab, ca});
      refined.push_back({f[1], bc, ab});
      refined.push_back({f[2], ca, bc});
      refined.push_back({ab, bc, ca});
    }
    faces = std::move(refined);
  }

  TriangleMesh mesh;
  mesh.triangles.reserve(faces.size());
  for (const auto& f : faces) {
    mesh.triangles.push_back({radius * verts[f[0]], radius * verts[f[1]], radius * verts[f[2]]});
  }
  return mesh;
}

TriangleMesh make_convex_polytope(const Eigen::Matrix3d& transform, std::size_t subdivisions) {
  TriangleMesh mesh = make_icosphere(1.0, subdivisions);
  for (Triangle& tri : mesh.triangles) {
    for (Vec3& v : tri) v = transform * v;
  }
  return mesh;
}

std::vector<CorpusModel> generate_corpus(std::size_t n_models, std::uint64_t seed) {
  if (n_models == 0) throw Error(ErrorCode::InvalidArgument, "corpus needs at least one model");
  std::mt19937_64 rng(seed);

  // Stratified log-sizes, shuffled so shape kind and size are independent.
  std::vector<double> size_mm(n_models);
  for (std::size_t i = 0; i < n_models; ++i) {
    const double u = (static_cast<double>(i) + unit(rng)) / static_cast<double>(n_models);
    size_mm[i] = 8.0 * std::pow(10.0, u);
  }
  for (std::size_t i = n_models; i > 1; --i) {
    const auto j = static_cast<std::size_t>(unit(rng) * static_cast<double>(i));
    std::swap(size_mm[i - 1], size_mm[j]);
  }

  std::vector<CorpusModel> corpus;
  corpus.reserve(n_models);
  for (std::size_t i = 0; i < n_models; ++i) {
    const double L = size_mm[i];
    CorpusModel model;
    switch (i % 4) {
      case 0: {
        const Vec3 dims(L, L * uniform(rng, 0.4, 1.0), L * uniform(rng, 0.4, 1.0));
        model.name = "box-" + std::to_string(i);
        model.mesh = make_box(Vec3::Zero(), dims);
        break;
      }
      case 1: {
        const double radius = 0.5 * L * uniform(rng, 0.5, 1.0);
        const double height = L * uniform(rng, 0.4, 1.0);
        model.name = "cylinder-" + std::to_string(i);
        model.mesh = make_cylinder(radius, height, 48);
        break;
      }
      case 2: {
        const double major = 0.35 * L;
        const double minor = major * uniform(rng, 0.2, 0.45);
        model.name = "torus-" + std::to_string(i);
        model.mesh = make_torus(major, minor, 48, 24);
        break;
      }
      default: {
        Eigen::Matrix3d transform = Eigen::Matrix3d::Zero();
        for (int d = 0; d < 3; ++d) transform(d, d) = 0.5 * L * uniform(rng, 0.5, 1.0);
        transform(0, 1) = 0.5 * L * uniform(rng, -0.3, 0.3);
        transform(1, 2) = 0.5 * L * uniform(rng, -0.3, 0.3);
        model.name = "polytope-" + std::to_string(i);
        model.mesh = make_convex_polytope(transform, 2);
        break;
      }
    }
    model.mesh = on_bed(std::move(model.mesh));
    model.stl = write_stl_binary(model.mesh);
    corpus.push_back(std::move(model));
  }
  return corpus;
}

}  // namespace slicehub
