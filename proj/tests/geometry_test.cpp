#include <cmath>
#include <cstring>
#include <string>

#include <gtest/gtest.h>

#include "slicehub/corpus.hpp"
#include "slicehub/error.hpp"
#include "slicehub/geometry.hpp"
#include "support.hpp"

namespace slicehub {
namespace {

using testing::cube;

ErrorCode code_of(const std::string& bytes) {
  try {
    parse_stl(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::Io;
}

// Heron's formula and tetrahedra against the centroid.
struct Oracle {
  double volume = 0.0;
  double area = 0.0;
};

Oracle oracle(const TriangleMesh& mesh) {
  Vec3 centroid = Vec3::Zero();
  for (const Triangle& t : mesh.triangles) centroid += (t[0] + t[1] + t[2]) / 3.0;
  centroid /= static_cast<double>(mesh.size());
  Oracle o;
  for (const Triangle& t : mesh.triangles) {
    const double a = (t[1] - t[0]).norm(), b = (t[2] - t[1]).norm(), c = (t[0] - t[2]).norm();
    const double p = 0.5 * (a + b + c);
    o.area += std::sqrt(std::max(0.0, p * (p - a) * (p - b) * (p - c)));
    Eigen::Matrix3d m;
    m.col(0) = t[0] - centroid;
    m.col(1) = t[1] - centroid;
    m.col(2) = t[2] - centroid;
    o.volume += m.determinant() / 6.0;
  }
  o.volume = std::abs(o.volume);
  return o;
}

TEST(ParseStl, BinaryCubeHasTwelveTriangles) {
  const TriangleMesh mesh = parse_stl(write_stl_binary(cube(20.0)));
  EXPECT_EQ(mesh.size(), 12u);
}

TEST(ParseStl, AsciiSingleTriangle) {
  const std::string text =
      "solid one\n"
      "  facet normal 0 0 1\n"
      "    outer loop\n"
      "      vertex 0 0 0\n"
      "      vertex 1 0 0\n"
      "      vertex 0 1 0\n"
      "    endloop\n"
      "  endfacet\n"
      "endsolid one\n";
  const TriangleMesh mesh = parse_stl(text);
  ASSERT_EQ(mesh.size(), 1u);
  EXPECT_EQ(mesh.triangles[0][1], Vec3(1, 0, 0));
  EXPECT_DOUBLE_EQ(compute_metrics(mesh).surface_area_mm2, 0.5);
}

TEST(ParseStl, TruncatedBinaryIsMalformed) {
  std::string bytes(80, '\0');
  const std::uint32_t declared = 100;
  bytes.append(reinterpret_cast<const char*>(&declared), 4);
  bytes.append(80 * 50, '\0');
  EXPECT_EQ(code_of(bytes), ErrorCode::MalformedStl);
}

TEST(ParseStl, ShortHeaderIsMalformed) { EXPECT_EQ(code_of(std::string(40, 'x')), ErrorCode::MalformedStl); }

TEST(ParseStl, ZeroTrianglesIsEmpty) {
  std::string bytes(84, '\0');
  EXPECT_EQ(code_of(bytes), ErrorCode::EmptyMesh);
  EXPECT_EQ(code_of("solid nothing\nendsolid nothing\n"), ErrorCode::EmptyMesh);
}

TEST(ParseStl, GarbageAsciiIsMalformed) {
  EXPECT_EQ(code_of("solid x\nfacet normal 0 0 1\nouter loop\nvertex 1 2\n"), ErrorCode::MalformedStl);
}

TEST(ParseStl, BinaryRoundTripPreservesVertices) {
  const TriangleMesh torus = make_torus(10.0, 3.0, 12, 8);
  const TriangleMesh back = parse_stl(write_stl_binary(torus));
  ASSERT_EQ(back.size(), torus.size());
  for (std::size_t i = 0; i < torus.size(); ++i) {
    for (int v = 0; v < 3; ++v) {
      EXPECT_LT((back.triangles[i][v] - torus.triangles[i][v]).norm(), 1e-5);
    }
  }
}

TEST(ParseStl, BinaryWhoseHeaderStartsWithSolid) {
  std::string bytes = write_stl_binary(cube(5.0));
  std::memcpy(bytes.data(), "solid looks like ascii", 22);
  EXPECT_EQ(parse_stl(bytes).size(), 12u);
}

TEST(Metrics, TwentyMillimetreCube) {
  const MeshMetrics m = compute_metrics(cube(20.0));
  EXPECT_NEAR(m.volume_mm3, 8000.0, 1e-6);
  EXPECT_NEAR(m.surface_area_mm2, 2400.0, 1e-6);
  EXPECT_DOUBLE_EQ(m.height_mm, 20.0);
  EXPECT_EQ(m.bbox_min, Vec3::Zero());
  EXPECT_EQ(m.bbox_max, Vec3(20, 20, 20));
}

TEST(Metrics, ScalingByHalf) {
  const TriangleMesh mesh = make_icosphere(12.0, 2);
  const MeshMetrics full = compute_metrics(mesh);
  const MeshMetrics half = compute_metrics(scaled(mesh, 0.5));
  EXPECT_NEAR(half.volume_mm3 / full.volume_mm3, 0.125, 1e-9);
  EXPECT_NEAR(half.surface_area_mm2 / full.surface_area_mm2, 0.25, 1e-9);
}

TEST(Metrics, TranslationInvariant) {
  const TriangleMesh mesh = make_torus(15.0, 4.0, 24, 12);
  const MeshMetrics a = compute_metrics(mesh);
  const MeshMetrics b = compute_metrics(translated(mesh, Vec3(137.0, -42.5, 9.25)));
  EXPECT_NEAR(a.volume_mm3, b.volume_mm3, 1e-6 * a.volume_mm3);
  EXPECT_NEAR(a.surface_area_mm2, b.surface_area_mm2, 1e-9 * a.surface_area_mm2);
  EXPECT_NEAR(a.height_mm, b.height_mm, 1e-9);
}

TEST(Metrics, DegenerateTrianglesContributeNothing) {
  TriangleMesh mesh = cube(10.0);
  mesh.triangles.push_back({Vec3(1, 1, 1), Vec3(1, 1, 1), Vec3(2, 2, 2)});
  const MeshMetrics m = compute_metrics(mesh);
  EXPECT_NEAR(m.volume_mm3, 1000.0, 1e-9);
  EXPECT_NEAR(m.surface_area_mm2, 600.0, 1e-9);
}

TEST(Metrics, MatchesIndependentOracle) {
  for (const TriangleMesh& mesh :
       {make_icosphere(7.0, 3), make_torus(20.0, 5.0, 36, 18), make_cylinder(6.0, 14.0, 40)}) {
    const MeshMetrics m = compute_metrics(mesh);
    const Oracle o = oracle(mesh);
    EXPECT_NEAR(m.volume_mm3, o.volume, 1e-9 * o.volume);
    EXPECT_NEAR(m.surface_area_mm2, o.area, 1e-9 * o.area);
  }
}

TEST(Metrics, IcosphereApproachesSphere) {
  const double r = 10.0;
  const MeshMetrics m = compute_metrics(make_icosphere(r, 4));
  const double sphere = 4.0 / 3.0 * std::acos(-1.0) * r * r * r;
  EXPECT_LT(m.volume_mm3, sphere);
  EXPECT_GT(m.volume_mm3, 0.99 * sphere);
}

}  // namespace
}  // namespace slicehub
