#ifndef SLICEHUB_CORPUS_HPP
#define SLICEHUB_CORPUS_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "slicehub/geometry.hpp"

namespace slicehub {

TriangleMesh make_cylinder(double radius, double height, std::size_t segments);
TriangleMesh make_torus(double major_radius, double minor_radius, std::size_t major_segments,
                        std::size_t minor_segments);
TriangleMesh make_icosphere(double radius, std::size_t subdivisions);

/// Affine image of an icosphere under `transform`; the result is the convex
/// hull of its own vertices.
TriangleMesh make_convex_polytope(const Eigen::Matrix3d& transform, std::size_t subdivisions);

struct CorpusModel {
  std::string name;
  TriangleMesh mesh;
  std::string stl;  // binary STL of `mesh`
};

/// Deterministic parametric shapes (boxes, cylinders, tori, random convex
/// polytopes) whose characteristic sizes are stratified over 8-80 mm, so
/// volumes span well over two orders of magnitude for n >= 5.
std::vector<CorpusModel> generate_corpus(std::size_t n_models, std::uint64_t seed);

}  // namespace slicehub

#endif  // SLICEHUB_CORPUS_HPP
