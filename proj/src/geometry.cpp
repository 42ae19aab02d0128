#include "slicehub/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string_view>

#include "slicehub/error.hpp"

namespace slicehub {
namespace {

constexpr std::size_t kHeaderSize = 80;
constexpr std::size_t kPreambleSize = kHeaderSize + 4;
constexpr std::size_t kFacetSize = 50;

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float read_f32_le(const unsigned char* p) {
  const std::uint32_t bits = read_u32_le(p);
  float value;
  std::memcpy(&value, &bits, sizeof value);
  return value;
}

void write_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void write_f32_le(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof bits);
  write_u32_le(out, bits);
}

bool finite(const Vec3& v) { return v.allFinite(); }

TriangleMesh parse_binary(std::string_view data) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  const std::uint32_t count = read_u32_le(bytes + kHeaderSize);
  TriangleMesh mesh;
  mesh.triangles.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    // Skip the stored normal; it is recomputed whenever needed.
    const unsigned char* facet = bytes + kPreambleSize + std::size_t{i} * kFacetSize + 12;
    Triangle tri;
    for (int v = 0; v < 3; ++v) {
      for (int c = 0; c < 3; ++c) tri[v][c] = read_f32_le(facet + 12 * v + 4 * c);
      if (!finite(tri[v])) {
        throw Error(ErrorCode::MalformedStl, "non-finite vertex in facet " + std::to_string(i));
      }
    }
    mesh.triangles.push_back(tri);
  }
  return mesh;
}

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view text) : text_(text) {}

  std::string_view next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  void skip_line() {
    while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

double parse_number(std::string_view token) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw Error(ErrorCode::MalformedStl, "bad number '" + std::string(token) + "'");
  }
  return value;
}

TriangleMesh parse_ascii(std::string_view text) {
  Tokenizer tok(text);
  if (tok.next() != "solid") throw Error(ErrorCode::MalformedStl, "missing 'solid'");
  tok.skip_line();  // solid name may contain spaces

  TriangleMesh mesh;
  std::vector<Vec3> loop;
  bool in_facet = false;
  for (std::string_view t = tok.next(); !t.empty(); t = tok.next()) {
    if (t == "facet") {
      if (in_facet) throw Error(ErrorCode::MalformedStl, "nested facet");
      in_facet = true;
      loop.clear();
      tok.skip_line();
    } else if (t == "outer" || t == "endloop") {
      if (!in_facet) throw Error(ErrorCode::MalformedStl, "'" + std::string(t) + "' outside facet");
      if (t == "outer") tok.skip_line();
    } else if (t == "vertex") {
      if (!in_facet) throw Error(ErrorCode::MalformedStl, "vertex outside facet");
      Vec3 v;
      for (int c = 0; c < 3; ++c) v[c] = parse_number(tok.next());
      loop.push_back(v);
    } else if (t == "endfacet") {
      if (!in_facet || loop.size() != 3) {
        throw Error(ErrorCode::MalformedStl, "facet without exactly 3 vertices");
      }
      mesh.triangles.push_back({loop[0], loop[1], loop[2]});
      in_facet = false;
    } else if (t == "endsolid") {
      if (in_facet) throw Error(ErrorCode::MalformedStl, "endsolid inside facet");
      break;
    } else {
      throw Error(ErrorCode::MalformedStl, "unexpected token '" + std::string(t) + "'");
    }
  }
  if (in_facet) throw Error(ErrorCode::MalformedStl, "unterminated facet");
  return mesh;
}

bool starts_with_solid(std::string_view data) {
  std::size_t i = 0;
  while (i < data.size() && std::isspace(static_cast<unsigned char>(data[i]))) ++i;
  return data.substr(i).starts_with("solid");
}

}  // namespace

TriangleMesh parse_stl(std::span<const std::byte> bytes) {
  const std::string_view data(reinterpret_cast<const char*>(bytes.data()), bytes.size());

  TriangleMesh mesh;
  bool binary = false;
  if (data.size() >= kPreambleSize) {
    const auto declared =
        read_u32_le(reinterpret_cast<const unsigned char*>(data.data()) + kHeaderSize);
    binary = kPreambleSize + std::uint64_t{declared} * kFacetSize == data.size();
  }

  if (binary) {
    mesh = parse_binary(data);
  } else if (starts_with_solid(data)) {
    try {
      mesh = parse_ascii(data);
    } catch (const Error&) {
      if (data.size() >= kPreambleSize) {
        throw Error(ErrorCode::MalformedStl,
                    "neither a complete binary STL nor parseable ASCII (truncated body?)");
      }
      throw;
    }
  } else if (data.size() >= kPreambleSize) {
    throw Error(ErrorCode::MalformedStl, "binary triangle count does not match file length " +
                                             std::to_string(data.size()));
  } else {
    throw Error(ErrorCode::MalformedStl, "file too short");
  }

  if (mesh.empty()) throw Error(ErrorCode::EmptyMesh, "STL contains no triangles");
  return mesh;
}

TriangleMesh parse_stl(const std::string& bytes) {
  return parse_stl(std::as_bytes(std::span(bytes.data(), bytes.size())));
}

TriangleMesh read_stl_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_stl(bytes);
}

std::string write_stl_binary(const TriangleMesh& mesh) {
  std::string out(kHeaderSize, '\0');
  out.reserve(kPreambleSize + mesh.size() * kFacetSize);
  write_u32_le(out, static_cast<std::uint32_t>(mesh.size()));
  for (const Triangle& tri : mesh.triangles) {
    Vec3 n = (tri[1] - tri[0]).cross(tri[2] - tri[0]);
    const double len = n.norm();
    if (len > 0.0) n /= len;
    for (int c = 0; c < 3; ++c) write_f32_le(out, static_cast<float>(n[c]));
    for (const Vec3& v : tri) {
      for (int c = 0; c < 3; ++c) write_f32_le(out, static_cast<float>(v[c]));
    }
    out.push_back('\0');
    out.push_back('\0');
  }
  return out;
}

MeshMetrics compute_metrics(const TriangleMesh& mesh) {
  if (mesh.empty()) throw Error(ErrorCode::EmptyMesh, "cannot measure an empty mesh");

  MeshMetrics m;
  m.bbox_min = Vec3::Constant(std::numeric_limits<double>::infinity());
  m.bbox_max = Vec3::Constant(-std::numeric_limits<double>::infinity());
  double signed_volume = 0.0;
  double area = 0.0;
  for (const Triangle& tri : mesh.triangles) {
    for (const Vec3& v : tri) {
      m.bbox_min = m.bbox_min.cwiseMin(v);
      m.bbox_max = m.bbox_max.cwiseMax(v);
    }
    const double twice_area = (tri[1] - tri[0]).cross(tri[2] - tri[0]).norm();
    if (twice_area == 0.0) continue;
    area += 0.5 * twice_area;
    signed_volume += tri[0].dot(tri[1].cross(tri[2])) / 6.0;
  }
  m.volume_mm3 = std::abs(signed_volume);
  m.surface_area_mm2 = area;
  m.height_mm = m.bbox_max.z() - m.bbox_min.z();
  return m;
}

TriangleMesh scaled(const TriangleMesh& mesh, double factor) {
  TriangleMesh out = mesh;
  for (Triangle& tri : out.triangles) {
    for (Vec3& v : tri) v *= factor;
  }
  return out;
}

TriangleMesh translated(const TriangleMesh& mesh, const Vec3& offset) {
  TriangleMesh out = mesh;
  for (Triangle& tri : out.triangles) {
    for (Vec3& v : tri) v += offset;
  }
  return out;
}

TriangleMesh make_box(const Vec3& min, const Vec3& max) {
  // Corner i has x from bit 0, y from bit 1, z from bit 2.
  std::array<Vec3, 8> c;
  for (int i = 0; i < 8; ++i) {
    c[i] = Vec3((i & 1) ? max.x() : min.x(), (i & 2) ? max.y() : min.y(),
                (i & 4) ? max.z() : min.z());
  }
  static constexpr int kFaces[12][3] = {
      {0, 2, 1}, {1, 2, 3},  // z = min
      {4, 5, 6}, {5, 7, 6},  // z = max
      {0, 1, 4}, {1, 5, 4},  // y = min
      {2, 6, 3}, {3, 6, 7},  // y = max
      {0, 4, 2}, {2, 4, 6},  // x = min
      {1, 3, 5}, {3, 7, 5},  // x = max
  };
  TriangleMesh mesh;
  for (const auto& f : kFaces) mesh.triangles.push_back({c[f[0]], c[f[1]], c[f[2]]});
  return mesh;
}

}  // namespace slicehub
