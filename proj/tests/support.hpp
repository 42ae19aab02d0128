#ifndef SLICEHUB_TESTS_SUPPORT_HPP
#define SLICEHUB_TESTS_SUPPORT_HPP

#include <atomic>
#include <filesystem>
#include <random>
#include <optional>
#include <string>
#include <utility>

#include <unistd.h>

#include "slicehub/geometry.hpp"
#include "slicehub/grid.hpp"
#include "slicehub/slicer.hpp"

namespace slicehub::testing {

inline TriangleMesh cube(double edge) { return make_box(Vec3::Zero(), Vec3(edge, edge, edge)); }

/// Scratch directory removed on destruction.
class ScratchDir {
 public:
  ScratchDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("slicehub-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Every cell sliced with the synthetic model.
inline SliceGrid synthetic_grid(const MeshMetrics& metrics, const GridAxes& axes) {
  SliceGrid grid(axes);
  for (const CellIndex idx : grid.all_cells()) {
    const CostEstimate c = synthetic_cost(metrics, grid.layer_height(idx), grid.scale(idx));
    grid.at(idx) = SlicingResult::sliced(c.print_time_s, c.material_mm3);
  }
  return grid;
}

/// Random grid with random holes, used by the filter property checks.
inline SliceGrid random_grid(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> dim(2, 17);
  std::uniform_real_distribution<double> value(0.0, 1000.0);
  std::bernoulli_distribution hole(0.1);
  SliceGrid grid(build_axes(dim(rng), dim(rng)));
  for (const CellIndex idx : grid.all_cells()) {
    if (hole(rng)) continue;
    grid.at(idx) = SlicingResult::sliced(value(rng), value(rng));
  }
  return grid;
}

inline ConstraintSet random_constraints(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> value(0.0, 1000.0);
  std::bernoulli_distribution present(0.6);
  ConstraintSet c;
  const auto pair = [&](std::optional<double>& lo, std::optional<double>& hi) {
    double a = value(rng), b = value(rng);
    if (a > b) std::swap(a, b);
    if (present(rng)) lo = a;
    if (present(rng)) hi = b;
  };
  pair(c.time_lo_s, c.time_hi_s);
  pair(c.material_lo, c.material_hi);
  return c;
}

}  // namespace slicehub::testing

#endif  // SLICEHUB_TESTS_SUPPORT_HPP
