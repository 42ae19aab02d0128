#ifndef SLICEHUB_GRID_HPP
#define SLICEHUB_GRID_HPP

#include <compare>
#include <cstddef>
#include <optional>
#include <vector>

#include "slicehub/slicer.hpp"

namespace slicehub {

inline constexpr double kFinestLayerMm = 0.06;
inline constexpr double kCoarsestLayerMm = 0.2;
inline constexpr double kLargestScale = 1.0;
inline constexpr double kSmallestScale = 0.1;

/// Resolution axis runs finest to coarsest layer height, scale axis runs
/// largest to smallest, so cell (0, 0) is the slowest configuration.
struct GridAxes {
  std::vector<double> resolutions;  // layer heights, mm
  std::vector<double> scales;       // fractions of original size

  std::size_t rows() const { return resolutions.size(); }
  std::size_t cols() const { return scales.size(); }
  std::size_t cell_count() const { return rows() * cols(); }

  friend bool operator==(const GridAxes&, const GridAxes&) = default;
};

struct CellIndex {
  std::size_t r = 0;  // resolution index
  std::size_t s = 0;  // scale index

  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

/// Values between `first` and `last` inclusive. Sizes reachable by repeated
/// midpoint insertion (2, 3, 5, 9, 17, 33, ...) are built by that cascade;
/// anything else is spaced uniformly.
std::vector<double> axis_values(double first, double last, std::size_t n);

/// Throws TooFewLevels when either count is below 2.
GridAxes build_axes(std::size_t n_resolutions, std::size_t n_scales);

class SliceGrid {
 public:
  SliceGrid() = default;
  explicit SliceGrid(GridAxes axes);

  const GridAxes& axes() const { return axes_; }
  std::size_t rows() const { return axes_.rows(); }
  std::size_t cols() const { return axes_.cols(); }
  std::size_t cell_count() const { return cells_.size(); }

  bool contains(CellIndex idx) const { return idx.r < rows() && idx.s < cols(); }

  /// Throws IndexOutOfRange.
  const std::optional<SlicingResult>& at(CellIndex idx) const;
  std::optional<SlicingResult>& at(CellIndex idx);

  double layer_height(CellIndex idx) const { return axes_.resolutions.at(idx.r); }
  double scale(CellIndex idx) const { return axes_.scales.at(idx.s); }

  std::vector<CellIndex> all_cells() const;
  std::vector<CellIndex> sliced_cells() const;
  std::vector<CellIndex> unsliced_cells() const;  // empty or interpolated
  std::size_t count(ResultStatus status) const;
  std::size_t empty_count() const;

  friend bool operator==(const SliceGrid&, const SliceGrid&) = default;

 private:
  GridAxes axes_;
  std::vector<std::optional<SlicingResult>> cells_;  // row-major, r * cols + s
};

struct ConstraintSet {
  std::optional<double> time_lo_s, time_hi_s;
  std::optional<double> material_lo, material_hi;

  bool empty() const { return !time_lo_s && !time_hi_s && !material_lo && !material_hi; }

  /// Inclusive on both ends; absent bounds always hold.
  bool admits(const SlicingResult& result) const;

  friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;
};

/// Throws InvertedBound when a lower bound exceeds its upper bound.
void validate(const ConstraintSet& constraints);

/// Per-dimension sample positions: `k` indices out of `n`, evenly spaced,
/// first and last always included.
std::vector<std::size_t> lattice_indices(std::size_t n, std::size_t k);

/// Cells of the kr x ks sub-lattice, in row-major order.
std::vector<CellIndex> sub_lattice(const GridAxes& axes, std::size_t kr, std::size_t ks);

/// Largest uniform sub-lattice whose size does not exceed
/// `fraction * cell_count`; prefers the most balanced shape on ties.
/// Throws FractionTooSmall when even the 4 corners exceed the budget.
std::vector<CellIndex> place_samples(const GridAxes& axes, double fraction);

/// Cells whose populated result satisfies every present bound.
std::vector<CellIndex> filter(const SliceGrid& grid, const ConstraintSet& constraints);

/// Min/max of time and material over populated cells. Throws EmptyGrid.
ConstraintSet default_bounds(const SliceGrid& grid);

/// Cell whose layer height and scale are each nearest to the targets.
/// Empty axes yield nullopt.
std::optional<CellIndex> nearest_cell(const GridAxes& axes, double layer_height_mm, double scale);

}  // namespace slicehub

#endif  // SLICEHUB_GRID_HPP
