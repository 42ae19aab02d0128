#include "slicehub/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "slicehub/error.hpp"

namespace slicehub {
namespace {

bool is_midpoint_size(std::size_t n) {
  // n - 1 must be a power of two.
  const std::size_t gaps = n - 1;
  return gaps != 0 && (gaps & (gaps - 1)) == 0;
}

}  // namespace

std::vector<double> axis_values(double first, double last, std::size_t n) {
  if (n < 2) throw Error(ErrorCode::TooFewLevels, "an axis needs at least 2 levels");
  if (is_midpoint_size(n)) {
    std::vector<double> values = {first, last};
    while (values.size() < n) {
      std::vector<double> refined;
      refined.reserve(2 * values.size() - 1);
      for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        refined.push_back(values[i]);
        refined.push_back((values[i] + values[i + 1]) / 2.0);
      }
      refined.push_back(values.back());
      values = std::move(refined);
    }
    return values;
  }
  std::vector<double> values(n);
  const double step = (last - first) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) values[i] = first + step * static_cast<double>(i);
  values.back() = last;
  return values;
}

GridAxes build_axes(std::size_t n_resolutions, std::size_t n_scales) {
  if (n_resolutions < 2 || n_scales < 2) {
    throw Error(ErrorCode::TooFewLevels, "grid needs at least 2 levels per axis, got " +
                                             std::to_string(n_resolutions) + "x" +
                                             std::to_string(n_scales));
  }
  return {axis_values(kFinestLayerMm, kCoarsestLayerMm, n_resolutions),
          axis_values(kLargestScale, kSmallestScale, n_scales)};
}

SliceGrid::SliceGrid(GridAxes axes) : axes_(std::move(axes)), cells_(axes_.cell_count()) {}

const std::optional<SlicingResult>& SliceGrid::at(CellIndex idx) const {
  if (!contains(idx)) {
    throw Error(ErrorCode::IndexOutOfRange, "cell (" + std::to_string(idx.r) + ", " +
                                                std::to_string(idx.s) + ") outside grid");
  }
  return cells_[idx.r * cols() + idx.s];
}

std::optional<SlicingResult>& SliceGrid::at(CellIndex idx) {
  return const_cast<std::optional<SlicingResult>&>(std::as_const(*this).at(idx));
}

std::vector<CellIndex> SliceGrid::all_cells() const {
  std::vector<CellIndex> out;
  out.reserve(cell_count());
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t s = 0; s < cols(); ++s) out.push_back({r, s});
  }
  return out;
}

std::vector<CellIndex> SliceGrid::sliced_cells() const {
  std::vector<CellIndex> out;
  for (const CellIndex idx : all_cells()) {
    if (const auto& cell = at(idx); cell && cell->is_sliced()) out.push_back(idx);
  }
  return out;
}

std::vector<CellIndex> SliceGrid::unsliced_cells() const {
  std::vector<CellIndex> out;
  for (const CellIndex idx : all_cells()) {
    if (const auto& cell = at(idx); !cell || !cell->is_sliced()) out.push_back(idx);
  }
  return out;
}

std::size_t SliceGrid::count(ResultStatus status) const {
  return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(), [&](const auto& c) {
    return c && c->status == status;
  }));
}

std::size_t SliceGrid::empty_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells_.begin(), cells_.end(), [](const auto& c) { return !c; }));
}

bool ConstraintSet::admits(const SlicingResult& result) const {
  const double t = result.print_time_s;
  const double m = result.material_mm3;
  return (!time_lo_s || t >= *time_lo_s) && (!time_hi_s || t <= *time_hi_s) &&
         (!material_lo || m >= *material_lo) && (!material_hi || m <= *material_hi);
}

void validate(const ConstraintSet& c) {
  if (c.time_lo_s && c.time_hi_s && *c.time_lo_s > *c.time_hi_s) {
    throw Error(ErrorCode::InvertedBound, "time lower bound exceeds upper bound");
  }
  if (c.material_lo && c.material_hi && *c.material_lo > *c.material_hi) {
    throw Error(ErrorCode::InvertedBound, "material lower bound exceeds upper bound");
  }
}

std::vector<std::size_t> lattice_indices(std::size_t n, std::size_t k) {
  if (k < 2 || k > n) {
    throw Error(ErrorCode::InvalidArgument,
                "cannot pick " + std::to_string(k) + " of " + std::to_string(n) + " levels");
  }
  std::vector<std::size_t> idx(k);
  const double step = static_cast<double>(n - 1) / static_cast<double>(k - 1);
  // Upper half mirrors the lower half so the pattern is the same when read
  // from either end of the axis.
  for (std::size_t i = 0; 2 * i <= k - 1; ++i) {
    idx[i] = static_cast<std::size_t>(std::lround(step * static_cast<double>(i)));
    idx[k - 1 - i] = n - 1 - idx[i];
  }
  if ((k - 1) % 2 == 0) {
    idx[(k - 1) / 2] = static_cast<std::size_t>(std::lround(step * static_cast<double>((k - 1) / 2)));
  }
  return idx;
}

std::vector<CellIndex> sub_lattice(const GridAxes& axes, std::size_t kr, std::size_t ks) {
  const auto rows = lattice_indices(axes.rows(), kr);
  const auto cols = lattice_indices(axes.cols(), ks);
  std::vector<CellIndex> cells;
  cells.reserve(kr * ks);
  for (std::size_t r : rows) {
    for (std::size_t s : cols) cells.push_back({r, s});
  }
  return cells;
}

std::vector<CellIndex> place_samples(const GridAxes& axes, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "sliced fraction must be in (0, 1]");
  }
  if (axes.rows() < 2 || axes.cols() < 2) {
    throw Error(ErrorCode::TooFewLevels, "grid needs at least 2 levels per axis");
  }
  const double budget = fraction * static_cast<double>(axes.cell_count()) + 1e-9;
  if (budget < 4.0) {
    throw Error(ErrorCode::FractionTooSmall,
                "fraction " + std::to_string(fraction) + " leaves fewer than the 4 corner cells");
  }

  std::size_t best_r = 2, best_s = 2;
  double best_imbalance = std::numeric_limits<double>::infinity();
  for (std::size_t kr = 2; kr <= axes.rows(); ++kr) {
    for (std::size_t ks = 2; ks <= axes.cols(); ++ks) {
      const std::size_t size = kr * ks;
      if (static_cast<double>(size) > budget) break;
      const double imbalance = std::abs(static_cast<double>(kr) / static_cast<double>(axes.rows()) -
                                        static_cast<double>(ks) / static_cast<double>(axes.cols()));
      const std::size_t best_size = best_r * best_s;
      if (size > best_size || (size == best_size && imbalance < best_imbalance)) {
        best_r = kr;
        best_s = ks;
        best_imbalance = imbalance;
      }
    }
  }
  return sub_lattice(axes, best_r, best_s);
}

std::vector<CellIndex> filter(const SliceGrid& grid, const ConstraintSet& constraints) {
  validate(constraints);
  std::vector<CellIndex> out;
  for (const CellIndex idx : grid.all_cells()) {
    if (const auto& cell = grid.at(idx); cell && constraints.admits(*cell)) out.push_back(idx);
  }
  return out;
}

ConstraintSet default_bounds(const SliceGrid& grid) {
  ConstraintSet bounds;
  for (const CellIndex idx : grid.all_cells()) {
    const auto& cell = grid.at(idx);
    if (!cell) continue;
    const double t = cell->print_time_s;
    const double m = cell->material_mm3;
    bounds.time_lo_s = bounds.time_lo_s ? std::min(*bounds.time_lo_s, t) : t;
    bounds.time_hi_s = bounds.time_hi_s ? std::max(*bounds.time_hi_s, t) : t;
    bounds.material_lo = bounds.material_lo ? std::min(*bounds.material_lo, m) : m;
    bounds.material_hi = bounds.material_hi ? std::max(*bounds.material_hi, m) : m;
  }
  if (bounds.empty()) throw Error(ErrorCode::EmptyGrid, "grid has no populated cells");
  return bounds;
}

std::optional<CellIndex> nearest_cell(const GridAxes& axes, double layer_height_mm, double scale) {
  if (axes.rows() == 0 || axes.cols() == 0) return std::nullopt;
  const auto nearest = [](const std::vector<double>& values, double target) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
      if (std::abs(values[i] - target) < std::abs(values[best] - target)) best = i;
    }
    return best;
  };
  return CellIndex{nearest(axes.resolutions, layer_height_mm), nearest(axes.scales, scale)};
}

}  // namespace slicehub
