#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "slicehub/error.hpp"
#include "slicehub/grid.hpp"
#include "support.hpp"

namespace slicehub {
namespace {

using testing::cube;
using testing::random_constraints;
using testing::random_grid;
using testing::synthetic_grid;

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::Io;
}

bool contains(const std::vector<CellIndex>& cells, CellIndex idx) {
  return std::find(cells.begin(), cells.end(), idx) != cells.end();
}

TEST(Axes, TwoLevelsAreTheEnds) {
  const GridAxes axes = build_axes(2, 2);
  EXPECT_EQ(axes.resolutions, (std::vector<double>{0.06, 0.2}));
  EXPECT_EQ(axes.scales, (std::vector<double>{1.0, 0.1}));
}

TEST(Axes, ThreeLevelsAddTheMidpoint) {
  const GridAxes axes = build_axes(3, 3);
  EXPECT_DOUBLE_EQ(axes.resolutions[1], 0.13);
  EXPECT_DOUBLE_EQ(axes.scales[1], 0.55);
}

TEST(Axes, MidpointCascadeNests) {
  for (const std::size_t n : {3u, 5u, 9u, 17u}) {
    const std::vector<double> coarse = axis_values(0.06, 0.2, n);
    const std::vector<double> fine = axis_values(0.06, 0.2, 2 * n - 1);
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(fine[2 * i], coarse[i]);
  }
}

TEST(Axes, SixteenLevelsUniform) {
  const GridAxes axes = build_axes(16, 16);
  ASSERT_EQ(axes.cell_count(), 256u);
  EXPECT_DOUBLE_EQ(axes.resolutions.front(), 0.06);
  EXPECT_DOUBLE_EQ(axes.resolutions.back(), 0.2);
  EXPECT_DOUBLE_EQ(axes.scales.front(), 1.0);
  EXPECT_DOUBLE_EQ(axes.scales.back(), 0.1);
  for (std::size_t i = 1; i < 16; ++i) {
    EXPECT_NEAR(axes.scales[i - 1] - axes.scales[i], 0.06, 1e-12);
    EXPECT_NEAR(axes.resolutions[i] - axes.resolutions[i - 1], 0.14 / 15.0, 1e-12);
  }
}

TEST(Axes, FewerThanTwoLevelsRejected) {
  EXPECT_EQ(code_of([] { build_axes(1, 16); }), ErrorCode::TooFewLevels);
  EXPECT_EQ(code_of([] { build_axes(16, 0); }), ErrorCode::TooFewLevels);
}

TEST(SliceGridTest, OutOfRangeAccess) {
  SliceGrid grid(build_axes(3, 4));
  EXPECT_EQ(code_of([&] { grid.at({3, 0}); }), ErrorCode::IndexOutOfRange);
  EXPECT_EQ(code_of([&] { grid.at({0, 4}); }), ErrorCode::IndexOutOfRange);
  EXPECT_NO_THROW(grid.at({2, 3}));
}

TEST(SliceGridTest, StatusCounts) {
  SliceGrid grid(build_axes(4, 4));
  grid.at({0, 0}) = SlicingResult::sliced(1, 1);
  grid.at({1, 1}) = SlicingResult::interpolated(1, 1, 2.0);
  EXPECT_EQ(grid.count(ResultStatus::Sliced), 1u);
  EXPECT_EQ(grid.count(ResultStatus::Interpolated), 1u);
  EXPECT_EQ(grid.empty_count(), 14u);
  EXPECT_EQ(grid.sliced_cells(), (std::vector<CellIndex>{{0, 0}}));
  EXPECT_EQ(grid.unsliced_cells().size(), 15u);
}

TEST(PlaceSamples, TenPercentOfSixteenSquaredIsFiveByFive) {
  const GridAxes axes = build_axes(16, 16);
  const std::vector<CellIndex> cells = place_samples(axes, 0.10);
  ASSERT_EQ(cells.size(), 25u);
  for (const CellIndex corner : {CellIndex{0, 0}, CellIndex{0, 15}, CellIndex{15, 0}, CellIndex{15, 15}}) {
    EXPECT_TRUE(contains(cells, corner));
  }
  std::set<std::size_t> rows, cols;
  for (const CellIndex c : cells) {
    rows.insert(c.r);
    cols.insert(c.s);
  }
  EXPECT_EQ(rows.size(), 5u);
  EXPECT_EQ(cols.size(), 5u);
}

TEST(PlaceSamples, FullFractionTakesEverything) {
  EXPECT_EQ(place_samples(build_axes(16, 16), 1.0).size(), 256u);
}

TEST(PlaceSamples, SmallestBudgetIsTheCorners) {
  const std::vector<CellIndex> cells = place_samples(build_axes(16, 16), 4.0 / 256.0);
  EXPECT_EQ(cells, (std::vector<CellIndex>{{0, 0}, {0, 15}, {15, 0}, {15, 15}}));
}

TEST(PlaceSamples, BelowFourCellsRejected) {
  EXPECT_EQ(code_of([] { place_samples(build_axes(16, 16), 0.01); }), ErrorCode::FractionTooSmall);
}

TEST(PlaceSamples, LatticeIndicesAreEvenAndIncludeEnds) {
  EXPECT_EQ(lattice_indices(16, 5), (std::vector<std::size_t>{0, 4, 8, 11, 15}));
  EXPECT_EQ(lattice_indices(16, 2), (std::vector<std::size_t>{0, 15}));
  EXPECT_EQ(lattice_indices(16, 16).size(), 16u);
  EXPECT_EQ(lattice_indices(17, 5), (std::vector<std::size_t>{0, 4, 8, 12, 16}));
}

TEST(PlaceSamples, MirrorSymmetricWithoutRoundingTies) {
  // Sizes where (n - 1) * i / (k - 1) never lands on .5.
  for (const auto& [n, k] : {std::pair<std::size_t, std::size_t>{16, 4}, {16, 6}, {16, 16}, {17, 5}, {17, 9}, {9, 3}}) {
    const std::vector<std::size_t> idx = lattice_indices(n, k);
    for (std::size_t i = 0; i < k; ++i) EXPECT_EQ(idx[i] + idx[k - 1 - i], n - 1) << n << "/" << k;
  }
}

TEST(PlaceSamples, SquareBudgetsGiveSquareLattices) {
  const GridAxes axes = build_axes(16, 16);
  for (std::size_t k = 2; k <= 16; ++k) {
    const double fraction = static_cast<double>(k * k) / 256.0;
    EXPECT_EQ(place_samples(axes, fraction), sub_lattice(axes, k, k)) << k;
  }
}

TEST(PlaceSamples, NeverExceedsBudget) {
  const GridAxes axes = build_axes(16, 16);
  for (double f = 0.02; f <= 1.0; f += 0.01) {
    EXPECT_LE(static_cast<double>(place_samples(axes, f).size()), f * 256.0 + 1e-9) << f;
  }
}

TEST(Filter, NoBoundsReturnsEveryCell) {
  const SliceGrid grid = synthetic_grid(compute_metrics(cube(20.0)), build_axes(16, 16));
  EXPECT_EQ(filter(grid, {}).size(), 256u);
}

TEST(Filter, BoundsAreInclusive) {
  SliceGrid grid(build_axes(2, 2));
  grid.at({0, 0}) = SlicingResult::sliced(200, 50);
  grid.at({0, 1}) = SlicingResult::sliced(300, 60);
  grid.at({1, 0}) = SlicingResult::sliced(199.9, 55);
  grid.at({1, 1}) = SlicingResult::sliced(250, 60.1);
  ConstraintSet c;
  c.time_lo_s = 200;
  c.time_hi_s = 300;
  c.material_lo = 50;
  c.material_hi = 60;
  EXPECT_EQ(filter(grid, c), (std::vector<CellIndex>{{0, 0}, {0, 1}}));
}

TEST(Filter, ConjunctionIsIntersection) {
  const SliceGrid grid = synthetic_grid(compute_metrics(cube(8.0)), build_axes(16, 16));
  ConstraintSet time_only, material_only, both;
  time_only.time_lo_s = both.time_lo_s = 200;
  time_only.time_hi_s = both.time_hi_s = 300;
  material_only.material_lo = both.material_lo = 50;
  material_only.material_hi = both.material_hi = 60;
  const std::vector<CellIndex> a = filter(grid, time_only);
  const std::vector<CellIndex> b = filter(grid, material_only);
  std::vector<CellIndex> expected;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(expected));
  EXPECT_EQ(filter(grid, both), expected);
}

TEST(Filter, MatchesExhaustiveScanOnRandomGrids) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const SliceGrid grid = random_grid(rng);
    const ConstraintSet c = random_constraints(rng);
    std::vector<CellIndex> expected;
    for (std::size_t r = 0; r < grid.rows(); ++r) {
      for (std::size_t s = 0; s < grid.cols(); ++s) {
        const auto& cell = grid.at({r, s});
        if (!cell) continue;
        const bool ok = (!c.time_lo_s || cell->print_time_s >= *c.time_lo_s) &&
                        (!c.time_hi_s || cell->print_time_s <= *c.time_hi_s) &&
                        (!c.material_lo || cell->material_mm3 >= *c.material_lo) &&
                        (!c.material_hi || cell->material_mm3 <= *c.material_hi);
        if (ok) expected.push_back({r, s});
      }
    }
    ASSERT_EQ(filter(grid, c), expected) << "trial " << trial;
  }
}

TEST(Filter, AddingABoundNeverGrowsTheResult) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const SliceGrid grid = random_grid(rng);
    ConstraintSet c = random_constraints(rng);
    const std::vector<CellIndex> before = filter(grid, c);
    const double tighter = c.material_hi ? *c.material_hi * 0.5 : 500.0;
    c.material_hi = c.material_lo ? std::max(*c.material_lo, tighter) : tighter;
    const std::vector<CellIndex> after = filter(grid, c);
    EXPECT_LE(after.size(), before.size());
    EXPECT_TRUE(std::includes(before.begin(), before.end(), after.begin(), after.end()));
  }
}

TEST(Filter, InvertedBoundRejected) {
  SliceGrid grid(build_axes(2, 2));
  ConstraintSet c;
  c.time_lo_s = 10;
  c.time_hi_s = 5;
  EXPECT_EQ(code_of([&] { filter(grid, c); }), ErrorCode::InvertedBound);
}

TEST(DefaultBounds, SingleCell) {
  SliceGrid grid(build_axes(2, 2));
  grid.at({1, 0}) = SlicingResult::sliced(10, 5);
  const ConstraintSet b = default_bounds(grid);
  EXPECT_EQ(b.time_lo_s, 10.0);
  EXPECT_EQ(b.time_hi_s, 10.0);
  EXPECT_EQ(b.material_lo, 5.0);
  EXPECT_EQ(b.material_hi, 5.0);
}

TEST(DefaultBounds, SyntheticCubeExtremesAtCorners) {
  const SliceGrid grid = synthetic_grid(compute_metrics(cube(20.0)), build_axes(16, 16));
  const ConstraintSet b = default_bounds(grid);
  EXPECT_EQ(*b.time_lo_s, grid.at({15, 15})->print_time_s);
  EXPECT_EQ(*b.time_hi_s, grid.at({0, 0})->print_time_s);
  double lo = 1e300, hi = 0;
  for (const CellIndex idx : grid.all_cells()) {
    lo = std::min(lo, grid.at(idx)->print_time_s);
    hi = std::max(hi, grid.at(idx)->print_time_s);
  }
  EXPECT_EQ(*b.time_lo_s, lo);
  EXPECT_EQ(*b.time_hi_s, hi);
}

TEST(DefaultBounds, AttainedByCells) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const SliceGrid grid = random_grid(rng);
    const ConstraintSet b = default_bounds(grid);
    const auto attained = [&](double v, bool time) {
      for (const CellIndex idx : grid.all_cells()) {
        const auto& cell = grid.at(idx);
        if (cell && (time ? cell->print_time_s : cell->material_mm3) == v) return true;
      }
      return false;
    };
    EXPECT_TRUE(attained(*b.time_lo_s, true));
    EXPECT_TRUE(attained(*b.time_hi_s, true));
    EXPECT_TRUE(attained(*b.material_lo, false));
    EXPECT_TRUE(attained(*b.material_hi, false));
    EXPECT_EQ(filter(grid, b).size(), grid.cell_count() - grid.empty_count());
  }
}

TEST(DefaultBounds, EmptyGridRejected) {
  EXPECT_EQ(code_of([] { default_bounds(SliceGrid(build_axes(2, 2))); }), ErrorCode::EmptyGrid);
}

TEST(NearestCell, PreviewCell) {
  const GridAxes axes = build_axes(16, 16);
  const auto idx = nearest_cell(axes, 0.15, 1.0);
  ASSERT_TRUE(idx);
  EXPECT_EQ(idx->s, 0u);
  for (std::size_t r = 0; r < 16; ++r) {
    EXPECT_LE(std::abs(axes.resolutions[idx->r] - 0.15), std::abs(axes.resolutions[r] - 0.15));
  }
  EXPECT_FALSE(nearest_cell(GridAxes{}, 0.15, 1.0));
}

}  // namespace
}  // namespace slicehub
