#ifndef SLICEHUB_INTERPOLATION_HPP
#define SLICEHUB_INTERPOLATION_HPP

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "slicehub/grid.hpp"

namespace slicehub {

/// One observation: layer height r (mm), scale fraction s, observed value.
struct Sample {
  double r = 0.0;
  double s = 0.0;
  double value = 0.0;
};

enum class Basis {
  Linear,     // 1, s, r
  Quadratic,  // 1, s, r, s^2, s r, r^2
};

constexpr std::size_t basis_size(Basis basis) { return basis == Basis::Quadratic ? 6 : 3; }

/// Relative singular-value cutoff used to decide rank.
inline constexpr double kRankTolerance = 1e-10;

/// Row of basis terms evaluated at (r, s), padded to six entries.
template <typename Scalar>
Eigen::Matrix<Scalar, 6, 1> basis_terms(Scalar r, Scalar s) {
  Eigen::Matrix<Scalar, 6, 1> row;
  row << Scalar(1), s, r, s * s, s * r, r * r;
  return row;
}

/// Total-degree-2 polynomial in (s, r); linear fits keep the quadratic
/// coefficients at zero.
struct SurfaceFit {
  Eigen::Matrix<double, 6, 1> coefficients = Eigen::Matrix<double, 6, 1>::Zero();
  Basis basis = Basis::Quadratic;
  std::size_t n_samples = 0;
  double loocv_error_pct = 0.0;

  /// Raw polynomial value, not clamped.
  double evaluate(double r, double s) const { return basis_terms(r, s).dot(coefficients); }
};

/// Least squares over the quadratic basis when there are at least six
/// samples spanning it, otherwise over the linear basis. Residuals are taken
/// relative to the observed value when every value is positive, absolute
/// otherwise. Leave-one-out error
/// is the mean of |prediction without i - y_i| / y_i * 100, skipping y_i = 0;
/// each fold follows the same quadratic-then-linear ladder.
///
/// Throws TooFewSamples (< 3 samples) or DegenerateDesign (not even the
/// linear basis is spanned).
SurfaceFit fit(std::span<const Sample> samples);

/// Evaluation clamped at zero.
double predict(const SurfaceFit& fit, double r, double s);

/// Separate time and material fits over the sliced cells of a grid.
struct GridFit {
  SurfaceFit time;
  SurfaceFit material;

  /// Accuracy annotation attached to interpolated cells: the worse of the
  /// two leave-one-out errors.
  double accuracy_pct() const { return std::max(time.loocv_error_pct, material.loocv_error_pct); }
};

GridFit fit_grid(const SliceGrid& grid);

/// Refills every non-sliced cell from fits over the sliced ones; sliced cells
/// are never touched. Throws TooFewSamples with fewer than three sliced cells.
SliceGrid interpolate_grid(const SliceGrid& grid);

}  // namespace slicehub

#endif  // SLICEHUB_INTERPOLATION_HPP
