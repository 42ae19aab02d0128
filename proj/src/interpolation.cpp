#include "slicehub/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/SVD>

#include "slicehub/error.hpp"

namespace slicehub {
namespace {

struct Solution {
  Eigen::VectorXd coefficients;
  bool full_rank = false;
};

/// Minimum-norm least squares on column-equilibrated design; rank is judged
/// with a relative singular-value cutoff.
Solution solve(std::span<const Sample> samples, Basis basis) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  const auto p = static_cast<Eigen::Index>(basis_size(basis));
  const bool relative = std::all_of(samples.begin(), samples.end(),
                                    [](const Sample& smp) { return smp.value > 0.0; });
  Eigen::MatrixXd design(n, p);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Sample& smp = samples[static_cast<std::size_t>(i)];
    const double w = relative ? 1.0 / smp.value : 1.0;
    design.row(i) = w * basis_terms(smp.r, smp.s).head(p).transpose();
    rhs(i) = w * smp.value;
  }

  Eigen::VectorXd column_scale = design.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (column_scale(j) == 0.0) column_scale(j) = 1.0;
  }
  const Eigen::MatrixXd scaled_design = design * column_scale.cwiseInverse().asDiagonal();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled_design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kRankTolerance);

  Solution out;
  out.coefficients = svd.solve(rhs).cwiseQuotient(column_scale);
  out.full_rank = svd.rank() == p;
  return out;
}

std::optional<SurfaceFit> solve_ladder(std::span<const Sample> samples, bool allow_deficient) {
  if (samples.size() >= basis_size(Basis::Quadratic)) {
    const Solution q = solve(samples, Basis::Quadratic);
    if (q.full_rank) {
      SurfaceFit f;
      f.coefficients = q.coefficients;
      f.basis = Basis::Quadratic;
      f.n_samples = samples.size();
      return f;
    }
  }
  const Solution lin = solve(samples, Basis::Linear);
  if (!lin.full_rank && !allow_deficient) return std::nullopt;
  SurfaceFit f;
  f.coefficients.head<3>() = lin.coefficients;
  f.basis = Basis::Linear;
  f.n_samples = samples.size();
  return f;
}

double leave_one_out_error(std::span<const Sample> samples) {
  std::vector<Sample> rest;
  rest.reserve(samples.size() - 1);
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].value == 0.0) continue;
    rest.clear();
    for (std::size_t j = 0; j < samples.size(); ++j) {
      if (j != i) rest.push_back(samples[j]);
    }
    // Folds may be rank deficient (two points on a plane); they fall back to
    // the minimum-norm solution rather than being skipped.
    const SurfaceFit fold = *solve_ladder(rest, /*allow_deficient=*/true);
    total += std::abs(predict(fold, samples[i].r, samples[i].s) - samples[i].value) /
             std::abs(samples[i].value);
    ++counted;
  }
  return counted == 0 ? 0.0 : 100.0 * total / static_cast<double>(counted);
}

}  // namespace

SurfaceFit fit(std::span<const Sample> samples) {
  if (samples.size() < 3) {
    throw Error(ErrorCode::TooFewSamples,
                "need at least 3 samples, got " + std::to_string(samples.size()));
  }
  std::optional<SurfaceFit> result = solve_ladder(samples, /*allow_deficient=*/false);
  if (!result) {
    throw Error(ErrorCode::DegenerateDesign, "samples do not span the linear basis");
  }
  result->loocv_error_pct = leave_one_out_error(samples);
  return *result;
}

double predict(const SurfaceFit& fit, double r, double s) {
  return std::max(0.0, fit.evaluate(r, s));
}

GridFit fit_grid(const SliceGrid& grid) {
  std::vector<Sample> times;
  std::vector<Sample> materials;
  for (const CellIndex idx : grid.sliced_cells()) {
    const SlicingResult& cell = *grid.at(idx);
    times.push_back({grid.layer_height(idx), grid.scale(idx), cell.print_time_s});
    materials.push_back({grid.layer_height(idx), grid.scale(idx), cell.material_mm3});
  }
  return {fit(times), fit(materials)};
}

SliceGrid interpolate_grid(const SliceGrid& grid) {
  const std::vector<CellIndex> missing = grid.unsliced_cells();
  if (missing.empty()) return grid;

  const GridFit fits = fit_grid(grid);
  const double accuracy = fits.accuracy_pct();
  SliceGrid out = grid;
  for (const CellIndex idx : missing) {
    const double r = grid.layer_height(idx);
    const double s = grid.scale(idx);
    out.at(idx) = SlicingResult::interpolated(predict(fits.time, r, s),
                                              predict(fits.material, r, s), accuracy);
  }
  return out;
}

}  // namespace slicehub
