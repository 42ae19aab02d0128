#include "slicehub/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>

#include "slicehub/error.hpp"
#include "slicehub/grid.hpp"
#include "slicehub/interpolation.hpp"

namespace slicehub {
namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string label(std::size_t k) { return std::to_string(k) + "x" + std::to_string(k); }

/// Full synthetic slicing of every cell.
SliceGrid slice_all(const MeshMetrics& metrics, const GridAxes& axes) {
  SliceGrid grid(axes);
  for (const CellIndex idx : grid.all_cells()) {
    const CostEstimate c = synthetic_cost(metrics, grid.layer_height(idx), grid.scale(idx));
    grid.at(idx) = SlicingResult::sliced(c.print_time_s, c.material_mm3);
  }
  return grid;
}

double closest_relative_error(const std::vector<double>& values, double target) {
  double best = std::numeric_limits<double>::infinity();
  for (const double v : values) best = std::min(best, std::abs(v - target));
  return best / target;
}

}  // namespace

std::vector<ExperimentReport> constraint_error_experiment(std::span<const CorpusModel> corpus,
                                                          std::span<const std::size_t> grid_sizes,
                                                          std::size_t n_constraints,
                                                          std::uint64_t seed) {
  if (corpus.empty()) throw Error(ErrorCode::InvalidArgument, "empty corpus");
  if (n_constraints == 0) throw Error(ErrorCode::InvalidArgument, "need at least one constraint");

  std::vector<double> time_sum(grid_sizes.size(), 0.0);
  std::vector<double> material_sum(grid_sizes.size(), 0.0);

  for (std::size_t m = 0; m < corpus.size(); ++m) {
    const MeshMetrics metrics = compute_metrics(corpus[m].mesh);
    std::vector<SliceGrid> grids;
    for (const std::size_t n : grid_sizes) grids.push_back(slice_all(metrics, build_axes(n, n)));

    // One set of bounds across all sizes so every size sees the same targets.
    ConstraintSet bounds = default_bounds(grids.front());
    for (const SliceGrid& g : grids) {
      const ConstraintSet b = default_bounds(g);
      bounds.time_lo_s = std::min(*bounds.time_lo_s, *b.time_lo_s);
      bounds.time_hi_s = std::max(*bounds.time_hi_s, *b.time_hi_s);
      bounds.material_lo = std::min(*bounds.material_lo, *b.material_lo);
      bounds.material_hi = std::max(*bounds.material_hi, *b.material_hi);
    }

    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * (m + 1)));
    std::vector<double> time_targets(n_constraints), material_targets(n_constraints);
    for (double& t : time_targets) t = *bounds.time_lo_s + unit(rng) * (*bounds.time_hi_s - *bounds.time_lo_s);
    for (double& t : material_targets) {
      t = *bounds.material_lo + unit(rng) * (*bounds.material_hi - *bounds.material_lo);
    }

    for (std::size_t g = 0; g < grids.size(); ++g) {
      std::vector<double> times, materials;
      for (const CellIndex idx : grids[g].all_cells()) {
        times.push_back(grids[g].at(idx)->print_time_s);
        materials.push_back(grids[g].at(idx)->material_mm3);
      }
      double t_err = 0.0, m_err = 0.0;
      for (const double target : time_targets) t_err += closest_relative_error(times, target);
      for (const double target : material_targets) m_err += closest_relative_error(materials, target);
      time_sum[g] += 100.0 * t_err / static_cast<double>(n_constraints);
      material_sum[g] += 100.0 * m_err / static_cast<double>(n_constraints);
    }
  }

  std::vector<ExperimentReport> reports;
  for (std::size_t g = 0; g < grid_sizes.size(); ++g) {
    ExperimentReport r;
    r.condition = label(grid_sizes[g]);
    r.mean_relative_error_time_pct = time_sum[g] / static_cast<double>(corpus.size());
    r.mean_relative_error_material_pct = material_sum[g] / static_cast<double>(corpus.size());
    r.n_models = corpus.size();
    r.n_points = n_constraints;
    r.seed = seed;
    reports.push_back(r);
  }
  return reports;
}

std::vector<ExperimentReport> interpolation_error_experiment(
    std::span<const CorpusModel> corpus, std::span<const std::size_t> sublattices,
    std::uint64_t seed, std::size_t grid_size) {
  if (corpus.empty()) throw Error(ErrorCode::InvalidArgument, "empty corpus");
  for (const std::size_t k : sublattices) {
    if (k < 2 || k > grid_size) {
      throw Error(ErrorCode::InvalidArgument,
                  "sub-lattice " + std::to_string(k) + " outside [2, " + std::to_string(grid_size) + "]");
    }
  }
  const GridAxes axes = build_axes(grid_size, grid_size);

  std::vector<double> time_sum(sublattices.size(), 0.0);
  std::vector<double> material_sum(sublattices.size(), 0.0);
  for (const CorpusModel& model : corpus) {
    const SliceGrid truth = slice_all(compute_metrics(model.mesh), axes);
    for (std::size_t k = 0; k < sublattices.size(); ++k) {
      SliceGrid sampled(axes);
      for (const CellIndex idx : sub_lattice(axes, sublattices[k], sublattices[k])) {
        sampled.at(idx) = truth.at(idx);
      }
      const std::vector<CellIndex> hidden = sampled.unsliced_cells();
      if (hidden.empty()) continue;

      const SliceGrid predicted = interpolate_grid(sampled);
      double t_err = 0.0, m_err = 0.0;
      for (const CellIndex idx : hidden) {
        const SlicingResult& want = *truth.at(idx);
        const SlicingResult& got = *predicted.at(idx);
        t_err += std::abs(got.print_time_s - want.print_time_s) / want.print_time_s;
        m_err += std::abs(got.material_mm3 - want.material_mm3) / want.material_mm3;
      }
      time_sum[k] += 100.0 * t_err / static_cast<double>(hidden.size());
      material_sum[k] += 100.0 * m_err / static_cast<double>(hidden.size());
    }
  }

  std::vector<ExperimentReport> reports;
  for (std::size_t k = 0; k < sublattices.size(); ++k) {
    ExperimentReport r;
    r.condition = label(sublattices[k]);
    r.mean_relative_error_time_pct = time_sum[k] / static_cast<double>(corpus.size());
    r.mean_relative_error_material_pct = material_sum[k] / static_cast<double>(corpus.size());
    r.n_models = corpus.size();
    r.n_points = axes.cell_count() - sublattices[k] * sublattices[k];
    r.seed = seed;
    reports.push_back(r);
  }
  return reports;
}

void write_csv(std::ostream& out, std::span<const ExperimentReport> reports) {
  out << "condition,metric,mean_error_pct,n_models,n_points,seed\n";
  const auto flags = out.flags();
  out << std::setprecision(6) << std::fixed;
  for (const ExperimentReport& r : reports) {
    out << r.condition << ",time," << r.mean_relative_error_time_pct << ',' << r.n_models << ','
        << r.n_points << ',' << r.seed << '\n';
    out << r.condition << ",material," << r.mean_relative_error_material_pct << ',' << r.n_models
        << ',' << r.n_points << ',' << r.seed << '\n';
  }
  out.flags(flags);
}

}  // namespace slicehub
