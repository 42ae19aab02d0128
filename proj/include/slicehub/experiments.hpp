#ifndef SLICEHUB_EXPERIMENTS_HPP
#define SLICEHUB_EXPERIMENTS_HPP

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "slicehub/corpus.hpp"

namespace slicehub {

struct ExperimentReport {
  std::string condition;  // "2x2", "5x5", ...
  double mean_relative_error_time_pct = 0.0;
  double mean_relative_error_material_pct = 0.0;
  std::size_t n_models = 0;
  std::size_t n_points = 0;  // constraints per quantity, or unsliced cells, per model
  std::uint64_t seed = 0;
};

/// For each grid size n, every model is sliced on the full n x n grid with
/// the synthetic backend. Per model, `n_constraints` time targets and as many
/// material targets are drawn uniformly between that model's min and max
/// (the same targets for every grid size). A target's error is the relative
/// distance to the closest cell value; errors are averaged per model, then
/// across models.
std::vector<ExperimentReport> constraint_error_experiment(std::span<const CorpusModel> corpus,
                                                          std::span<const std::size_t> grid_sizes,
                                                          std::size_t n_constraints,
                                                          std::uint64_t seed);

/// Ground truth is the fully sliced `grid_size` square grid. For each k the
/// k x k sample lattice is fitted and the remaining cells predicted; the
/// error is the mean relative error over those cells, averaged per model and
/// then across models. k == grid_size leaves nothing to predict and reports 0.
std::vector<ExperimentReport> interpolation_error_experiment(
    std::span<const CorpusModel> corpus, std::span<const std::size_t> sublattices,
    std::uint64_t seed, std::size_t grid_size = 16);

/// Columns: condition,metric,mean_error_pct,n_models,n_points,seed. Two rows
/// per report, metric "time" then "material".
void write_csv(std::ostream& out, std::span<const ExperimentReport> reports);

}  // namespace slicehub

#endif  // SLICEHUB_EXPERIMENTS_HPP
