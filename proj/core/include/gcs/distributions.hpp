#pragma once

// Estimators of codebook-index distributions from token grids.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gcs/core.hpp"

namespace gcs {

inline constexpr double kDefaultSmoothingAlpha = 0.5;

/// Per-semantic-label distributions. A label that was never observed and
/// received no smoothing is absent (std::nullopt), never a NaN vector.
struct RegionalDistributions {
  std::size_t label_count = 0;
  std::size_t codebook_size = 0;
  std::vector<std::optional<CategoricalDistribution>> per_label;
  std::vector<double> per_label_mass;

  bool has(Label j) const { return j < per_label.size() && per_label[j].has_value(); }
};

/// Floor-partition tiling of a height x width grid into rows x cols cells.
struct CellTiling {
  std::size_t rows = 1;
  std::size_t cols = 1;

  /// Row-major cell index containing `p`.
  std::size_t cell_of(Position p, std::size_t height, std::size_t width) const {
    return (p.row * rows / height) * cols + p.col * cols / width;
  }
  std::size_t cell_count() const { return rows * cols; }

  friend bool operator==(const CellTiling&, const CellTiling&) = default;
};

struct SpatialDistributions {
  CellTiling tiling;
  /// Row-major, tiling.cell_count() entries.
  std::vector<CategoricalDistribution> per_cell;

  const CategoricalDistribution& at(std::size_t row, std::size_t col) const {
    return per_cell[row * tiling.cols + col];
  }
};

/// Raw index counts of a grid, one bucket per codebook entry.
std::vector<std::uint64_t> token_counts(const TokenGrid& grid);

/// (count + alpha) / (total + alpha * |Z|). Throws on zero total with alpha = 0.
CategoricalDistribution smoothed_distribution(std::span<const std::uint64_t> counts, double alpha);

CategoricalDistribution histogram_from_grid(const TokenGrid& grid, double smoothing_alpha);

RegionalDistributions histogram_by_region(const TokenGrid& grid, const SemanticGrid& semantics,
                                          double smoothing_alpha);

/// Pools the tokens of every grid that fall in each cell. Grids must share
/// shape and codebook size; the tiling must not exceed the grid shape.
SpatialDistributions histogram_by_cell(std::span<const TokenGrid> grids, CellTiling tiling,
                                       double smoothing_alpha);

enum class Weighting { uniform, mass };

CategoricalDistribution average_distributions(std::span<const CategoricalDistribution> dists,
                                              Weighting weighting = Weighting::uniform);

/// Per label, averages the present entries of each input. A label absent
/// from every input stays absent. Mass per label is summed.
RegionalDistributions average_regional(std::span<const RegionalDistributions> inputs,
                                       Weighting weighting = Weighting::uniform);

SpatialDistributions average_spatial(std::span<const SpatialDistributions> inputs,
                                     Weighting weighting = Weighting::uniform);

/// Random-access source of scenes for dataset estimation. load() may throw
/// IoError when the backing store fails.
class SceneSource {
 public:
  virtual ~SceneSource() = default;
  virtual std::size_t size() const = 0;
  virtual Scene load(std::size_t index) const = 0;
};

class InMemorySceneSource final : public SceneSource {
 public:
  explicit InMemorySceneSource(std::vector<Scene> scenes) : scenes_(std::move(scenes)) {}
  static InMemorySceneSource from_grids(std::span<const TokenGrid> grids);

  std::size_t size() const override { return scenes_.size(); }
  Scene load(std::size_t index) const override { return scenes_.at(index); }

 private:
  std::vector<Scene> scenes_;
};

/// The K scene indices drawn uniformly with replacement from a source of
/// `corpus_size` scenes. Pure function of the seed.
std::vector<std::size_t> monte_carlo_indices(std::size_t corpus_size, std::size_t k,
                                             std::uint64_t seed);

/// Uniform mean of the per-grid histograms of K scenes drawn with replacement.
CategoricalDistribution monte_carlo_dataset_distribution(const SceneSource& source, std::size_t k,
                                                         double smoothing_alpha,
                                                         std::uint64_t seed);

/// Region-restricted variant; every drawn scene must carry semantics.
RegionalDistributions monte_carlo_regional_distribution(const SceneSource& source, std::size_t k,
                                                        double smoothing_alpha,
                                                        std::uint64_t seed);

SpatialDistributions monte_carlo_spatial_distribution(const SceneSource& source, std::size_t k,
                                                      CellTiling tiling, double smoothing_alpha,
                                                      std::uint64_t seed);

}  // namespace gcs
