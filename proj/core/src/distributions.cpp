#include "gcs/distributions.hpp"

#include <cmath>
#include <string>

#include "gcs/random.hpp"

namespace gcs {
namespace {

void check_alpha(double alpha) {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw ValidationError("smoothing alpha must be finite and >= 0");
  }
}

void check_tiling(CellTiling tiling, std::size_t height, std::size_t width) {
  if (tiling.rows == 0 || tiling.cols == 0) {
    throw ValidationError("cell tiling must have positive rows and cols");
  }
  if (tiling.rows > height || tiling.cols > width) {
    throw ValidationError("cell tiling " + std::to_string(tiling.rows) + "x" +
                          std::to_string(tiling.cols) + " is finer than the " +
                          std::to_string(height) + "x" + std::to_string(width) + " grid");
  }
}

}  // namespace

std::vector<std::uint64_t> token_counts(const TokenGrid& grid) {
  std::vector<std::uint64_t> counts(grid.codebook_size(), 0);
  for (Token t : grid.tokens()) ++counts[t];
  return counts;
}

CategoricalDistribution smoothed_distribution(std::span<const std::uint64_t> counts,
                                              double alpha) {
  check_alpha(alpha);
  CodebookSpec spec(counts.size());
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  const double denom = double(total) + alpha * double(spec.size);
  if (denom <= 0.0) {
    throw ValidationError("cannot estimate a distribution from zero observations with alpha = 0");
  }
  std::vector<double> p(spec.size);
  for (std::size_t i = 0; i < spec.size; ++i) p[i] = (double(counts[i]) + alpha) / denom;
  return CategoricalDistribution(std::move(p), double(total));
}

CategoricalDistribution histogram_from_grid(const TokenGrid& grid, double smoothing_alpha) {
  return smoothed_distribution(token_counts(grid), smoothing_alpha);
}

RegionalDistributions histogram_by_region(const TokenGrid& grid, const SemanticGrid& semantics,
                                          double smoothing_alpha) {
  check_alpha(smoothing_alpha);
  require_same_shape(grid, semantics);
  const std::size_t labels = semantics.label_count();
  std::vector<std::vector<std::uint64_t>> counts(labels,
                                                 std::vector<std::uint64_t>(grid.codebook_size()));
  std::vector<double> mass(labels, 0.0);
  const auto tokens = grid.tokens();
  const auto lab = semantics.labels();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    ++counts[lab[i]][tokens[i]];
    mass[lab[i]] += 1.0;
  }

  RegionalDistributions out;
  out.label_count = labels;
  out.codebook_size = grid.codebook_size();
  out.per_label_mass = mass;
  out.per_label.reserve(labels);
  for (std::size_t j = 0; j < labels; ++j) {
    if (mass[j] == 0.0 && smoothing_alpha == 0.0) {
      out.per_label.emplace_back(std::nullopt);
    } else {
      out.per_label.emplace_back(smoothed_distribution(counts[j], smoothing_alpha));
    }
  }
  return out;
}

SpatialDistributions histogram_by_cell(std::span<const TokenGrid> grids, CellTiling tiling,
                                       double smoothing_alpha) {
  check_alpha(smoothing_alpha);
  if (grids.empty()) throw ValidationError("histogram_by_cell needs at least one grid");
  const auto& first = grids.front();
  check_tiling(tiling, first.height(), first.width());

  std::vector<std::vector<std::uint64_t>> counts(
      tiling.cell_count(), std::vector<std::uint64_t>(first.codebook_size()));
  for (const auto& g : grids) {
    if (!g.same_shape(first.height(), first.width()) ||
        g.codebook_size() != first.codebook_size()) {
      throw ValidationError("histogram_by_cell: grids differ in shape or codebook size");
    }
    for (std::size_t r = 0; r < g.height(); ++r) {
      for (std::size_t c = 0; c < g.width(); ++c) {
        ++counts[tiling.cell_of({r, c}, g.height(), g.width())][g.at(r, c)];
      }
    }
  }

  SpatialDistributions out;
  out.tiling = tiling;
  out.per_cell.reserve(counts.size());
  for (const auto& c : counts) out.per_cell.push_back(smoothed_distribution(c, smoothing_alpha));
  return out;
}

CategoricalDistribution average_distributions(std::span<const CategoricalDistribution> dists,
                                              Weighting weighting) {
  if (dists.empty()) throw ValidationError("cannot average an empty list of distributions");
  const std::size_t n = dists.front().codebook_size();
  double total_mass = 0.0;
  for (const auto& d : dists) {
    if (d.codebook_size() != n) {
      throw ValidationError("codebook size mismatch: " + std::to_string(n) + " vs " +
                            std::to_string(d.codebook_size()));
    }
    total_mass += d.source_mass();
  }
  if (weighting == Weighting::mass && total_mass <= 0.0) {
    throw ValidationError("mass weighting requires positive total source mass");
  }

  std::vector<double> acc(n, 0.0);
  for (const auto& d : dists) {
    const double w = weighting == Weighting::mass ? d.source_mass() / total_mass
                                                  : 1.0 / double(dists.size());
    for (std::size_t i = 0; i < n; ++i) acc[i] += w * d[i];
  }
  return normalize(acc, total_mass);
}

RegionalDistributions average_regional(std::span<const RegionalDistributions> inputs,
                                       Weighting weighting) {
  if (inputs.empty()) throw ValidationError("cannot average an empty list of regional tables");
  RegionalDistributions out;
  out.label_count = inputs.front().label_count;
  out.codebook_size = inputs.front().codebook_size;
  out.per_label_mass.assign(out.label_count, 0.0);
  for (const auto& in : inputs) {
    if (in.label_count != out.label_count || in.codebook_size != out.codebook_size) {
      throw ValidationError("regional distributions differ in label count or codebook size");
    }
  }
  for (std::size_t j = 0; j < out.label_count; ++j) {
    // Entries backed by observations win over smoothing-only entries from
    // inputs where the label had no area.
    std::vector<CategoricalDistribution> observed;
    std::vector<CategoricalDistribution> smoothing_only;
    for (const auto& in : inputs) {
      out.per_label_mass[j] += in.per_label_mass[j];
      if (!in.per_label[j]) continue;
      (in.per_label[j]->source_mass() > 0.0 ? observed : smoothing_only)
          .push_back(*in.per_label[j]);
    }
    if (!observed.empty()) {
      out.per_label.emplace_back(average_distributions(observed, weighting));
    } else if (!smoothing_only.empty()) {
      out.per_label.emplace_back(average_distributions(smoothing_only, Weighting::uniform));
    } else {
      out.per_label.emplace_back(std::nullopt);
    }
  }
  return out;
}

SpatialDistributions average_spatial(std::span<const SpatialDistributions> inputs,
                                     Weighting weighting) {
  if (inputs.empty()) throw ValidationError("cannot average an empty list of spatial tables");
  SpatialDistributions out;
  out.tiling = inputs.front().tiling;
  for (const auto& in : inputs) {
    if (in.tiling.rows != out.tiling.rows || in.tiling.cols != out.tiling.cols) {
      throw ValidationError("spatial distributions differ in cell tiling");
    }
  }
  std::vector<CategoricalDistribution> column;
  for (std::size_t c = 0; c < out.tiling.cell_count(); ++c) {
    column.clear();
    for (const auto& in : inputs) column.push_back(in.per_cell[c]);
    out.per_cell.push_back(average_distributions(column, weighting));
  }
  return out;
}

InMemorySceneSource InMemorySceneSource::from_grids(std::span<const TokenGrid> grids) {
  std::vector<Scene> scenes;
  scenes.reserve(grids.size());
  for (const auto& g : grids) scenes.push_back(Scene{g, std::nullopt});
  return InMemorySceneSource(std::move(scenes));
}

std::vector<std::size_t> monte_carlo_indices(std::size_t corpus_size, std::size_t k,
                                             std::uint64_t seed) {
  if (k == 0) throw ValidationError("Monte-Carlo sample count K must be positive");
  if (corpus_size == 0) throw ValidationError("cannot sample from an empty corpus");
  rng::CounterStream stream(seed);
  std::vector<std::size_t> idx(k);
  for (auto& i : idx) i = static_cast<std::size_t>(stream.next_below(corpus_size));
  return idx;
}

CategoricalDistribution monte_carlo_dataset_distribution(const SceneSource& source, std::size_t k,
                                                         double smoothing_alpha,
                                                         std::uint64_t seed) {
  check_alpha(smoothing_alpha);
  std::vector<CategoricalDistribution> per_grid;
  per_grid.reserve(k);
  for (std::size_t i : monte_carlo_indices(source.size(), k, seed)) {
    per_grid.push_back(histogram_from_grid(source.load(i).tokens, smoothing_alpha));
  }
  return average_distributions(per_grid, Weighting::uniform);
}

RegionalDistributions monte_carlo_regional_distribution(const SceneSource& source, std::size_t k,
                                                        double smoothing_alpha,
                                                        std::uint64_t seed) {
  check_alpha(smoothing_alpha);
  std::vector<RegionalDistributions> per_grid;
  per_grid.reserve(k);
  for (std::size_t i : monte_carlo_indices(source.size(), k, seed)) {
    Scene s = source.load(i);
    if (!s.semantics) {
      throw ValidationError("scene " + std::to_string(i) + " has no semantic grid");
    }
    per_grid.push_back(histogram_by_region(s.tokens, *s.semantics, smoothing_alpha));
  }
  return average_regional(per_grid, Weighting::uniform);
}

SpatialDistributions monte_carlo_spatial_distribution(const SceneSource& source, std::size_t k,
                                                      CellTiling tiling, double smoothing_alpha,
                                                      std::uint64_t seed) {
  check_alpha(smoothing_alpha);
  std::vector<SpatialDistributions> per_grid;
  per_grid.reserve(k);
  for (std::size_t i : monte_carlo_indices(source.size(), k, seed)) {
    const TokenGrid g = source.load(i).tokens;
    per_grid.push_back(histogram_by_cell(std::span(&g, 1), tiling, smoothing_alpha));
  }
  return average_spatial(per_grid, Weighting::uniform);
}

}  // namespace gcs
