#include "gcs/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace gcs {
namespace {

void check_exponent(double exponent) {
  if (!std::isfinite(exponent) || exponent < 0.0) {
    throw ValidationError("guidance exponent must be finite and >= 0");
  }
}

void check_positive(const CategoricalDistribution& d, const char* which) {
  for (std::size_t i = 0; i < d.codebook_size(); ++i) {
    if (!(d[i] > 0.0)) {
      std::ostringstream msg;
      msg << which << " distribution has zero probability at index " << i
          << "; estimate it with a positive smoothing alpha";
      throw ValidationError(msg.str());
    }
  }
}

}  // namespace

LikelihoodVector::LikelihoodVector(std::vector<double> w) : weights_(std::move(w)) {
  identity_ = std::all_of(weights_.begin(), weights_.end(), [](double x) { return x == 1.0; });
}

LikelihoodVector LikelihoodVector::from_weights(std::vector<double> weights) {
  CodebookSpec spec(weights.size());
  double max = 0.0;
  for (std::size_t i = 0; i < spec.size; ++i) {
    if (!std::isfinite(weights[i]) || !(weights[i] > 0.0)) {
      std::ostringstream msg;
      msg << "likelihood weight " << i << " must be finite and > 0, got " << weights[i];
      throw ValidationError(msg.str());
    }
    max = std::max(max, weights[i]);
  }
  for (double& w : weights) w /= max;
  for (std::size_t i = 0; i < spec.size; ++i) {
    if (!(weights[i] > 0.0)) {
      throw ValidationError("likelihood weight " + std::to_string(i) +
                            " underflows after max-normalization; lower the exponent");
    }
  }
  return LikelihoodVector(std::move(weights));
}

LikelihoodVector LikelihoodVector::identity(std::size_t codebook_size) {
  CodebookSpec spec(codebook_size);
  return LikelihoodVector(std::vector<double>(spec.size, 1.0));
}

const char* to_string(GuidanceMode mode) {
  switch (mode) {
    case GuidanceMode::global: return "global";
    case GuidanceMode::regional: return "regional";
    case GuidanceMode::spatial: return "spatial";
  }
  return "global";
}

GuidanceMode guidance_mode_from_string(std::string_view name) {
  if (name == "global") return GuidanceMode::global;
  if (name == "regional") return GuidanceMode::regional;
  if (name == "spatial") return GuidanceMode::spatial;
  throw ValidationError("unknown guidance mode '" + std::string(name) + "'");
}

LikelihoodTable::LikelihoodTable(GuidanceMode mode, LikelihoodVector global, double exponent)
    : mode_(mode), global_(std::move(global)), exponent_(exponent) {
  check_exponent(exponent);
}

LikelihoodTable LikelihoodTable::make_global(LikelihoodVector global, double exponent) {
  return LikelihoodTable(GuidanceMode::global, std::move(global), exponent);
}

LikelihoodTable LikelihoodTable::make_regional(
    LikelihoodVector global, std::vector<std::optional<LikelihoodVector>> per_label,
    double exponent) {
  LikelihoodTable t(GuidanceMode::regional, std::move(global), exponent);
  if (per_label.empty()) throw ValidationError("regional table needs at least one label");
  for (const auto& v : per_label) {
    if (v && v->codebook_size() != t.codebook_size()) {
      throw ValidationError("regional likelihood has wrong codebook size");
    }
  }
  t.regional_ = std::move(per_label);
  return t;
}

LikelihoodTable LikelihoodTable::make_spatial(LikelihoodVector global, CellTiling tiling,
                                              std::vector<LikelihoodVector> per_cell,
                                              double exponent) {
  LikelihoodTable t(GuidanceMode::spatial, std::move(global), exponent);
  if (tiling.rows == 0 || tiling.cols == 0 || per_cell.size() != tiling.cell_count()) {
    throw ValidationError("spatial table needs rows*cols cell vectors");
  }
  for (const auto& v : per_cell) {
    if (v.codebook_size() != t.codebook_size()) {
      throw ValidationError("spatial likelihood has wrong codebook size");
    }
  }
  t.tiling_ = tiling;
  t.spatial_ = std::move(per_cell);
  return t;
}

LikelihoodVector style_likelihood(const CategoricalDistribution& style,
                                  const CategoricalDistribution& dataset, double exponent) {
  check_exponent(exponent);
  if (style.codebook_size() != dataset.codebook_size()) {
    throw ValidationError("codebook size mismatch between style and dataset distributions");
  }
  check_positive(style, "style");
  check_positive(dataset, "dataset");
  std::vector<double> ratio(style.codebook_size());
  for (std::size_t i = 0; i < ratio.size(); ++i) ratio[i] = style[i] / dataset[i];
  if (exponent == 0.0) {
    return LikelihoodVector::identity(ratio.size());
  }
  // Max-normalize before exponentiation so large exponents cannot overflow.
  const double max = *std::max_element(ratio.begin(), ratio.end());
  for (double& r : ratio) r = exponent == 1.0 ? r / max : std::pow(r / max, exponent);
  return LikelihoodVector::from_weights(std::move(ratio));
}

CategoricalDistribution rebalance_prior(const CategoricalDistribution& prior,
                                        const LikelihoodVector& likelihood) {
  if (prior.codebook_size() != likelihood.codebook_size()) {
    throw ValidationError("codebook size mismatch between prior and likelihood");
  }
  if (likelihood.is_identity()) return prior;
  std::vector<double> post(prior.codebook_size());
  for (std::size_t i = 0; i < post.size(); ++i) post[i] = prior[i] * likelihood[i];
  return normalize(post);
}

LikelihoodTable regional_likelihoods(const RegionalDistributions& style_regional,
                                     const RegionalDistributions& dataset_regional,
                                     const CategoricalDistribution& style_global,
                                     const CategoricalDistribution& dataset_global,
                                     double exponent) {
  if (style_regional.label_count != dataset_regional.label_count) {
    throw ValidationError("label count mismatch: style has " +
                          std::to_string(style_regional.label_count) + ", dataset has " +
                          std::to_string(dataset_regional.label_count));
  }
  if (style_regional.codebook_size != dataset_regional.codebook_size ||
      style_regional.codebook_size != style_global.codebook_size()) {
    throw ValidationError("codebook size mismatch between regional distributions");
  }
  auto fallback = style_likelihood(style_global, dataset_global, exponent);
  std::vector<std::optional<LikelihoodVector>> per_label;
  per_label.reserve(style_regional.label_count);
  for (std::size_t j = 0; j < style_regional.label_count; ++j) {
    if (style_regional.has(j) && dataset_regional.has(j)) {
      per_label.emplace_back(
          style_likelihood(*style_regional.per_label[j], *dataset_regional.per_label[j], exponent));
    } else {
      per_label.emplace_back(std::nullopt);
    }
  }
  return LikelihoodTable::make_regional(std::move(fallback), std::move(per_label), exponent);
}

LikelihoodTable spatial_likelihoods(const SpatialDistributions& style_spatial,
                                    const SpatialDistributions& dataset_spatial,
                                    const CategoricalDistribution& style_global,
                                    const CategoricalDistribution& dataset_global,
                                    double exponent) {
  if (style_spatial.tiling.rows != dataset_spatial.tiling.rows ||
      style_spatial.tiling.cols != dataset_spatial.tiling.cols) {
    throw ValidationError("cell tiling mismatch between style and dataset statistics");
  }
  auto fallback = style_likelihood(style_global, dataset_global, exponent);
  std::vector<LikelihoodVector> cells;
  cells.reserve(style_spatial.per_cell.size());
  for (std::size_t c = 0; c < style_spatial.per_cell.size(); ++c) {
    cells.push_back(
        style_likelihood(style_spatial.per_cell[c], dataset_spatial.per_cell[c], exponent));
  }
  return LikelihoodTable::make_spatial(std::move(fallback), style_spatial.tiling,
                                       std::move(cells), exponent);
}

GuidanceMode GuidanceStatistics::natural_mode() const {
  if (spatial) return GuidanceMode::spatial;
  if (regional) return GuidanceMode::regional;
  return GuidanceMode::global;
}

LikelihoodTable build_likelihood_table(const GuidanceStatistics& style,
                                       const GuidanceStatistics& dataset,
                                       std::optional<GuidanceMode> mode, double exponent) {
  if (!mode) {
    if (style.natural_mode() != dataset.natural_mode()) {
      throw ValidationError(std::string("style statistics are ") + to_string(style.natural_mode()) +
                            " but dataset statistics are " + to_string(dataset.natural_mode()));
    }
    mode = style.natural_mode();
  }
  switch (*mode) {
    case GuidanceMode::global:
      return LikelihoodTable::make_global(style_likelihood(style.global, dataset.global, exponent),
                                          exponent);
    case GuidanceMode::regional:
      if (!style.regional || !dataset.regional) {
        throw ValidationError("regional guidance needs per-label style and dataset statistics");
      }
      return regional_likelihoods(*style.regional, *dataset.regional, style.global,
                                  dataset.global, exponent);
    case GuidanceMode::spatial:
      if (!style.spatial || !dataset.spatial) {
        throw ValidationError("spatial guidance needs per-cell style and dataset statistics");
      }
      return spatial_likelihoods(*style.spatial, *dataset.spatial, style.global, dataset.global,
                                 exponent);
  }
  throw ValidationError("unknown guidance mode");
}

const LikelihoodVector& select_likelihood(const LikelihoodTable& table, Position position,
                                          std::size_t height, std::size_t width,
                                          const SemanticGrid* semantics) {
  if (position.row >= height || position.col >= width) {
    std::ostringstream msg;
    msg << "position (" << position.row << "," << position.col << ") outside " << height << "x"
        << width << " grid";
    throw ValidationError(msg.str());
  }
  switch (table.mode()) {
    case GuidanceMode::global:
      return table.global();
    case GuidanceMode::regional: {
      if (semantics == nullptr) {
        throw ValidationError("regional guidance requires a semantic grid");
      }
      if (!semantics->same_shape(height, width)) {
        throw ValidationError("semantic grid does not cover the generated grid");
      }
      const Label j = semantics->at(position);
      const auto& per_label = table.regional();
      if (j < per_label.size() && per_label[j]) return *per_label[j];
      return table.global();
    }
    case GuidanceMode::spatial:
      return table.spatial()[table.tiling().cell_of(position, height, width)];
  }
  return table.global();
}

}  // namespace gcs
