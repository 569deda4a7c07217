#pragma once

// Style likelihoods and prior re-balancing.
//
// A likelihood vector is the element-wise ratio style / dataset raised to a
// guidance exponent. Multiplying a per-step prior by it and renormalizing
// gives the style-guided posterior. Tables hold one global vector and,
// optionally, vectors per semantic label or per spatial cell.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gcs/core.hpp"
#include "gcs/distributions.hpp"

namespace gcs {

/// Strictly positive finite weights over the codebook, defined up to scale.
/// Stored with the largest weight equal to 1.
class LikelihoodVector {
 public:
  /// Max-normalizes `weights`; throws unless all are finite and > 0.
  static LikelihoodVector from_weights(std::vector<double> weights);
  static LikelihoodVector identity(std::size_t codebook_size);

  std::size_t codebook_size() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }

  /// True when every weight is exactly 1, i.e. guidance is a no-op.
  bool is_identity() const { return identity_; }

  friend bool operator==(const LikelihoodVector& a, const LikelihoodVector& b) {
    return a.weights_ == b.weights_;
  }

 private:
  explicit LikelihoodVector(std::vector<double> w);

  std::vector<double> weights_;
  bool identity_ = false;
};

enum class GuidanceMode { global, regional, spatial };

const char* to_string(GuidanceMode mode);
GuidanceMode guidance_mode_from_string(std::string_view name);

class LikelihoodTable {
 public:
  static LikelihoodTable make_global(LikelihoodVector global, double exponent = 1.0);
  /// Labels without a vector fall back to `global`.
  static LikelihoodTable make_regional(LikelihoodVector global,
                                       std::vector<std::optional<LikelihoodVector>> per_label,
                                       double exponent = 1.0);
  static LikelihoodTable make_spatial(LikelihoodVector global, CellTiling tiling,
                                      std::vector<LikelihoodVector> per_cell,
                                      double exponent = 1.0);

  GuidanceMode mode() const { return mode_; }
  double exponent() const { return exponent_; }
  std::size_t codebook_size() const { return global_.codebook_size(); }
  const LikelihoodVector& global() const { return global_; }
  const std::vector<std::optional<LikelihoodVector>>& regional() const { return regional_; }
  const CellTiling& tiling() const { return tiling_; }
  const std::vector<LikelihoodVector>& spatial() const { return spatial_; }

  friend bool operator==(const LikelihoodTable&, const LikelihoodTable&) = default;

 private:
  LikelihoodTable(GuidanceMode mode, LikelihoodVector global, double exponent);

  GuidanceMode mode_;
  LikelihoodVector global_;
  double exponent_;
  std::vector<std::optional<LikelihoodVector>> regional_;
  CellTiling tiling_;
  std::vector<LikelihoodVector> spatial_;
};

/// (style / dataset) ^ exponent, max-normalized. Both inputs must be strictly
/// positive; zero entries usually mean the estimate was built with alpha = 0.
LikelihoodVector style_likelihood(const CategoricalDistribution& style,
                                  const CategoricalDistribution& dataset, double exponent = 1.0);

/// prior * weights, renormalized.
CategoricalDistribution rebalance_prior(const CategoricalDistribution& prior,
                                        const LikelihoodVector& likelihood);

LikelihoodTable regional_likelihoods(const RegionalDistributions& style_regional,
                                     const RegionalDistributions& dataset_regional,
                                     const CategoricalDistribution& style_global,
                                     const CategoricalDistribution& dataset_global,
                                     double exponent = 1.0);

LikelihoodTable spatial_likelihoods(const SpatialDistributions& style_spatial,
                                    const SpatialDistributions& dataset_spatial,
                                    const CategoricalDistribution& style_global,
                                    const CategoricalDistribution& dataset_global,
                                    double exponent = 1.0);

/// Estimated statistics for one side of the likelihood ratio: always a global
/// distribution, plus at most one partitioned variant.
struct GuidanceStatistics {
  CategoricalDistribution global;
  std::optional<RegionalDistributions> regional;
  std::optional<SpatialDistributions> spatial;

  /// spatial if per-cell statistics are present, regional if per-label, else global.
  GuidanceMode natural_mode() const;
};

/// Builds the table for `mode`, or for the statistics' shared natural mode
/// when no mode is given. Mismatched shapes are rejected rather than
/// silently falling back to global guidance.
LikelihoodTable build_likelihood_table(const GuidanceStatistics& style,
                                       const GuidanceStatistics& dataset,
                                       std::optional<GuidanceMode> mode, double exponent = 1.0);

/// Vector that applies at `position` of a height x width grid.
const LikelihoodVector& select_likelihood(const LikelihoodTable& table, Position position,
                                          std::size_t height, std::size_t width,
                                          const SemanticGrid* semantics);

}  // namespace gcs
