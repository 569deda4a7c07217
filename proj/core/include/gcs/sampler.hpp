#pragma once

// The autoregressive generation loop.
//
// Every step runs prior -> guidance -> temperature -> top-k and then draws
// one token by inverse CDF. The uniform for raster position i is the i-th
// value of the counter stream keyed by the sample seed, so a step's draw
// does not depend on how earlier steps were computed.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "gcs/core.hpp"
#include "gcs/guidance.hpp"
#include "gcs/prior.hpp"

namespace gcs {

struct SamplingConfig {
  double temperature = 1.0;
  std::optional<std::size_t> top_k;
  std::uint64_t seed = 0;
  std::shared_ptr<const LikelihoodTable> guidance;

  /// Throws unless temperature > 0 and 1 <= top_k <= codebook_size.
  void validate(std::size_t codebook_size) const;
};

/// p^(1/temperature), renormalized.
CategoricalDistribution apply_temperature(const CategoricalDistribution& dist, double temperature);

/// Keeps the k largest entries (ties prefer the lower index) and renormalizes.
CategoricalDistribution apply_top_k(const CategoricalDistribution& dist, std::size_t k);

CategoricalDistribution step_posterior(const CategoricalDistribution& prior,
                                       const SamplingConfig& config, Position position,
                                       std::size_t height, std::size_t width,
                                       const SemanticGrid* semantics);

/// Smallest index i with p_i > 0 and u <= cdf_i, for u in [0, 1).
Token sample_inverse_cdf(std::span<const double> probs, double u);

TokenGrid sample_grid(const PriorModel& model, std::size_t height, std::size_t width,
                      const SemanticGrid* semantics, const SamplingConfig& config);

/// Seed used by sample `index` of a batch.
std::uint64_t batch_seed(std::uint64_t base_seed, std::size_t index);

/// n samples with seeds batch_seed(config.seed, i), all on the same semantics.
std::vector<TokenGrid> batch_sample(const PriorModel& model, std::size_t height,
                                    std::size_t width, const SemanticGrid* semantics,
                                    const SamplingConfig& base_config, std::size_t n);

/// One semantic grid per sample; n = semantics.size().
std::vector<TokenGrid> batch_sample(const PriorModel& model, std::size_t height,
                                    std::size_t width, std::span<const SemanticGrid> semantics,
                                    const SamplingConfig& base_config);

}  // namespace gcs
