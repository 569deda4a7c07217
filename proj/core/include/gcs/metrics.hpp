#pragma once

// Token-space divergences and style-match evaluation.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gcs/core.hpp"
#include "gcs/distributions.hpp"
#include "gcs/guidance.hpp"

namespace gcs {

/// KL(p || q) = sum p ln(p / q) with 0 ln(0 / q) = 0. Throws if q lacks
/// support where p has mass.
double kl_divergence(const CategoricalDistribution& p, const CategoricalDistribution& q);

double total_variation(const CategoricalDistribution& p, const CategoricalDistribution& q);

/// Reference statistics of one style. References must have full support.
struct StyleReference {
  std::string name;
  GuidanceStatistics stats;
};

/// Builds a reference from exemplar scenes: uniform average of per-exemplar
/// histograms smoothed with `alpha`, plus per-label averages when every
/// exemplar carries semantics, or per-cell averages when a tiling is given.
StyleReference make_reference(std::string name, std::span<const Scene> exemplars, double alpha,
                              std::optional<CellTiling> tiling = std::nullopt);

/// Partition a divergence is measured over.
enum class Partition { global, regional, spatial };

struct Divergence {
  double kl = 0.0;
  double tv = 0.0;
  /// Per label (regional) or per cell (spatial) KL; empty for global. NaN
  /// marks partitions with no sample mass.
  std::vector<double> part_kl;
  std::vector<double> part_tv;
};

/// Divergence of a pooled token sample from a reference. Sample histograms
/// use alpha = 0. Regional and spatial KL are the mass-weighted sums of the
/// per-partition KLs.
Divergence divergence_to_reference(std::span<const Scene> samples, const StyleReference& target,
                                   Partition partition);

struct StyleMatchResult {
  std::vector<std::size_t> assigned;
  /// confusion[expected][assigned]; only filled when expected styles are given.
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<std::size_t> assigned_counts;
  /// Fraction of samples assigned to their expected style (NaN without expectations).
  double accuracy = 0.0;
};

/// Classifies each sample to the reference with the smallest KL(sample || reference);
/// ties go to the lowest style index.
StyleMatchResult style_match_rate(std::span<const Scene> samples,
                                  std::span<const StyleReference> references,
                                  Partition partition,
                                  std::span<const std::size_t> expected = {});

struct SampleMetrics {
  std::size_t id = 0;
  std::uint64_t seed = 0;
  Divergence divergence;
};

struct SetReport {
  Divergence pooled;
  std::vector<SampleMetrics> per_sample;
  double mean_sample_kl = 0.0;
};

struct GuidanceReport {
  Partition partition = Partition::global;
  SetReport guided;
  SetReport unguided;
  /// 1 - KL_guided / KL_unguided on pooled histograms; 0 when KL_unguided is 0.
  double kl_reduction = 0.0;
  /// Same for every label (regional) or cell (spatial).
  std::vector<double> part_kl_reduction;
};

double relative_reduction(double guided, double unguided);

GuidanceReport guidance_report(std::span<const Scene> guided, std::span<const Scene> unguided,
                               const StyleReference& target, Partition partition,
                               std::span<const std::uint64_t> guided_seeds = {},
                               std::span<const std::uint64_t> unguided_seeds = {});

}  // namespace gcs
