#include "gcs/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace gcs {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_same_size(const CategoricalDistribution& p, const CategoricalDistribution& q) {
  if (p.codebook_size() != q.codebook_size()) {
    throw ValidationError("codebook size mismatch: " + std::to_string(p.codebook_size()) +
                          " vs " + std::to_string(q.codebook_size()));
  }
}

/// Pooled per-partition counts of a sample set.
struct PartitionCounts {
  std::vector<std::vector<std::uint64_t>> counts;
  std::vector<double> mass;
};

PartitionCounts pool(std::span<const Scene> samples, const StyleReference& target,
                     Partition partition) {
  const std::size_t n = target.stats.global.codebook_size();
  std::size_t parts = 1;
  if (partition == Partition::regional) {
    if (!target.stats.regional) {
      throw ValidationError("reference '" + target.name + "' has no per-label statistics");
    }
    parts = target.stats.regional->label_count;
  } else if (partition == Partition::spatial) {
    if (!target.stats.spatial) {
      throw ValidationError("reference '" + target.name + "' has no per-cell statistics");
    }
    parts = target.stats.spatial->tiling.cell_count();
  }
  PartitionCounts pc{std::vector<std::vector<std::uint64_t>>(parts, std::vector<std::uint64_t>(n)),
                     std::vector<double>(parts, 0.0)};
  for (const auto& s : samples) {
    const auto& g = s.tokens;
    if (g.codebook_size() != n) {
      throw ValidationError("sample codebook size " + std::to_string(g.codebook_size()) +
                            " does not match reference '" + target.name + "'");
    }
    if (partition == Partition::regional) {
      if (!s.semantics) throw ValidationError("regional evaluation needs sample semantics");
      require_same_shape(g, *s.semantics);
    }
    for (std::size_t r = 0; r < g.height(); ++r) {
      for (std::size_t c = 0; c < g.width(); ++c) {
        std::size_t part = 0;
        if (partition == Partition::regional) {
          part = s.semantics->at(r, c);
          if (part >= parts) throw ValidationError("sample label exceeds reference label count");
        } else if (partition == Partition::spatial) {
          part = target.stats.spatial->tiling.cell_of({r, c}, g.height(), g.width());
        }
        ++pc.counts[part][g.at(r, c)];
        pc.mass[part] += 1.0;
      }
    }
  }
  return pc;
}

const CategoricalDistribution& reference_part(const StyleReference& target, Partition partition,
                                              std::size_t part) {
  switch (partition) {
    case Partition::global:
      return target.stats.global;
    case Partition::regional: {
      const auto& r = *target.stats.regional;
      if (!r.has(Label(part))) {
        throw ValidationError("reference '" + target.name + "' lacks label " +
                              std::to_string(part) + " present in the samples");
      }
      return *r.per_label[part];
    }
    case Partition::spatial:
      return target.stats.spatial->per_cell[part];
  }
  return target.stats.global;
}

Divergence divergence_from_counts(const PartitionCounts& pc, const StyleReference& target,
                                  Partition partition) {
  Divergence d;
  double total = 0.0;
  for (double m : pc.mass) total += m;
  if (total == 0.0) throw ValidationError("cannot measure divergence of an empty sample set");
  for (std::size_t part = 0; part < pc.counts.size(); ++part) {
    if (pc.mass[part] == 0.0) {
      if (partition != Partition::global) {
        d.part_kl.push_back(kNaN);
        d.part_tv.push_back(kNaN);
      }
      continue;
    }
    const auto hist = smoothed_distribution(pc.counts[part], 0.0);
    const auto& ref = reference_part(target, partition, part);
    const double kl = kl_divergence(hist, ref);
    const double tv = total_variation(hist, ref);
    const double w = pc.mass[part] / total;
    d.kl += w * kl;
    d.tv += w * tv;
    if (partition != Partition::global) {
      d.part_kl.push_back(kl);
      d.part_tv.push_back(tv);
    }
  }
  return d;
}

SetReport set_report(std::span<const Scene> samples, const StyleReference& target,
                     Partition partition, std::span<const std::uint64_t> seeds) {
  if (samples.empty()) throw ValidationError("sample set is empty");
  SetReport rep;
  rep.pooled = divergence_to_reference(samples, target, partition);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    SampleMetrics m;
    m.id = i;
    m.seed = i < seeds.size() ? seeds[i] : 0;
    m.divergence = divergence_to_reference(samples.subspan(i, 1), target, partition);
    rep.mean_sample_kl += m.divergence.kl / double(samples.size());
    rep.per_sample.push_back(std::move(m));
  }
  return rep;
}

}  // namespace

double kl_divergence(const CategoricalDistribution& p, const CategoricalDistribution& q) {
  check_same_size(p, q);
  double kl = 0.0;
  for (std::size_t i = 0; i < p.codebook_size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) {
      throw ValidationError("q lacks support at index " + std::to_string(i));
    }
    kl += p[i] * std::log(p[i] / q[i]);
  }
  // Rounding can leave tiny negative values for p close to q.
  return kl < 0.0 ? 0.0 : kl;
}

double total_variation(const CategoricalDistribution& p, const CategoricalDistribution& q) {
  check_same_size(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.codebook_size(); ++i) s += std::abs(p[i] - q[i]);
  return std::min(1.0, 0.5 * s);
}

StyleReference make_reference(std::string name, std::span<const Scene> exemplars, double alpha,
                              std::optional<CellTiling> tiling) {
  if (exemplars.empty()) throw ValidationError("style '" + name + "' has no exemplars");
  std::vector<CategoricalDistribution> global;
  std::vector<RegionalDistributions> regional;
  std::vector<SpatialDistributions> spatial;
  bool all_semantic = true;
  for (const auto& e : exemplars) {
    global.push_back(histogram_from_grid(e.tokens, alpha));
    if (e.semantics) {
      regional.push_back(histogram_by_region(e.tokens, *e.semantics, alpha));
    } else {
      all_semantic = false;
    }
    if (tiling) spatial.push_back(histogram_by_cell(std::span(&e.tokens, 1), *tiling, alpha));
  }
  StyleReference ref{std::move(name),
                     GuidanceStatistics{average_distributions(global), std::nullopt, std::nullopt}};
  if (tiling) {
    ref.stats.spatial = average_spatial(spatial);
  } else if (all_semantic) {
    ref.stats.regional = average_regional(regional);
  }
  return ref;
}

Divergence divergence_to_reference(std::span<const Scene> samples, const StyleReference& target,
                                   Partition partition) {
  return divergence_from_counts(pool(samples, target, partition), target, partition);
}

StyleMatchResult style_match_rate(std::span<const Scene> samples,
                                  std::span<const StyleReference> references,
                                  Partition partition, std::span<const std::size_t> expected) {
  if (references.size() < 2) throw ValidationError("style matching needs at least 2 references");
  if (!expected.empty() && expected.size() != samples.size()) {
    throw ValidationError("expected styles must be given for every sample");
  }
  StyleMatchResult out;
  out.assigned_counts.assign(references.size(), 0);
  if (!expected.empty()) {
    out.confusion.assign(references.size(), std::vector<std::size_t>(references.size(), 0));
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::size_t best = 0;
    double best_kl = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < references.size(); ++r) {
      const double kl = divergence_to_reference(samples.subspan(i, 1), references[r], partition).kl;
      if (kl < best_kl) {
        best_kl = kl;
        best = r;
      }
    }
    out.assigned.push_back(best);
    ++out.assigned_counts[best];
    if (!expected.empty()) {
      if (expected[i] >= references.size()) throw ValidationError("expected style out of range");
      ++out.confusion[expected[i]][best];
      hits += expected[i] == best;
    }
  }
  out.accuracy = expected.empty() || samples.empty() ? kNaN : double(hits) / double(samples.size());
  return out;
}

double relative_reduction(double guided, double unguided) {
  if (std::isnan(guided) || std::isnan(unguided)) return kNaN;
  if (unguided == 0.0) return 0.0;
  return 1.0 - guided / unguided;
}

GuidanceReport guidance_report(std::span<const Scene> guided, std::span<const Scene> unguided,
                               const StyleReference& target, Partition partition,
                               std::span<const std::uint64_t> guided_seeds,
                               std::span<const std::uint64_t> unguided_seeds) {
  GuidanceReport rep;
  rep.partition = partition;
  rep.guided = set_report(guided, target, partition, guided_seeds);
  rep.unguided = set_report(unguided, target, partition, unguided_seeds);
  rep.kl_reduction = relative_reduction(rep.guided.pooled.kl, rep.unguided.pooled.kl);
  for (std::size_t p = 0; p < rep.guided.pooled.part_kl.size(); ++p) {
    rep.part_kl_reduction.push_back(
        relative_reduction(rep.guided.pooled.part_kl[p], rep.unguided.pooled.part_kl[p]));
  }
  return rep;
}

}  // namespace gcs
