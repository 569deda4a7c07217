#pragma once

// Synthetic token-space benchmark: parametric styles rendered over semantic
// layouts. Stands in for an encoded image corpus with known ground truth.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gcs/core.hpp"

namespace gcs::world {

/// Per-label token distributions plus a horizontal left-copy coherence.
struct StyleSpec {
  std::string name;
  std::vector<CategoricalDistribution> per_label;
  /// Probability that a token copies its left neighbour of the same label.
  double coherence = 0.0;

  void validate() const;
};

enum class LayoutKind { horizon, bands, constant };

struct LayoutSpec {
  LayoutKind kind = LayoutKind::constant;
  std::size_t label_count = 1;
  /// horizon: first row of label 1 is drawn uniformly from
  /// [min_fraction * H, max_fraction * H].
  double min_fraction = 0.25;
  double max_fraction = 0.75;
  /// bands: number of equal floor-partitioned bands; band b gets label b % label_count.
  std::size_t bands = 2;
  /// constant: the single label.
  Label label = 0;

  void validate() const;
};

const char* to_string(LayoutKind kind);
LayoutKind layout_kind_from_string(std::string_view name);

SemanticGrid generate_layout(const LayoutSpec& layout, std::size_t height, std::size_t width,
                             std::uint64_t seed);

/// Layout and tokens of one scene; a pure function of the seed.
Scene generate_scene(const StyleSpec& style, const LayoutSpec& layout, std::size_t height,
                     std::size_t width, std::uint64_t seed);

struct BenchmarkConfig {
  std::string name;
  std::size_t codebook_size = 0;
  std::size_t label_count = 1;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t corpus_size = 0;
  std::size_t exemplars_per_style = 0;
  std::uint64_t seed = 0;
  std::vector<StyleSpec> styles;
  std::vector<double> mixture_weights;
  std::vector<LayoutSpec> layouts;

  void validate() const;
  /// Non-fatal findings, e.g. styles whose per-label distributions overlap heavily.
  std::vector<std::string> warnings() const;
};

struct GeneratedScene {
  Scene scene;
  std::size_t style = 0;
  std::uint64_t seed = 0;
};

struct Benchmark {
  BenchmarkConfig config;
  std::vector<GeneratedScene> corpus;
  /// exemplars[s] are held-out scenes of style s.
  std::vector<std::vector<GeneratedScene>> exemplars;
};

Benchmark generate_benchmark(const BenchmarkConfig& config);

/// |Z| = 32, sky/ground labels, four styles pairing two sky palettes with two
/// ground palettes, horizon layouts, 2000 scenes of 32 x 32.
BenchmarkConfig landscape_2x4();

/// Two styles with the same global histogram that differ only in which half
/// of the grid holds which palette (two horizontal bands).
BenchmarkConfig arrangement_swap();

BenchmarkConfig preset(std::string_view name);

/// Writes corpus/scene_NNNNN.{tgrd,sgrd}, exemplars/<style>/exemplar_NNN.{tgrd,sgrd}
/// and manifest.json under `out_dir`. Returns the manifest path.
std::filesystem::path write_benchmark(const Benchmark& bench, const std::filesystem::path& out_dir);

std::filesystem::path make_benchmark(const BenchmarkConfig& config,
                                     const std::filesystem::path& out_dir);

}  // namespace gcs::world
