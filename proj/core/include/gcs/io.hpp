#pragma once

// On-disk formats.
//
// TGRD / SGRD grids: "TGRD"|"SGRD", u16 version = 1, u16 reserved = 0,
// u32 height, u32 width, u32 bound (codebook size or label count), then
// height * width u32 values, all little-endian and row-major.
//
// Everything else is JSON. Doubles are written in shortest round-trip form,
// so reading a file back reproduces the probabilities bit for bit.
//
// Malformed content raises ValidationError naming the offending key;
// filesystem failures raise IoError.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gcs/core.hpp"
#include "gcs/distributions.hpp"
#include "gcs/guidance.hpp"
#include "gcs/prior.hpp"
#include "gcs/world.hpp"

namespace gcs::io {

std::vector<std::uint8_t> encode_token_grid(const TokenGrid& grid);
std::vector<std::uint8_t> encode_semantic_grid(const SemanticGrid& grid);
TokenGrid decode_token_grid(std::span<const std::uint8_t> bytes);
SemanticGrid decode_semantic_grid(std::span<const std::uint8_t> bytes);

void write_token_grid(const std::filesystem::path& path, const TokenGrid& grid);
void write_semantic_grid(const std::filesystem::path& path, const SemanticGrid& grid);
TokenGrid read_token_grid(const std::filesystem::path& path);
SemanticGrid read_semantic_grid(const std::filesystem::path& path);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

/// {"codebook_size": N, "probs": [...], "source_mass": M}
std::string to_json(const CategoricalDistribution& dist);
CategoricalDistribution distribution_from_json(std::string_view text);

/// {"label_count": J, "codebook_size": N, "per_label": [dist-or-null, ...], "per_label_mass": [...]}
std::string to_json(const RegionalDistributions& regional);
RegionalDistributions regional_from_json(std::string_view text);

/// {"cell_rows": R, "cell_cols": C, "per_cell": [[dist, ...], ...]}
std::string to_json(const SpatialDistributions& spatial);
SpatialDistributions spatial_from_json(std::string_view text);

/// Global statistics are written as a plain distribution; partitioned ones
/// as their regional/spatial document with an extra "global" member.
std::string to_json(const GuidanceStatistics& stats);
/// Infers the shape from the keys present. A partitioned document without
/// "global" gets the mass-weighted mean of its partitions.
GuidanceStatistics statistics_from_json(std::string_view text);

/// {"mode", "exponent", "global": [...], "regional": [...]|null, "spatial": {...}|null}
std::string to_json(const LikelihoodTable& table);
LikelihoodTable likelihood_table_from_json(std::string_view text);

/// {"codebook_size", "context": [[dr, dc], ...], "conditional", "smoothing_alpha",
///  "tables": [{"context": [token or "B", ...], "label": L|null, "counts": {token: n}}]}
std::string to_json(const MarkovGridPrior& model);
MarkovGridPrior markov_prior_from_json(std::string_view text);

std::string to_json(const world::BenchmarkConfig& config);
world::BenchmarkConfig benchmark_config_from_json(std::string_view text);

struct ManifestEntry {
  std::filesystem::path tokens;
  std::optional<std::filesystem::path> semantics;
  std::string style;
  std::uint64_t seed = 0;
};

struct CorpusManifest {
  std::string name;
  std::vector<ManifestEntry> scenes;
  /// Held-out exemplars per style name, in style order.
  std::vector<std::pair<std::string, std::vector<ManifestEntry>>> exemplars;
};

/// Accepts the manifest file or the directory holding manifest.json. Paths in
/// the result are resolved against the manifest's directory.
CorpusManifest read_corpus_manifest(const std::filesystem::path& path);

/// Scenes loaded lazily from manifest entries.
class FileSceneSource final : public SceneSource {
 public:
  explicit FileSceneSource(std::vector<ManifestEntry> entries) : entries_(std::move(entries)) {}

  std::size_t size() const override { return entries_.size(); }
  Scene load(std::size_t index) const override;
  const std::vector<ManifestEntry>& entries() const { return entries_; }

 private:
  std::vector<ManifestEntry> entries_;
};

}  // namespace gcs::io
