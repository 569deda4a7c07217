#pragma once

// Value types shared by every stage: codebook-index grids, semantic label
// grids and normalized categorical distributions over the codebook.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gcs {

using Token = std::uint32_t;
using Label = std::uint32_t;

/// Input violates a documented precondition or invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reading or writing an external artifact failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kNormalizationTolerance = 1e-9;

struct CodebookSpec {
  std::size_t size;

  explicit CodebookSpec(std::size_t n);
};

struct Position {
  std::size_t row = 0;
  std::size_t col = 0;

  friend bool operator==(const Position&, const Position&) = default;
};

/// Throws ValidationError unless `values` is a height x width row-major grid
/// with every entry in [0, bound). `what` names the entry kind in messages.
void validate_indices(std::size_t height, std::size_t width, std::size_t bound,
                      std::span<const std::uint32_t> values,
                      const char* what = "token");

namespace detail {

template <class Tag>
class IndexGrid {
 public:
  IndexGrid(std::size_t height, std::size_t width, std::size_t bound,
            std::vector<std::uint32_t> values)
      : height_(height), width_(width), bound_(bound), values_(std::move(values)) {
    validate_indices(height_, width_, bound_, values_, Tag::kWhat);
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  std::span<const std::uint32_t> values() const { return values_; }

  std::uint32_t at(std::size_t row, std::size_t col) const {
    return values_[row * width_ + col];
  }
  std::uint32_t at(Position p) const { return at(p.row, p.col); }

  bool same_shape(std::size_t h, std::size_t w) const { return height_ == h && width_ == w; }

  friend bool operator==(const IndexGrid&, const IndexGrid&) = default;

 protected:
  std::size_t bound() const { return bound_; }

 private:
  std::size_t height_;
  std::size_t width_;
  std::size_t bound_;
  std::vector<std::uint32_t> values_;
};

struct TokenTag {
  static constexpr const char* kWhat = "token";
};
struct LabelTag {
  static constexpr const char* kWhat = "label";
};

}  // namespace detail

/// H x W grid of codebook indices in raster order.
class TokenGrid : public detail::IndexGrid<detail::TokenTag> {
 public:
  using IndexGrid::IndexGrid;

  std::size_t codebook_size() const { return bound(); }
  std::span<const Token> tokens() const { return values(); }

  friend bool operator==(const TokenGrid&, const TokenGrid&) = default;
};

/// H x W grid of semantic labels aligned with a TokenGrid.
class SemanticGrid : public detail::IndexGrid<detail::LabelTag> {
 public:
  using IndexGrid::IndexGrid;

  std::size_t label_count() const { return bound(); }
  std::span<const Label> labels() const { return values(); }

  friend bool operator==(const SemanticGrid&, const SemanticGrid&) = default;
};

/// Accepts a constructed grid. Kept as a named entry point so callers holding
/// a grid can assert its invariants explicitly.
void validate_grid(const TokenGrid& grid);

/// A token grid with its optional semantic annotation.
struct Scene {
  TokenGrid tokens;
  std::optional<SemanticGrid> semantics;
};

/// Throws ValidationError if the semantic grid does not have the token grid's shape.
void require_same_shape(const TokenGrid& tokens, const SemanticGrid& semantics);

/// Normalized probability vector over a codebook.
///
/// Entries are non-negative, finite and sum to 1 within
/// kNormalizationTolerance. `source_mass` records how many observations back
/// the estimate (0 for analytic distributions) so averages can be mass weighted.
class CategoricalDistribution {
 public:
  explicit CategoricalDistribution(std::vector<double> probs, double source_mass = 0.0);

  static CategoricalDistribution uniform(std::size_t codebook_size);
  static CategoricalDistribution one_hot(std::size_t codebook_size, std::size_t index);

  std::size_t codebook_size() const { return probs_.size(); }
  std::span<const double> probs() const { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  double source_mass() const { return source_mass_; }

  friend bool operator==(const CategoricalDistribution&, const CategoricalDistribution&) = default;

 private:
  std::vector<double> probs_;
  double source_mass_;
};

/// Scales non-negative weights to sum to one.
CategoricalDistribution normalize(std::span<const double> weights, double source_mass = 0.0);

}  // namespace gcs
