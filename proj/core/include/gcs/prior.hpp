#pragma once

// Autoregressive priors over raster-ordered token grids.

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "gcs/core.hpp"
#include "gcs/guidance.hpp"

namespace gcs {

/// Tokens generated so far for a height x width grid, in raster order.
struct PartialGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t codebook_size = 0;
  std::span<const Token> filled;

  /// Next raster position to fill.
  Position next_position() const { return {filled.size() / width, filled.size() % width}; }
};

/// Next-token distribution p(s_i) given everything generated before i.
class PriorModel {
 public:
  virtual ~PriorModel() = default;

  virtual std::size_t codebook_size() const = 0;
  /// Conditional models read the semantic label at the current position.
  virtual bool conditional() const = 0;

  /// `position` must be the first unfilled raster position of `partial`;
  /// `semantics` is required iff the model is conditional.
  virtual CategoricalDistribution next_distribution(const PartialGrid& partial, Position position,
                                                    const SemanticGrid* semantics) const = 0;
};

/// Checks the shared next_distribution preconditions.
void check_prior_query(const PriorModel& model, const PartialGrid& partial, Position position,
                       const SemanticGrid* semantics);

/// Same distribution at every step; mostly useful as a test fixture.
class StaticPrior final : public PriorModel {
 public:
  explicit StaticPrior(CategoricalDistribution dist) : dist_(std::move(dist)) {}

  std::size_t codebook_size() const override { return dist_.codebook_size(); }
  bool conditional() const override { return false; }
  CategoricalDistribution next_distribution(const PartialGrid& partial, Position position,
                                            const SemanticGrid* semantics) const override;

 private:
  CategoricalDistribution dist_;
};

/// Relative offset of an already generated neighbour: (row delta, col delta).
struct ContextOffset {
  int dr = 0;
  int dc = 0;

  friend auto operator<=>(const ContextOffset&, const ContextOffset&) = default;
};

class ContextTemplate {
 public:
  /// Offsets must point strictly earlier in raster order and be distinct.
  explicit ContextTemplate(std::vector<ContextOffset> offsets);

  /// {left, above}
  static ContextTemplate left_above();
  /// {left, above, above-left, above-right}
  static ContextTemplate full();
  /// Parses a comma separated list of left, above, above-left, above-right.
  static ContextTemplate parse(std::string_view names);

  std::span<const ContextOffset> offsets() const { return offsets_; }
  std::size_t size() const { return offsets_.size(); }

  friend bool operator==(const ContextTemplate&, const ContextTemplate&) = default;

 private:
  std::vector<ContextOffset> offsets_;
};

/// Context slot value for neighbours outside the grid.
inline constexpr std::int64_t kBoundarySymbol = -1;
/// Label slot value for unconditional models.
inline constexpr std::int64_t kNoLabel = -1;

struct ContextKey {
  std::vector<std::int64_t> context;
  std::int64_t label = kNoLabel;

  friend auto operator<=>(const ContextKey&, const ContextKey&) = default;
};

using CountTables = std::map<ContextKey, std::vector<std::uint64_t>>;

/// Count-based Markov random field over raster order. Each step conditions on
/// the tokens at a fixed set of earlier offsets (out-of-grid slots read the
/// boundary symbol) and, for conditional models, on the current label.
class MarkovGridPrior final : public PriorModel {
 public:
  MarkovGridPrior(std::size_t codebook_size, ContextTemplate context, bool conditional,
                  double smoothing_alpha, CountTables tables = {});

  std::size_t codebook_size() const override { return codebook_size_; }
  bool conditional() const override { return conditional_; }
  const ContextTemplate& context() const { return context_; }
  double smoothing_alpha() const { return alpha_; }
  const CountTables& tables() const { return tables_; }

  CategoricalDistribution next_distribution(const PartialGrid& partial, Position position,
                                            const SemanticGrid* semantics) const override;

  /// Context key read at `position` of a (possibly partial) raster sequence.
  ContextKey key_at(std::span<const Token> raster, std::size_t width, Position position,
                    const SemanticGrid* semantics) const;

  /// Smoothed distribution for a key. Unseen keys with alpha = 0 give uniform.
  CategoricalDistribution distribution_for(const ContextKey& key) const;

  friend bool operator==(const MarkovGridPrior& a, const MarkovGridPrior& b) {
    return a.codebook_size_ == b.codebook_size_ && a.context_ == b.context_ &&
           a.conditional_ == b.conditional_ && a.alpha_ == b.alpha_ && a.tables_ == b.tables_;
  }

 private:
  std::size_t codebook_size_;
  ContextTemplate context_;
  bool conditional_;
  double alpha_;
  CountTables tables_;
};

MarkovGridPrior train_markov_prior(std::span<const Scene> corpus, const ContextTemplate& context,
                                   bool conditional, double smoothing_alpha);

/// Exact probability of every grid of a tiny shape, indexed by the raster
/// sequence read as a base-|Z| number (first token most significant).
struct ExactGridDistribution {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t codebook_size = 0;
  std::vector<double> probs;

  std::size_t index_of(std::span<const Token> tokens) const;
  TokenGrid grid_at(std::size_t index) const;
};

inline constexpr std::size_t kExactStateLimit = 1'000'000;

/// Enumerates the chain rule of `model` (optionally guided by `guidance`).
/// Throws if |Z|^(H*W) exceeds kExactStateLimit.
ExactGridDistribution exact_sequence_distribution(const PriorModel& model, std::size_t height,
                                                  std::size_t width,
                                                  const SemanticGrid* semantics = nullptr,
                                                  const LikelihoodTable* guidance = nullptr);

}  // namespace gcs
