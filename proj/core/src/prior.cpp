#include "gcs/prior.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include "gcs/distributions.hpp"

namespace gcs {

void check_prior_query(const PriorModel& model, const PartialGrid& partial, Position position,
                       const SemanticGrid* semantics) {
  if (partial.height == 0 || partial.width == 0) {
    throw ValidationError("partial grid has empty shape");
  }
  if (partial.codebook_size != model.codebook_size()) {
    throw ValidationError("partial grid codebook size does not match the model");
  }
  if (partial.filled.size() >= partial.height * partial.width) {
    throw ValidationError("grid is already complete");
  }
  if (position != partial.next_position()) {
    std::ostringstream msg;
    const auto expected = partial.next_position();
    msg << "position mismatch: next raster position is (" << expected.row << "," << expected.col
        << "), got (" << position.row << "," << position.col << ")";
    throw ValidationError(msg.str());
  }
  if (model.conditional()) {
    if (semantics == nullptr) {
      throw ValidationError("conditional prior requires a semantic grid");
    }
    if (!semantics->same_shape(partial.height, partial.width)) {
      throw ValidationError("semantic grid shape does not match the generated grid");
    }
  }
}

CategoricalDistribution StaticPrior::next_distribution(const PartialGrid& partial,
                                                       Position position,
                                                       const SemanticGrid* semantics) const {
  check_prior_query(*this, partial, position, semantics);
  return dist_;
}

ContextTemplate::ContextTemplate(std::vector<ContextOffset> offsets) : offsets_(std::move(offsets)) {
  std::set<ContextOffset> seen;
  for (const auto& o : offsets_) {
    if (o.dr > 0 || (o.dr == 0 && o.dc >= 0)) {
      throw ValidationError("context offset (" + std::to_string(o.dr) + "," +
                            std::to_string(o.dc) + ") is not strictly earlier in raster order");
    }
    if (!seen.insert(o).second) throw ValidationError("duplicate context offset");
  }
}

ContextTemplate ContextTemplate::left_above() { return ContextTemplate({{0, -1}, {-1, 0}}); }

ContextTemplate ContextTemplate::full() {
  return ContextTemplate({{0, -1}, {-1, 0}, {-1, -1}, {-1, 1}});
}

ContextTemplate ContextTemplate::parse(std::string_view names) {
  std::vector<ContextOffset> offsets;
  std::size_t start = 0;
  while (start <= names.size()) {
    const auto end = std::min(names.find(',', start), names.size());
    const auto name = names.substr(start, end - start);
    if (name == "left") {
      offsets.push_back({0, -1});
    } else if (name == "above") {
      offsets.push_back({-1, 0});
    } else if (name == "above-left") {
      offsets.push_back({-1, -1});
    } else if (name == "above-right") {
      offsets.push_back({-1, 1});
    } else if (!name.empty()) {
      throw ValidationError("unknown context offset '" + std::string(name) + "'");
    }
    start = end + 1;
  }
  return ContextTemplate(std::move(offsets));
}

MarkovGridPrior::MarkovGridPrior(std::size_t codebook_size, ContextTemplate context,
                                 bool conditional, double smoothing_alpha, CountTables tables)
    : codebook_size_(CodebookSpec(codebook_size).size),
      context_(std::move(context)),
      conditional_(conditional),
      alpha_(smoothing_alpha),
      tables_(std::move(tables)) {
  if (!std::isfinite(alpha_) || alpha_ < 0.0) {
    throw ValidationError("smoothing alpha must be finite and >= 0");
  }
  for (const auto& [key, counts] : tables_) {
    if (key.context.size() != context_.size()) {
      throw ValidationError("count table context arity does not match the template");
    }
    if (counts.size() != codebook_size_) {
      throw ValidationError("count table has wrong codebook size");
    }
    if (conditional_ != (key.label != kNoLabel) || key.label < kNoLabel) {
      throw ValidationError("count table label does not match the conditional flag");
    }
    for (auto t : key.context) {
      if (t < kBoundarySymbol || t >= std::int64_t(codebook_size_)) {
        throw ValidationError("count table context token out of range");
      }
    }
  }
}

ContextKey MarkovGridPrior::key_at(std::span<const Token> raster, std::size_t width,
                                   Position position, const SemanticGrid* semantics) const {
  ContextKey key;
  key.context.reserve(context_.size());
  for (const auto& o : context_.offsets()) {
    const auto r = std::int64_t(position.row) + o.dr;
    const auto c = std::int64_t(position.col) + o.dc;
    if (r < 0 || c < 0 || c >= std::int64_t(width)) {
      key.context.push_back(kBoundarySymbol);
    } else {
      key.context.push_back(raster[std::size_t(r) * width + std::size_t(c)]);
    }
  }
  if (conditional_) key.label = semantics->at(position);
  return key;
}

CategoricalDistribution MarkovGridPrior::distribution_for(const ContextKey& key) const {
  const auto it = tables_.find(key);
  if (it == tables_.end()) {
    return CategoricalDistribution::uniform(codebook_size_);
  }
  std::uint64_t total = 0;
  for (auto c : it->second) total += c;
  if (total == 0 && alpha_ == 0.0) return CategoricalDistribution::uniform(codebook_size_);
  return smoothed_distribution(it->second, alpha_);
}

CategoricalDistribution MarkovGridPrior::next_distribution(const PartialGrid& partial,
                                                           Position position,
                                                           const SemanticGrid* semantics) const {
  check_prior_query(*this, partial, position, semantics);
  return distribution_for(key_at(partial.filled, partial.width, position, semantics));
}

MarkovGridPrior train_markov_prior(std::span<const Scene> corpus, const ContextTemplate& context,
                                   bool conditional, double smoothing_alpha) {
  if (corpus.empty()) throw ValidationError("cannot train a prior on an empty corpus");
  const std::size_t n = corpus.front().tokens.codebook_size();
  std::size_t label_count = 0;
  MarkovGridPrior shape(n, context, conditional, smoothing_alpha);

  CountTables tables;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto& scene = corpus[s];
    const auto& grid = scene.tokens;
    if (grid.codebook_size() != n) {
      throw ValidationError("scene " + std::to_string(s) + " has codebook size " +
                            std::to_string(grid.codebook_size()) + ", expected " +
                            std::to_string(n));
    }
    const SemanticGrid* sem = nullptr;
    if (conditional) {
      if (!scene.semantics) {
        throw ValidationError("conditional training: scene " + std::to_string(s) +
                              " has no semantic grid");
      }
      require_same_shape(grid, *scene.semantics);
      if (label_count == 0) label_count = scene.semantics->label_count();
      if (scene.semantics->label_count() != label_count) {
        throw ValidationError("conditional training: inconsistent label counts");
      }
      sem = &*scene.semantics;
    }
    for (std::size_t r = 0; r < grid.height(); ++r) {
      for (std::size_t c = 0; c < grid.width(); ++c) {
        auto key = shape.key_at(grid.tokens(), grid.width(), {r, c}, sem);
        auto& counts = tables[std::move(key)];
        if (counts.empty()) counts.assign(n, 0);
        ++counts[grid.at(r, c)];
      }
    }
  }
  return MarkovGridPrior(n, context, conditional, smoothing_alpha, std::move(tables));
}

std::size_t ExactGridDistribution::index_of(std::span<const Token> tokens) const {
  if (tokens.size() != height * width) throw ValidationError("length mismatch");
  std::size_t idx = 0;
  for (Token t : tokens) {
    if (t >= codebook_size) throw ValidationError("token out of range");
    idx = idx * codebook_size + t;
  }
  return idx;
}

TokenGrid ExactGridDistribution::grid_at(std::size_t index) const {
  std::vector<Token> tokens(height * width);
  for (std::size_t i = tokens.size(); i-- > 0;) {
    tokens[i] = Token(index % codebook_size);
    index /= codebook_size;
  }
  return TokenGrid(height, width, codebook_size, std::move(tokens));
}

namespace {

struct Enumerator {
  const PriorModel& model;
  std::size_t height;
  std::size_t width;
  const SemanticGrid* semantics;
  const LikelihoodTable* guidance;
  std::vector<Token> prefix;
  std::vector<double>& out;

  void walk(std::size_t index, double prob) {
    const std::size_t cells = height * width;
    if (prefix.size() == cells) {
      out[index] = prob;
      return;
    }
    PartialGrid partial{height, width, model.codebook_size(), prefix};
    const Position pos = partial.next_position();
    auto step = model.next_distribution(partial, pos, semantics);
    if (guidance != nullptr) {
      step = rebalance_prior(step, select_likelihood(*guidance, pos, height, width, semantics));
    }
    const std::size_t n = model.codebook_size();
    for (std::size_t t = 0; t < n; ++t) {
      prefix.push_back(Token(t));
      // Zero-probability branches still need their leaves written as zero.
      walk(index * n + t, prob * step[t]);
      prefix.pop_back();
    }
  }
};

}  // namespace

ExactGridDistribution exact_sequence_distribution(const PriorModel& model, std::size_t height,
                                                  std::size_t width, const SemanticGrid* semantics,
                                                  const LikelihoodTable* guidance) {
  if (height == 0 || width == 0) throw ValidationError("grid dimensions must be positive");
  const std::size_t n = model.codebook_size();
  std::size_t states = 1;
  for (std::size_t i = 0; i < height * width; ++i) {
    if (states > kExactStateLimit / n) {
      throw ValidationError("state space |Z|^(H*W) exceeds the exact enumeration limit of " +
                            std::to_string(kExactStateLimit));
    }
    states *= n;
  }
  if (guidance != nullptr && guidance->codebook_size() != n) {
    throw ValidationError("guidance codebook size does not match the model");
  }
  ExactGridDistribution result{height, width, n, std::vector<double>(states, 0.0)};
  Enumerator e{model, height, width, semantics, guidance, {}, result.probs};
  e.prefix.reserve(height * width);
  e.walk(0, 1.0);
  return result;
}

}  // namespace gcs
