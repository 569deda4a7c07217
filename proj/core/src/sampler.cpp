#include "gcs/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gcs/random.hpp"

namespace gcs {

void SamplingConfig::validate(std::size_t codebook_size) const {
  if (!std::isfinite(temperature) || !(temperature > 0.0)) {
    throw ValidationError("temperature must be finite and > 0");
  }
  if (top_k && (*top_k == 0 || *top_k > codebook_size)) {
    throw ValidationError("top_k must be in [1, " + std::to_string(codebook_size) + "], got " +
                          std::to_string(*top_k));
  }
  if (guidance && guidance->codebook_size() != codebook_size) {
    throw ValidationError("guidance codebook size does not match the model");
  }
}

CategoricalDistribution apply_temperature(const CategoricalDistribution& dist,
                                          double temperature) {
  if (!std::isfinite(temperature) || !(temperature > 0.0)) {
    throw ValidationError("temperature must be finite and > 0");
  }
  if (temperature == 1.0) return dist;
  // Scale by the max first so small temperatures do not underflow everything.
  const auto p = dist.probs();
  const double max = *std::max_element(p.begin(), p.end());
  std::vector<double> w(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    w[i] = p[i] > 0.0 ? std::pow(p[i] / max, 1.0 / temperature) : 0.0;
  }
  return normalize(w, dist.source_mass());
}

CategoricalDistribution apply_top_k(const CategoricalDistribution& dist, std::size_t k) {
  const auto p = dist.probs();
  if (k == 0 || k > p.size()) throw ValidationError("top_k out of range");
  if (k == p.size()) return dist;
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
  std::vector<double> w(p.size(), 0.0);
  for (std::size_t i = 0; i < k; ++i) w[order[i]] = p[order[i]];
  return normalize(w, dist.source_mass());
}

CategoricalDistribution step_posterior(const CategoricalDistribution& prior,
                                       const SamplingConfig& config, Position position,
                                       std::size_t height, std::size_t width,
                                       const SemanticGrid* semantics) {
  CategoricalDistribution post = prior;
  if (config.guidance) {
    post = rebalance_prior(post, select_likelihood(*config.guidance, position, height, width,
                                                   semantics));
  }
  post = apply_temperature(post, config.temperature);
  if (config.top_k) post = apply_top_k(post, *config.top_k);
  return post;
}

Token sample_inverse_cdf(std::span<const double> probs, double u) {
  double total = 0.0;
  for (double p : probs) total += p;
  const double target = u * total;
  double cdf = 0.0;
  std::size_t last_positive = probs.size();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cdf += probs[i];
    last_positive = i;
    if (target <= cdf) return Token(i);
  }
  if (last_positive == probs.size()) throw ValidationError("cannot sample from zero mass");
  return Token(last_positive);
}

TokenGrid sample_grid(const PriorModel& model, std::size_t height, std::size_t width,
                      const SemanticGrid* semantics, const SamplingConfig& config) {
  if (height == 0 || width == 0) throw ValidationError("grid dimensions must be positive");
  const std::size_t n = model.codebook_size();
  config.validate(n);
  if (model.conditional() && semantics == nullptr) {
    throw ValidationError("conditional prior requires a semantic grid");
  }
  if (semantics != nullptr && !semantics->same_shape(height, width)) {
    throw ValidationError("semantic grid shape does not match the requested grid");
  }

  const rng::CounterStream stream(config.seed);
  std::vector<Token> tokens;
  tokens.reserve(height * width);
  for (std::size_t i = 0; i < height * width; ++i) {
    const PartialGrid partial{height, width, n, tokens};
    const Position pos = partial.next_position();
    const auto prior = model.next_distribution(partial, pos, semantics);
    const auto post = step_posterior(prior, config, pos, height, width, semantics);
    tokens.push_back(sample_inverse_cdf(post.probs(), stream.uniform_at(i)));
  }
  return TokenGrid(height, width, n, std::move(tokens));
}

std::uint64_t batch_seed(std::uint64_t base_seed, std::size_t index) {
  return rng::split_seed(base_seed, index);
}

std::vector<TokenGrid> batch_sample(const PriorModel& model, std::size_t height,
                                    std::size_t width, const SemanticGrid* semantics,
                                    const SamplingConfig& base_config, std::size_t n) {
  if (n == 0) throw ValidationError("batch size must be at least 1");
  std::vector<TokenGrid> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SamplingConfig cfg = base_config;
    cfg.seed = batch_seed(base_config.seed, i);
    out.push_back(sample_grid(model, height, width, semantics, cfg));
  }
  return out;
}

std::vector<TokenGrid> batch_sample(const PriorModel& model, std::size_t height,
                                    std::size_t width, std::span<const SemanticGrid> semantics,
                                    const SamplingConfig& base_config) {
  if (semantics.empty()) throw ValidationError("batch size must be at least 1");
  std::vector<TokenGrid> out;
  out.reserve(semantics.size());
  for (std::size_t i = 0; i < semantics.size(); ++i) {
    SamplingConfig cfg = base_config;
    cfg.seed = batch_seed(base_config.seed, i);
    out.push_back(sample_grid(model, height, width, &semantics[i], cfg));
  }
  return out;
}

}  // namespace gcs
