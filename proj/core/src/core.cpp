#include "gcs/core.hpp"

#include <cmath>
#include <sstream>

namespace gcs {

CodebookSpec::CodebookSpec(std::size_t n) : size(n) {
  if (n < 2) {
    throw ValidationError("codebook size must be at least 2, got " + std::to_string(n));
  }
}

void validate_indices(std::size_t height, std::size_t width, std::size_t bound,
                      std::span<const std::uint32_t> values, const char* what) {
  if (height == 0 || width == 0) {
    throw ValidationError("grid dimensions must be positive");
  }
  if (bound == 0) {
    throw ValidationError(std::string(what) + " bound must be positive");
  }
  if (values.size() != height * width) {
    std::ostringstream msg;
    msg << "length mismatch: expected " << height * width << " " << what << "s, got "
        << values.size();
    throw ValidationError(msg.str());
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= bound) {
      std::ostringstream msg;
      msg << what << " " << values[i] << " out of range at (" << i / width << "," << i % width
          << ")";
      throw ValidationError(msg.str());
    }
  }
}

void validate_grid(const TokenGrid& grid) {
  validate_indices(grid.height(), grid.width(), grid.codebook_size(), grid.tokens());
}

void require_same_shape(const TokenGrid& tokens, const SemanticGrid& semantics) {
  if (!semantics.same_shape(tokens.height(), tokens.width())) {
    std::ostringstream msg;
    msg << "dimension mismatch: tokens " << tokens.height() << "x" << tokens.width()
        << ", semantics " << semantics.height() << "x" << semantics.width();
    throw ValidationError(msg.str());
  }
}

namespace {

void check_entries(std::span<const double> values, const char* what) {
  if (values.size() < 2) {
    throw ValidationError(std::string(what) + " needs a codebook of size >= 2, got " +
                          std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      std::ostringstream msg;
      msg << what << " entry " << i << " is negative or not finite (" << values[i] << ")";
      throw ValidationError(msg.str());
    }
  }
}

}  // namespace

CategoricalDistribution::CategoricalDistribution(std::vector<double> probs, double source_mass)
    : probs_(std::move(probs)), source_mass_(source_mass) {
  check_entries(probs_, "probability");
  double total = 0.0;
  for (double p : probs_) total += p;
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probabilities sum to " << total << ", expected 1";
    throw ValidationError(msg.str());
  }
  if (!std::isfinite(source_mass_) || source_mass_ < 0.0) {
    throw ValidationError("source_mass must be finite and non-negative");
  }
}

CategoricalDistribution CategoricalDistribution::uniform(std::size_t codebook_size) {
  CodebookSpec spec(codebook_size);
  return CategoricalDistribution(std::vector<double>(spec.size, 1.0 / double(spec.size)));
}

CategoricalDistribution CategoricalDistribution::one_hot(std::size_t codebook_size,
                                                         std::size_t index) {
  CodebookSpec spec(codebook_size);
  if (index >= spec.size) {
    throw ValidationError("one-hot index out of range");
  }
  std::vector<double> p(spec.size, 0.0);
  p[index] = 1.0;
  return CategoricalDistribution(std::move(p));
}

CategoricalDistribution normalize(std::span<const double> weights, double source_mass) {
  check_entries(weights, "weight");
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) {
    throw ValidationError("zero total mass");
  }
  if (!std::isfinite(total)) {
    throw ValidationError("weights overflow when summed");
  }
  std::vector<double> p(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) p[i] = weights[i] / total;
  return CategoricalDistribution(std::move(p), source_mass);
}

}  // namespace gcs
