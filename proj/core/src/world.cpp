#include "gcs/world.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gcs/io.hpp"
#include "gcs/random.hpp"
#include "gcs/sampler.hpp"

namespace gcs::world {
namespace {

// Seed domains below a scene seed.
constexpr std::uint64_t kLayoutStream = 0;
constexpr std::uint64_t kTokenStream = 1;
constexpr std::uint64_t kChoiceStream = 2;
// Domain of held-out exemplar seeds below the benchmark seed.
constexpr std::uint64_t kExemplarDomain = std::uint64_t{1} << 62;

double tv(const CategoricalDistribution& a, const CategoricalDistribution& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.codebook_size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

CategoricalDistribution palette(std::size_t codebook_size, std::size_t first) {
  // Mildly skewed profile over 8 consecutive indices.
  static constexpr double kProfile[8] = {0.20, 0.16, 0.14, 0.12, 0.11, 0.10, 0.09, 0.08};
  std::vector<double> w(codebook_size, 0.0);
  for (std::size_t i = 0; i < 8; ++i) w[first + i] = kProfile[i];
  return normalize(w);
}

}  // namespace

void StyleSpec::validate() const {
  if (per_label.empty()) throw ValidationError("style '" + name + "' has no label distributions");
  for (const auto& d : per_label) {
    if (d.codebook_size() != per_label.front().codebook_size()) {
      throw ValidationError("style '" + name + "' mixes codebook sizes");
    }
  }
  if (!(coherence >= 0.0 && coherence < 1.0)) {
    throw ValidationError("style '" + name + "' coherence must be in [0, 1)");
  }
}

void LayoutSpec::validate() const {
  if (label_count == 0) throw ValidationError("layout label_count must be positive");
  switch (kind) {
    case LayoutKind::horizon:
      if (label_count < 2) throw ValidationError("horizon layout needs at least 2 labels");
      if (!(min_fraction >= 0.0 && min_fraction <= max_fraction && max_fraction <= 1.0)) {
        throw ValidationError("horizon layout needs 0 <= min_fraction <= max_fraction <= 1");
      }
      break;
    case LayoutKind::bands:
      if (bands == 0) throw ValidationError("bands layout needs at least one band");
      break;
    case LayoutKind::constant:
      if (label >= label_count) throw ValidationError("constant layout label out of range");
      break;
  }
}

const char* to_string(LayoutKind kind) {
  switch (kind) {
    case LayoutKind::horizon: return "horizon";
    case LayoutKind::bands: return "bands";
    case LayoutKind::constant: return "constant";
  }
  return "constant";
}

LayoutKind layout_kind_from_string(std::string_view name) {
  if (name == "horizon") return LayoutKind::horizon;
  if (name == "bands") return LayoutKind::bands;
  if (name == "constant") return LayoutKind::constant;
  throw ValidationError("unknown layout kind '" + std::string(name) + "'");
}

SemanticGrid generate_layout(const LayoutSpec& layout, std::size_t height, std::size_t width,
                             std::uint64_t seed) {
  layout.validate();
  if (height == 0 || width == 0) throw ValidationError("grid dimensions must be positive");
  std::vector<Label> labels(height * width, 0);
  switch (layout.kind) {
    case LayoutKind::horizon: {
      const auto lo = std::size_t(std::ceil(layout.min_fraction * double(height)));
      const auto hi = std::max(lo, std::size_t(std::floor(layout.max_fraction * double(height))));
      rng::CounterStream stream(seed);
      const std::size_t horizon = lo + stream.next_below(hi - lo + 1);
      for (std::size_t r = horizon; r < height; ++r) {
        std::fill_n(labels.begin() + std::ptrdiff_t(r * width), width, Label{1});
      }
      break;
    }
    case LayoutKind::bands:
      for (std::size_t r = 0; r < height; ++r) {
        const auto band = r * layout.bands / height;
        std::fill_n(labels.begin() + std::ptrdiff_t(r * width), width,
                    Label(band % layout.label_count));
      }
      break;
    case LayoutKind::constant:
      std::fill(labels.begin(), labels.end(), layout.label);
      break;
  }
  return SemanticGrid(height, width, layout.label_count, std::move(labels));
}

Scene generate_scene(const StyleSpec& style, const LayoutSpec& layout, std::size_t height,
                     std::size_t width, std::uint64_t seed) {
  style.validate();
  if (style.per_label.size() < layout.label_count) {
    throw ValidationError("style '" + style.name + "' defines " +
                          std::to_string(style.per_label.size()) + " labels, layout needs " +
                          std::to_string(layout.label_count));
  }
  SemanticGrid sem = generate_layout(layout, height, width, rng::split_seed(seed, kLayoutStream));
  rng::CounterStream stream(rng::split_seed(seed, kTokenStream));
  const std::size_t n = style.per_label.front().codebook_size();
  std::vector<Token> tokens(height * width);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const std::size_t i = r * width + c;
      const Label l = sem.at(r, c);
      if (c > 0 && sem.at(r, c - 1) == l && stream.next_uniform() < style.coherence) {
        tokens[i] = tokens[i - 1];
      } else {
        tokens[i] = sample_inverse_cdf(style.per_label[l].probs(), stream.next_uniform());
      }
    }
  }
  return Scene{TokenGrid(height, width, n, std::move(tokens)), std::move(sem)};
}

void BenchmarkConfig::validate() const {
  if (codebook_size < 2) throw ValidationError("codebook_size must be at least 2");
  if (label_count == 0) throw ValidationError("label_count must be positive");
  if (height == 0 || width == 0) throw ValidationError("height and width must be positive");
  if (corpus_size == 0) throw ValidationError("corpus_size must be positive");
  if (styles.empty()) throw ValidationError("styles must not be empty");
  if (mixture_weights.size() != styles.size()) {
    throw ValidationError("mixture_weights must have one entry per style");
  }
  double total = 0.0;
  for (double w : mixture_weights) {
    if (!std::isfinite(w) || w < 0.0) throw ValidationError("mixture_weights must be >= 0");
    total += w;
  }
  if (total <= 0.0) throw ValidationError("mixture_weights must not all be zero");
  if (layouts.empty()) throw ValidationError("layouts must not be empty");
  for (const auto& s : styles) {
    s.validate();
    if (s.per_label.front().codebook_size() != codebook_size) {
      throw ValidationError("style '" + s.name + "' has the wrong codebook size");
    }
    if (s.per_label.size() != label_count) {
      throw ValidationError("style '" + s.name + "' must define one distribution per label");
    }
  }
  for (std::size_t a = 0; a < styles.size(); ++a) {
    for (std::size_t b = a + 1; b < styles.size(); ++b) {
      if (styles[a].name == styles[b].name) {
        throw ValidationError("duplicate style name '" + styles[a].name + "'");
      }
    }
  }
  for (const auto& l : layouts) {
    l.validate();
    if (l.label_count != label_count) {
      throw ValidationError("layout label_count differs from the benchmark label_count");
    }
  }
}

std::vector<std::string> BenchmarkConfig::warnings() const {
  std::vector<std::string> out;
  if (styles.size() < 2) out.push_back("fewer than 2 styles; style matching is trivial");
  for (std::size_t a = 0; a < styles.size(); ++a) {
    for (std::size_t b = a + 1; b < styles.size(); ++b) {
      double best = 0.0;
      for (std::size_t j = 0; j < label_count; ++j) {
        best = std::max(best, tv(styles[a].per_label[j], styles[b].per_label[j]));
      }
      if (best < 0.5) {
        std::ostringstream msg;
        msg << "styles '" << styles[a].name << "' and '" << styles[b].name
            << "' are poorly separated (max per-label TV " << best << ")";
        out.push_back(msg.str());
      }
    }
  }
  return out;
}

Benchmark generate_benchmark(const BenchmarkConfig& config) {
  config.validate();
  auto pick = [&](std::uint64_t scene_seed, bool choose_style) {
    rng::CounterStream choice(rng::split_seed(scene_seed, kChoiceStream));
    std::size_t style = 0;
    if (choose_style) style = sample_inverse_cdf(config.mixture_weights, choice.next_uniform());
    const std::size_t layout = choice.next_below(config.layouts.size());
    return std::pair{style, layout};
  };

  Benchmark bench;
  bench.config = config;
  bench.corpus.reserve(config.corpus_size);
  for (std::size_t i = 0; i < config.corpus_size; ++i) {
    const auto seed = rng::split_seed(config.seed, i);
    const auto [style, layout] = pick(seed, true);
    bench.corpus.push_back(GeneratedScene{
        generate_scene(config.styles[style], config.layouts[layout], config.height, config.width,
                       seed),
        style, seed});
  }
  const auto exemplar_root = rng::split_seed(config.seed, kExemplarDomain);
  bench.exemplars.resize(config.styles.size());
  for (std::size_t s = 0; s < config.styles.size(); ++s) {
    const auto style_root = rng::split_seed(exemplar_root, s);
    for (std::size_t e = 0; e < config.exemplars_per_style; ++e) {
      const auto seed = rng::split_seed(style_root, e);
      const auto layout = pick(seed, false).second;
      bench.exemplars[s].push_back(GeneratedScene{
          generate_scene(config.styles[s], config.layouts[layout], config.height, config.width,
                         seed),
          s, seed});
    }
  }
  return bench;
}

BenchmarkConfig landscape_2x4() {
  BenchmarkConfig c;
  c.name = "landscape-2x4";
  c.codebook_size = 32;
  c.label_count = 2;
  c.height = 32;
  c.width = 32;
  c.corpus_size = 2000;
  c.exemplars_per_style = 10;
  c.seed = 20211;
  const char* sky_names[2] = {"clear", "dusk"};
  const char* ground_names[2] = {"rock", "snow"};
  for (std::size_t sky = 0; sky < 2; ++sky) {
    for (std::size_t ground = 0; ground < 2; ++ground) {
      StyleSpec s;
      s.name = std::string(sky_names[sky]) + "-" + ground_names[ground];
      s.per_label = {palette(32, 8 * sky), palette(32, 16 + 8 * ground)};
      s.coherence = 0.6;
      c.styles.push_back(std::move(s));
    }
  }
  c.mixture_weights.assign(4, 0.25);
  LayoutSpec horizon;
  horizon.kind = LayoutKind::horizon;
  horizon.label_count = 2;
  horizon.min_fraction = 0.3;
  horizon.max_fraction = 0.7;
  c.layouts = {horizon};
  return c;
}

BenchmarkConfig arrangement_swap() {
  BenchmarkConfig c;
  c.name = "arrangement-swap";
  c.codebook_size = 16;
  c.label_count = 2;
  c.height = 32;
  c.width = 32;
  c.corpus_size = 1000;
  c.exemplars_per_style = 10;
  c.seed = 20212;
  const auto a = palette(16, 0);
  const auto b = palette(16, 8);
  c.styles = {StyleSpec{"a-over-b", {a, b}, 0.6}, StyleSpec{"b-over-a", {b, a}, 0.6}};
  c.mixture_weights = {0.5, 0.5};
  LayoutSpec halves;
  halves.kind = LayoutKind::bands;
  halves.label_count = 2;
  halves.bands = 2;
  c.layouts = {halves};
  return c;
}

BenchmarkConfig preset(std::string_view name) {
  if (name == "landscape-2x4") return landscape_2x4();
  if (name == "arrangement-swap") return arrangement_swap();
  throw ValidationError("unknown benchmark preset '" + std::string(name) + "'");
}

std::filesystem::path make_benchmark(const BenchmarkConfig& config,
                                     const std::filesystem::path& out_dir) {
  return write_benchmark(generate_benchmark(config), out_dir);
}

}  // namespace gcs::world
