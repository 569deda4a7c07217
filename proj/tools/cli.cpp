#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "gcs/core.hpp"
#include "gcs/distributions.hpp"
#include "gcs/guidance.hpp"
#include "gcs/io.hpp"
#include "gcs/metrics.hpp"
#include "gcs/prior.hpp"
#include "gcs/sampler.hpp"
#include "gcs/world.hpp"
#include "json.hpp"

namespace gcs::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::size_t kDefaultK = 700;
constexpr std::size_t kDefaultSamples = 4;
constexpr std::size_t kDefaultSide = 32;

// Precedence: --seed, then GCS_SEED, then the fallback.
std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t flag_value,
                           std::uint64_t fallback) {
  if (flag->count() > 0) return flag_value;
  const char* env = std::getenv("GCS_SEED");
  if (env == nullptr || *env == '\0') return fallback;
  std::uint64_t v = 0;
  const char* end = env + std::char_traits<char>::length(env);
  const auto [ptr, ec] = std::from_chars(env, end, v);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError(std::string("GCS_SEED is not an unsigned integer: '") + env + "'");
  }
  return v;
}

CellTiling parse_tiling(const std::string& text) {
  const auto x = text.find_first_of("xX");
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool ok = x != std::string::npos;
  if (ok) {
    const auto r = std::from_chars(text.data(), text.data() + x, rows);
    const auto c = std::from_chars(text.data() + x + 1, text.data() + text.size(), cols);
    ok = r.ec == std::errc() && r.ptr == text.data() + x && c.ec == std::errc() &&
         c.ptr == text.data() + text.size() && rows > 0 && cols > 0;
  }
  if (!ok) throw ValidationError("--by-cell expects RxC with positive integers, got '" + text + "'");
  return {rows, cols};
}

json number(double x) { return std::isnan(x) ? json(nullptr) : json(x); }

std::string csv_number(double x) { return std::isnan(x) ? std::string() : json(x).dump(); }

const char* partition_name(Partition p) {
  switch (p) {
    case Partition::global:
      return "global";
    case Partition::regional:
      return "regional";
    case Partition::spatial:
      return "spatial";
  }
  return "global";
}

Partition partition_from_string(const std::string& name) {
  if (name == "global") return Partition::global;
  if (name == "regional") return Partition::regional;
  if (name == "spatial") return Partition::spatial;
  throw ValidationError("unknown partition '" + name + "'");
}

Partition natural_partition(const GuidanceStatistics& stats) {
  switch (stats.natural_mode()) {
    case GuidanceMode::global:
      return Partition::global;
    case GuidanceMode::regional:
      return Partition::regional;
    case GuidanceMode::spatial:
      return Partition::spatial;
  }
  return Partition::global;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_output(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  io::write_text(path, text);
}

std::optional<fs::path> sibling_semantics(const fs::path& tokens) {
  auto sem = tokens;
  sem.replace_extension(".sgrd");
  std::error_code ec;
  if (fs::is_regular_file(sem, ec)) return sem;
  return std::nullopt;
}

// Scenes of a manifest, or every .tgrd file of a plain directory (sorted).
std::vector<io::ManifestEntry> entries_in(const fs::path& path) {
  std::error_code ec;
  if (fs::is_regular_file(path, ec) || fs::is_regular_file(path / "manifest.json", ec)) {
    return io::read_corpus_manifest(path).scenes;
  }
  if (!fs::is_directory(path, ec)) throw IoError("no such directory: " + path.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(path, ec)) {
    if (e.is_regular_file() && e.path().extension() == ".tgrd") files.push_back(e.path());
  }
  if (ec) throw IoError("cannot list " + path.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  std::vector<io::ManifestEntry> out;
  for (const auto& f : files) out.push_back({f, sibling_semantics(f), "", 0});
  return out;
}

std::vector<Scene> load_all(const std::vector<io::ManifestEntry>& entries) {
  io::FileSceneSource src(entries);
  std::vector<Scene> scenes;
  scenes.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) scenes.push_back(src.load(i));
  return scenes;
}

GuidanceStatistics read_statistics(const fs::path& path) {
  return io::statistics_from_json(io::read_text(path));
}

// ---- gen-world -------------------------------------------------------------

struct GenWorld {
  std::string config;
  std::string preset;
  std::string out;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;

  void attach(CLI::App& app) {
    auto* cfg = app.add_option("--config", config, "Benchmark config JSON");
    auto* pre = app.add_option("--preset", preset, "Built-in benchmark (landscape-2x4, arrangement-swap)");
    cfg->excludes(pre);
    app.add_option("--out", out, "Output directory")->required();
    seed_opt = app.add_option("--seed", seed, "Override the config seed");
  }

  void run(std::ostream& out_s, std::ostream& err) const {
    auto cfg = !config.empty() ? io::benchmark_config_from_json(io::read_text(config))
                               : world::preset(preset.empty() ? "landscape-2x4" : preset);
    cfg.seed = resolve_seed(seed_opt, seed, cfg.seed);
    cfg.validate();
    for (const auto& w : cfg.warnings()) err << "warning: " << w << '\n';
    const auto bench = world::generate_benchmark(cfg);
    const auto manifest = world::write_benchmark(bench, out);
    std::vector<std::size_t> per_style(cfg.styles.size(), 0);
    for (const auto& g : bench.corpus) ++per_style[g.style];
    out_s << "wrote " << bench.corpus.size() << " scenes and "
          << cfg.exemplars_per_style * cfg.styles.size() << " exemplars to " << manifest.string()
          << '\n';
    for (std::size_t s = 0; s < cfg.styles.size(); ++s) {
      out_s << "  " << cfg.styles[s].name << ": " << per_style[s] << '\n';
    }
  }
};

// ---- train-prior -----------------------------------------------------------

struct TrainPrior {
  std::string corpus;
  std::string out;
  std::string context = "left,above";
  bool conditional = false;
  double alpha = kDefaultSmoothingAlpha;

  void attach(CLI::App& app) {
    app.add_option("--corpus", corpus, "Corpus directory or manifest")->required();
    app.add_option("--out", out, "Model JSON path")->required();
    app.add_option("--context", context, "Context offsets: left,above,above-left,above-right")
        ->capture_default_str();
    app.add_flag("--conditional", conditional, "Condition on the semantic label");
    app.add_option("--alpha", alpha, "Count smoothing")->capture_default_str();
  }

  void run(std::ostream& out_s, std::ostream&) const {
    const auto tmpl = ContextTemplate::parse(context);
    const auto scenes = load_all(entries_in(corpus));
    const auto model = train_markov_prior(scenes, tmpl, conditional, alpha);
    write_output(out, io::to_json(model));
    out_s << "trained on " << scenes.size() << " scenes: " << model.tables().size()
          << " context tables\n";
  }
};

// ---- dataset-stats ---------------------------------------------------------

struct DatasetStats {
  std::string corpus;
  std::string out;
  std::size_t k = kDefaultK;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  double alpha = kDefaultSmoothingAlpha;
  bool by_region = false;
  std::string by_cell;

  void attach(CLI::App& app) {
    app.add_option("--corpus", corpus, "Corpus directory or manifest")->required();
    app.add_option("--out", out, "Statistics JSON path")->required();
    app.add_option("--k", k, "Monte-Carlo draws")->capture_default_str();
    seed_opt = app.add_option("--seed", seed, "Draw seed");
    app.add_option("--alpha", alpha, "Histogram smoothing")->capture_default_str();
    auto* region = app.add_flag("--by-region", by_region, "Per-label statistics");
    app.add_option("--by-cell", by_cell, "Per-cell statistics on an RxC tiling")->excludes(region);
  }

  void run(std::ostream& out_s, std::ostream& err) const {
    io::FileSceneSource src(entries_in(corpus));
    if (src.size() == 0) throw ValidationError("corpus " + corpus + " has no scenes");
    const auto s = resolve_seed(seed_opt, seed, 0);
    if (k > src.size()) {
      err << "warning: K=" << k << " exceeds the corpus size " << src.size()
          << "; grids are drawn with replacement\n";
    }
    GuidanceStatistics stats{monte_carlo_dataset_distribution(src, k, alpha, s), std::nullopt,
                             std::nullopt};
    if (by_region) stats.regional = monte_carlo_regional_distribution(src, k, alpha, s);
    if (!by_cell.empty()) {
      stats.spatial = monte_carlo_spatial_distribution(src, k, parse_tiling(by_cell), alpha, s);
    }
    write_output(out, io::to_json(stats));
    out_s << "dataset statistics (" << to_string(stats.natural_mode()) << ", K=" << k
          << ", seed=" << s << ") written to " << out << '\n';
  }
};

// ---- style-stats -----------------------------------------------------------

struct StyleStats {
  std::vector<std::string> inputs;
  std::string exemplars;
  std::string style;
  std::string out;
  double alpha = kDefaultSmoothingAlpha;
  bool by_region = false;
  std::string by_cell;
  bool average = false;
  std::string weighting = "uniform";

  void attach(CLI::App& app) {
    app.add_option("inputs", inputs, "Exemplar .tgrd files or sample directories");
    auto* ex = app.add_option("--exemplars", exemplars, "Benchmark directory holding exemplars");
    app.add_option("--style", style, "Style name to take from --exemplars")->needs(ex);
    app.add_option("--out", out, "Statistics JSON path")->required();
    app.add_option("--alpha", alpha, "Histogram smoothing")->capture_default_str();
    auto* region = app.add_flag("--by-region", by_region, "Per-label statistics");
    app.add_option("--by-cell", by_cell, "Per-cell statistics on an RxC tiling")->excludes(region);
    app.add_flag("--average", average, "Average a categorized set of exemplars");
    app.add_option("--weighting", weighting, "uniform or mass")->capture_default_str();
  }

  std::vector<Scene> collect() const {
    std::vector<Scene> scenes;
    for (const auto& in : inputs) {
      const fs::path p(in);
      if (p.extension() == ".tgrd") {
        Scene s{io::read_token_grid(p), std::nullopt};
        if (auto sem = sibling_semantics(p)) s.semantics = io::read_semantic_grid(*sem);
        scenes.push_back(std::move(s));
      } else {
        for (auto& s : load_all(entries_in(p))) scenes.push_back(std::move(s));
      }
    }
    if (!exemplars.empty()) {
      if (style.empty()) throw ValidationError("--exemplars needs --style");
      const auto manifest = io::read_corpus_manifest(exemplars);
      std::string known;
      bool found = false;
      for (const auto& [name, entries] : manifest.exemplars) {
        known += (known.empty() ? "" : ", ") + name;
        if (name != style) continue;
        found = true;
        for (auto& s : load_all(entries)) scenes.push_back(std::move(s));
      }
      if (!found) throw ValidationError("unknown style '" + style + "' (known: " + known + ")");
    }
    return scenes;
  }

  void run(std::ostream& out_s, std::ostream&) const {
    Weighting w = Weighting::uniform;
    if (weighting == "mass") {
      w = Weighting::mass;
    } else if (weighting != "uniform") {
      throw ValidationError("--weighting must be uniform or mass, got '" + weighting + "'");
    }
    const auto scenes = collect();
    if (scenes.empty()) throw ValidationError("no style inputs given");
    const std::size_t n = scenes.front().tokens.codebook_size();
    for (const auto& s : scenes) {
      if (s.tokens.codebook_size() != n) {
        throw ValidationError("style inputs mix codebook sizes " + std::to_string(n) + " and " +
                              std::to_string(s.tokens.codebook_size()));
      }
    }
    if (scenes.size() > 1 && !average) {
      throw ValidationError(std::to_string(scenes.size()) +
                            " style inputs given; pass --average to combine them");
    }
    std::optional<CellTiling> tiling;
    if (!by_cell.empty()) tiling = parse_tiling(by_cell);

    std::vector<CategoricalDistribution> global;
    std::vector<RegionalDistributions> regional;
    std::vector<SpatialDistributions> spatial;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      const auto& s = scenes[i];
      global.push_back(histogram_from_grid(s.tokens, alpha));
      if (by_region) {
        if (!s.semantics) {
          throw ValidationError("--by-region: style input " + std::to_string(i) +
                                " has no semantic grid");
        }
        regional.push_back(histogram_by_region(s.tokens, *s.semantics, alpha));
      }
      if (tiling) spatial.push_back(histogram_by_cell(std::span(&s.tokens, 1), *tiling, alpha));
    }
    const bool single = scenes.size() == 1;
    GuidanceStatistics stats{single ? global.front() : average_distributions(global, w),
                             std::nullopt, std::nullopt};
    if (by_region) stats.regional = single ? regional.front() : average_regional(regional, w);
    if (tiling) stats.spatial = single ? spatial.front() : average_spatial(spatial, w);
    write_output(out, io::to_json(stats));
    out_s << "style statistics (" << to_string(stats.natural_mode()) << ") from "
          << scenes.size() << " exemplar(s) written to " << out << '\n';
  }
};

// ---- sample ----------------------------------------------------------------

struct Sample {
  std::string model;
  std::string style_stats;
  std::string dataset_stats;
  bool no_guidance = false;
  std::string mode;
  double lambda = 1.0;
  std::size_t n = kDefaultSamples;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  double temperature = 1.0;
  std::size_t top_k = 0;
  CLI::Option* top_k_opt = nullptr;
  std::string semantics;
  std::string layout;
  std::size_t labels = 2;
  std::size_t height = kDefaultSide;
  std::size_t width = kDefaultSide;
  CLI::Option* height_opt = nullptr;
  CLI::Option* width_opt = nullptr;
  std::string out;

  void attach(CLI::App& app) {
    app.add_option("--model", model, "Prior model JSON")->required();
    app.add_option("--style-stats", style_stats, "Style statistics JSON");
    app.add_option("--dataset-stats", dataset_stats, "Dataset statistics JSON");
    app.add_flag("--no-guidance", no_guidance, "Sample the prior alone");
    app.add_option("--mode", mode, "Override the guidance mode: global, regional, spatial");
    app.add_option("--lambda", lambda, "Guidance exponent")->capture_default_str();
    app.add_option("--n", n, "Number of samples")->capture_default_str();
    seed_opt = app.add_option("--seed", seed, "Base seed");
    app.add_option("--temperature", temperature, "Sampling temperature")->capture_default_str();
    top_k_opt = app.add_option("--top-k", top_k, "Keep only the k most likely tokens");
    auto* sem = app.add_option("--semantics", semantics, "SGRD layout shared by all samples");
    app.add_option("--layout", layout, "Random layout per sample: horizon, bands, constant")
        ->excludes(sem);
    app.add_option("--labels", labels, "Label count for --layout")->capture_default_str();
    height_opt = app.add_option("--height", height, "Grid height")->capture_default_str();
    width_opt = app.add_option("--width", width, "Grid width")->capture_default_str();
    app.add_option("--out", out, "Output directory")->required();
  }

  void run(std::ostream& out_s, std::ostream& err) const {
    if (n == 0) throw ValidationError("--n must be at least 1");
    const auto prior = io::markov_prior_from_json(io::read_text(model));
    SamplingConfig cfg;
    cfg.seed = resolve_seed(seed_opt, seed, 0);
    cfg.temperature = temperature;
    if (top_k_opt->count() > 0) cfg.top_k = top_k;

    if (no_guidance) {
      if (!style_stats.empty() || !dataset_stats.empty()) {
        err << "warning: --no-guidance ignores the statistics files\n";
      }
    } else {
      if (style_stats.empty() || dataset_stats.empty()) {
        throw ValidationError("sample needs --style-stats and --dataset-stats, or --no-guidance");
      }
      std::optional<GuidanceMode> m;
      if (!mode.empty()) m = guidance_mode_from_string(mode);
      cfg.guidance = std::make_shared<LikelihoodTable>(build_likelihood_table(
          read_statistics(style_stats), read_statistics(dataset_stats), m, lambda));
    }
    cfg.validate(prior.codebook_size());

    std::size_t h = height;
    std::size_t w = width;
    std::vector<SemanticGrid> layouts;
    if (!semantics.empty()) {
      auto grid = io::read_semantic_grid(semantics);
      if ((height_opt->count() > 0 && height != grid.height()) ||
          (width_opt->count() > 0 && width != grid.width())) {
        throw ValidationError("--height/--width disagree with the semantic grid " + semantics);
      }
      h = grid.height();
      w = grid.width();
      layouts.assign(n, grid);
    } else if (!layout.empty()) {
      world::LayoutSpec spec;
      spec.kind = world::layout_kind_from_string(layout);
      spec.label_count = labels;
      for (std::size_t i = 0; i < n; ++i) {
        layouts.push_back(world::generate_layout(spec, h, w, batch_seed(cfg.seed, i)));
      }
    }
    if (h == 0 || w == 0) throw ValidationError("grid height and width must be positive");

    const auto grids = layouts.empty() ? batch_sample(prior, h, w, nullptr, cfg, n)
                                       : batch_sample(prior, h, w, layouts, cfg);

    ensure_dir(out);
    json scenes = json::array();
    for (std::size_t i = 0; i < grids.size(); ++i) {
      char stem[32];
      std::snprintf(stem, sizeof stem, "sample_%03zu", i);
      const std::string tokens = std::string(stem) + ".tgrd";
      io::write_token_grid(fs::path(out) / tokens, grids[i]);
      json entry{{"tokens", tokens}, {"semantics", nullptr}, {"seed", batch_seed(cfg.seed, i)}};
      if (!layouts.empty()) {
        const std::string sem = std::string(stem) + ".sgrd";
        io::write_semantic_grid(fs::path(out) / sem, layouts[i]);
        entry["semantics"] = sem;
      }
      scenes.push_back(std::move(entry));
    }
    const json config{
        {"model", model},
        {"seed", cfg.seed},
        {"n", n},
        {"height", h},
        {"width", w},
        {"temperature", temperature},
        {"top_k", cfg.top_k ? json(*cfg.top_k) : json(nullptr)},
        {"guidance", cfg.guidance ? json(to_string(cfg.guidance->mode())) : json(nullptr)},
        {"lambda", cfg.guidance ? json(lambda) : json(nullptr)},
        {"style_stats", cfg.guidance ? json(style_stats) : json(nullptr)},
        {"dataset_stats", cfg.guidance ? json(dataset_stats) : json(nullptr)},
        {"semantics", semantics.empty() ? json(nullptr) : json(semantics)},
        {"layout", layout.empty() ? json(nullptr) : json(layout)}};
    const json manifest{{"name", "samples"}, {"config", config}, {"scenes", scenes}};
    io::write_text(fs::path(out) / "manifest.json", manifest.dump(1));
    out_s << "wrote " << grids.size() << ' ' << (cfg.guidance ? "guided" : "unguided")
          << " samples (" << h << 'x' << w << ", seed " << cfg.seed << ") to " << out << '\n';
  }
};

// ---- evaluate --------------------------------------------------------------

struct LoadedSet {
  std::vector<Scene> scenes;
  std::vector<std::uint64_t> seeds;
};

LoadedSet load_samples(const std::string& dir) {
  const auto entries = entries_in(dir);
  if (entries.empty()) throw ValidationError("no samples in " + dir);
  LoadedSet set{load_all(entries), {}};
  for (const auto& e : entries) set.seeds.push_back(e.seed);
  return set;
}

json divergence_json(const Divergence& d) {
  json part_kl = json::array();
  json part_tv = json::array();
  for (double x : d.part_kl) part_kl.push_back(number(x));
  for (double x : d.part_tv) part_tv.push_back(number(x));
  return {{"kl", number(d.kl)}, {"tv", number(d.tv)}, {"part_kl", part_kl}, {"part_tv", part_tv}};
}

json set_json(const SetReport& r) {
  return {{"count", r.per_sample.size()},
          {"pooled", divergence_json(r.pooled)},
          {"mean_sample_kl", number(r.mean_sample_kl)}};
}

struct Evaluate {
  std::string guided;
  std::string unguided;
  std::string style_stats;
  std::string name;
  std::string out;
  std::string csv;
  std::string partition;
  std::vector<std::string> references;

  void attach(CLI::App& app) {
    app.add_option("--guided", guided, "Guided sample directory")->required();
    app.add_option("--unguided", unguided, "Unguided sample directory")->required();
    app.add_option("--style-stats", style_stats, "Target style statistics JSON")->required();
    app.add_option("--name", name, "Target style name (default: file stem)");
    app.add_option("--out", out, "Report JSON path")->required();
    app.add_option("--csv", csv, "Per-sample CSV path (default: report path with .csv)");
    app.add_option("--partition", partition, "global, regional or spatial (default: from stats)");
    app.add_option("--reference", references,
                   "Style statistics to classify samples against (repeatable)");
  }

  void run(std::ostream& out_s, std::ostream&) const {
    const auto g = load_samples(guided);
    const auto u = load_samples(unguided);
    StyleReference target{name.empty() ? fs::path(style_stats).stem().string() : name,
                          read_statistics(style_stats)};
    const Partition part =
        partition.empty() ? natural_partition(target.stats) : partition_from_string(partition);
    const auto report = guidance_report(g.scenes, u.scenes, target, part, g.seeds, u.seeds);

    std::vector<StyleReference> refs;
    for (const auto& r : references) {
      refs.push_back({fs::path(r).stem().string(), read_statistics(r)});
    }
    Partition match_part = part;
    for (const auto& r : refs) {
      if ((part == Partition::regional && !r.stats.regional) ||
          (part == Partition::spatial && !r.stats.spatial)) {
        match_part = Partition::global;
      }
    }
    std::optional<StyleMatchResult> gm;
    std::optional<StyleMatchResult> um;
    if (!refs.empty()) {
      gm = style_match_rate(g.scenes, refs, match_part);
      um = style_match_rate(u.scenes, refs, match_part);
    }

    json part_red = json::array();
    for (double x : report.part_kl_reduction) part_red.push_back(number(x));
    json doc{{"target", target.name},
             {"partition", partition_name(part)},
             {"guided_dir", guided},
             {"unguided_dir", unguided},
             {"kl_reduction", number(report.kl_reduction)},
             {"part_kl_reduction", part_red},
             {"guided", set_json(report.guided)},
             {"unguided", set_json(report.unguided)},
             {"style_match", nullptr}};
    if (gm) {
      json names = json::array();
      std::optional<std::size_t> target_index;
      for (std::size_t i = 0; i < refs.size(); ++i) {
        names.push_back(refs[i].name);
        if (refs[i].name == target.name && !target_index) target_index = i;
      }
      auto side = [&](const StyleMatchResult& m, std::size_t count) {
        json j{{"assigned_counts", m.assigned_counts}, {"target_rate", nullptr}};
        if (target_index) j["target_rate"] = double(m.assigned_counts[*target_index]) / double(count);
        return j;
      };
      doc["style_match"] = {{"partition", partition_name(match_part)},
                            {"references", names},
                            {"guided", side(*gm, g.scenes.size())},
                            {"unguided", side(*um, u.scenes.size())}};
    }
    write_output(out, doc.dump(2) + "\n");

    fs::path csv_path = csv.empty() ? fs::path(out).replace_extension(".csv") : fs::path(csv);
    std::ostringstream rows;
    const std::size_t parts = report.guided.pooled.part_kl.size();
    const char* part_label = part == Partition::spatial ? "kl_cell_" : "kl_label_";
    rows << "id,set,seed,kl_global,tv_global";
    for (std::size_t p = 0; p < parts; ++p) rows << ',' << part_label << p;
    rows << ",assigned_style\n";
    auto emit = [&](const char* set_name, const LoadedSet& set, const SetReport& rep,
                    const std::optional<StyleMatchResult>& match) {
      for (std::size_t i = 0; i < set.scenes.size(); ++i) {
        const auto one = std::span<const Scene>(set.scenes).subspan(i, 1);
        const auto d = divergence_to_reference(one, target, Partition::global);
        rows << i << ',' << set_name << ',' << set.seeds[i] << ',' << csv_number(d.kl) << ','
             << csv_number(d.tv);
        for (std::size_t p = 0; p < parts; ++p) {
          rows << ',' << csv_number(rep.per_sample[i].divergence.part_kl[p]);
        }
        rows << ',' << (match ? refs[match->assigned[i]].name : std::string()) << '\n';
      }
    };
    emit("guided", g, report.guided, gm);
    emit("unguided", u, report.unguided, um);
    write_output(csv_path, rows.str());

    out_s << "target " << target.name << " (" << partition_name(part) << "): guided KL "
          << report.guided.pooled.kl << ", unguided KL " << report.unguided.pooled.kl
          << ", reduction " << report.kl_reduction << '\n';
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Style-guided sampling over discrete token grids", "gcs"};
  app.require_subcommand(1);

  GenWorld gen_world;
  TrainPrior train_prior;
  DatasetStats dataset_stats;
  StyleStats style_stats;
  Sample sample;
  Evaluate evaluate;
  gen_world.attach(*app.add_subcommand("gen-world", "Generate a synthetic benchmark corpus"));
  train_prior.attach(*app.add_subcommand("train-prior", "Train the count-based grid prior"));
  dataset_stats.attach(
      *app.add_subcommand("dataset-stats", "Monte-Carlo dataset token distribution"));
  style_stats.attach(*app.add_subcommand("style-stats", "Token distribution of style exemplars"));
  sample.attach(*app.add_subcommand("sample", "Sample grids, optionally style-guided"));
  evaluate.attach(*app.add_subcommand("evaluate", "Compare guided and unguided samples"));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const std::map<std::string, std::function<void()>> actions{
      {"gen-world", [&] { gen_world.run(out, err); }},
      {"train-prior", [&] { train_prior.run(out, err); }},
      {"dataset-stats", [&] { dataset_stats.run(out, err); }},
      {"style-stats", [&] { style_stats.run(out, err); }},
      {"sample", [&] { sample.run(out, err); }},
      {"evaluate", [&] { evaluate.run(out, err); }}};
  try {
    actions.at(app.get_subcommands().front()->get_name())();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace gcs::cli
