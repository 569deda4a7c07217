// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <memory>
#include <string>
#include <vector>

#include "gcs/distributions.hpp"
#include "gcs/guidance.hpp"
#include "gcs/metrics.hpp"
#include "gcs/prior.hpp"
#include "gcs/random.hpp"
#include "gcs/sampler.hpp"
#include "gcs/world.hpp"
#include "generators.hpp"
#include "properties.hpp"

using namespace gcs;
using gcs::testing::Gen;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

std::vector<Scene> scenes_of(const std::vector<world::GeneratedScene>& g) {
  std::vector<Scene> out;
  for (const auto& s : g) out.push_back(s.scene);
  return out;
}

std::vector<Scene> pair_up(const std::vector<TokenGrid>& grids, const std::vector<SemanticGrid>* sems) {
  std::vector<Scene> out;
  for (std::size_t i = 0; i < grids.size(); ++i) {
    out.push_back({grids[i], sems ? std::optional((*sems)[i]) : std::nullopt});
  }
  return out;
}

// 1. Guidance that reduces to the identity must not change a single token.
Outcome identity_equivalence() {
  constexpr std::size_t kConfigs = 100;
  std::size_t identical = 0;
  for (std::size_t c = 0; c < kConfigs; ++c) {
    Gen g(rng::split_seed(0xacce0001, c));
    const std::size_t n = g.size(2, 12);
    const std::size_t h = g.size(1, 6);
    const std::size_t w = g.size(1, 6);
    const bool conditional = g.coin();
    const std::size_t labels = g.size(1, 3);
    std::vector<Scene> corpus;
    for (std::size_t i = 0, m = g.size(1, 6); i < m; ++i) {
      corpus.push_back({g.grid(h, w, n), conditional ? std::optional(g.semantics(h, w, labels)) : std::nullopt});
    }
    const auto model = train_markov_prior(corpus, g.context(), conditional, g.real(0.01, 1.0));
    const auto sem = g.semantics(h, w, labels);

    std::shared_ptr<const LikelihoodTable> table;
    if (g.coin()) {
      // Style statistics equal to the dataset statistics, any exponent.
      const auto d = g.dist(n);
      GuidanceStatistics s{d, std::nullopt, std::nullopt};
      if (conditional && g.coin()) s.regional = histogram_by_region(corpus[0].tokens, *corpus[0].semantics, 0.5);
      table = std::make_shared<LikelihoodTable>(build_likelihood_table(s, s, std::nullopt, g.real(0.0, 4.0)));
    } else {
      // Arbitrary statistics with exponent 0.
      table = std::make_shared<LikelihoodTable>(build_likelihood_table(
          {g.dist(n), std::nullopt, std::nullopt}, {g.dist(n), std::nullopt, std::nullopt}, std::nullopt, 0.0));
    }

    SamplingConfig plain;
    plain.seed = g.bits();
    plain.temperature = g.coin() ? 1.0 : g.real(0.3, 2.0);
    if (g.coin()) plain.top_k = g.size(1, n);
    SamplingConfig guided = plain;
    guided.guidance = table;
    const auto* s = conditional ? &sem : nullptr;
    const std::size_t batch = g.size(1, 4);
    identical += batch_sample(model, h, w, s, plain, batch) == batch_sample(model, h, w, s, guided, batch);
  }
  return {identical == kConfigs, fmt("%zu/%zu configurations bit-identical", identical, kConfigs)};
}

// 2. Sampler frequencies against the exact enumeration of all 81 grids.
Outcome oracle_equivalence() {
  constexpr std::size_t kSamples = 200000;
  double worst = 0.0;
  std::size_t runs = 0;
  for (std::size_t m = 0; m < 5; ++m) {
    Gen g(rng::split_seed(0xacce0002, m));
    const bool conditional = g.coin();
    const auto sem = g.semantics(2, 2, 2);
    std::vector<Scene> corpus;
    for (std::size_t i = 0, k = g.size(2, 8); i < k; ++i) {
      corpus.push_back({g.grid(2, 2, 3), conditional ? std::optional(g.semantics(2, 2, 2)) : std::nullopt});
    }
    const auto model = train_markov_prior(corpus, g.context(), conditional, g.real(0.1, 1.0));
    const GuidanceStatistics style{g.dist(3), std::nullopt, std::nullopt};
    const GuidanceStatistics data{g.dist(3), std::nullopt, std::nullopt};
    const auto* s = conditional ? &sem : nullptr;
    for (double lambda : {-1.0, 1.0, 2.0}) {
      SamplingConfig cfg;
      cfg.seed = g.bits();
      std::optional<LikelihoodTable> table;
      if (lambda > 0) {
        table = build_likelihood_table(style, data, std::nullopt, lambda);
        cfg.guidance = std::make_shared<LikelihoodTable>(*table);
      }
      const auto exact = exact_sequence_distribution(model, 2, 2, s, table ? &*table : nullptr);
      std::vector<double> freq(exact.probs.size(), 0.0);
      for (const auto& grid : batch_sample(model, 2, 2, s, cfg, kSamples)) {
        freq[exact.index_of(grid.tokens())] += 1.0 / kSamples;
      }
      double tv = 0.0;
      for (std::size_t i = 0; i < freq.size(); ++i) tv += std::abs(freq[i] - exact.probs[i]);
      worst = std::max(worst, tv / 2);
      ++runs;
    }
  }
  return {worst <= 0.02, fmt("max TV %.4f over %zu prior/guidance runs (limit 0.02)", worst, runs)};
}

struct Landscape {
  world::Benchmark bench;
  MarkovGridPrior model;
  GuidanceStatistics dataset;
  std::vector<StyleReference> refs;
};

Landscape landscape() {
  auto bench = world::generate_benchmark(world::landscape_2x4());
  const auto corpus = scenes_of(bench.corpus);
  auto model = train_markov_prior(corpus, ContextTemplate::left_above(), true, 0.5);
  const InMemorySceneSource src(corpus);
  GuidanceStatistics ds{monte_carlo_dataset_distribution(src, 700, 0.5, 1),
                        monte_carlo_regional_distribution(src, 700, 0.5, 1), std::nullopt};
  std::vector<StyleReference> refs;
  for (std::size_t s = 0; s < bench.exemplars.size(); ++s) {
    refs.push_back(make_reference(bench.config.styles[s].name, scenes_of(bench.exemplars[s]), 0.5));
  }
  return {std::move(bench), std::move(model), std::move(ds), std::move(refs)};
}

std::vector<SemanticGrid> layouts(const world::BenchmarkConfig& cfg, std::uint64_t rep, std::size_t n) {
  std::vector<SemanticGrid> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(world::generate_layout(cfg.layouts[0], cfg.height, cfg.width, rng::split_seed(1000 + rep, i)));
  }
  return out;
}

// 3 and 4 share one run: global guidance toward one landscape style.
std::pair<Outcome, Outcome> convergence_and_style_match(const Landscape& L) {
  constexpr std::size_t kReps = 20;
  constexpr std::size_t kSamples = 50;
  const std::size_t target = 0;
  const auto& cfg = L.bench.config;
  const auto table = std::make_shared<LikelihoodTable>(
      build_likelihood_table(L.refs[target].stats, L.dataset, GuidanceMode::global, 1.0));
  std::vector<double> reductions;
  std::size_t wins = 0, guided_hits = 0, unguided_hits = 0, total = 0;
  for (std::size_t rep = 0; rep < kReps; ++rep) {
    const auto sems = layouts(cfg, rep, kSamples);
    SamplingConfig plain;
    plain.seed = 5000 + rep;
    SamplingConfig guided = plain;
    guided.guidance = table;
    const auto u = pair_up(batch_sample(L.model, cfg.height, cfg.width, sems, plain), &sems);
    const auto g = pair_up(batch_sample(L.model, cfg.height, cfg.width, sems, guided), &sems);
    const auto r = guidance_report(g, u, L.refs[target], Partition::global);
    reductions.push_back(r.kl_reduction);
    wins += r.guided.pooled.kl < r.unguided.pooled.kl;
    guided_hits += style_match_rate(g, L.refs, Partition::global).assigned_counts[target];
    unguided_hits += style_match_rate(u, L.refs, Partition::global).assigned_counts[target];
    total += kSamples;
  }
  const double med = median(reductions);
  const double mix = cfg.mixture_weights[target] /
                     std::accumulate(cfg.mixture_weights.begin(), cfg.mixture_weights.end(), 0.0);
  const double grate = double(guided_hits) / total;
  const double urate = double(unguided_hits) / total;
  return {{wins >= 19 && med >= 0.5,
           fmt("guided KL lower in %zu/%zu reps, median reduction %.1f%% (need >= 19, >= 50%%)", wins,
               kReps, 100 * med)},
          {grate >= 0.9 && std::abs(urate - mix) <= 0.15,
           fmt("guided match %.1f%% (need >= 90%%), unguided %.1f%% vs mixture %.1f%% (need within 15 pp)",
               100 * grate, 100 * urate, 100 * mix)}};
}

// 5. Different styles per semantic label, and label-0 guidance leaving label 1 alone.
Outcome regional_guidance(const Landscape& L) {
  constexpr std::size_t kReps = 20;
  constexpr std::size_t kSamples = 50;
  const auto& cfg = L.bench.config;
  const auto& A = L.refs[0];
  const auto& B = L.refs[3];
  const RegionalDistributions mixed_regional{
      2, cfg.codebook_size, {A.stats.regional->per_label[0], B.stats.regional->per_label[1]},
      {A.stats.regional->per_label_mass[0], B.stats.regional->per_label_mass[1]}};
  const StyleReference mixed{
      "mixed", {average_distributions(std::vector{A.stats.global, B.stats.global}), mixed_regional, std::nullopt}};
  const auto table = std::make_shared<LikelihoodTable>(
      build_likelihood_table(mixed.stats, L.dataset, GuidanceMode::regional, 1.0));
  const auto v0 = style_likelihood(*mixed_regional.per_label[0], *L.dataset.regional->per_label[0]);
  const auto label0_only = std::make_shared<LikelihoodTable>(
      LikelihoodTable::make_regional(LikelihoodVector::identity(cfg.codebook_size), {v0, std::nullopt}));

  std::vector<double> red0, red1;
  double worst_tv = 0.0;
  for (std::size_t rep = 0; rep < kReps; ++rep) {
    const auto sems = layouts(cfg, rep, kSamples);
    SamplingConfig plain;
    plain.seed = 7000 + rep;
    SamplingConfig both = plain;
    both.guidance = table;
    SamplingConfig only0 = plain;
    only0.guidance = label0_only;
    const auto ug = batch_sample(L.model, cfg.height, cfg.width, sems, plain);
    const auto gg = batch_sample(L.model, cfg.height, cfg.width, sems, both);
    const auto og = batch_sample(L.model, cfg.height, cfg.width, sems, only0);
    const auto r = guidance_report(pair_up(gg, &sems), pair_up(ug, &sems), mixed, Partition::regional);
    red0.push_back(r.part_kl_reduction[0]);
    red1.push_back(r.part_kl_reduction[1]);
    std::vector<std::uint64_t> cu(cfg.codebook_size), co(cfg.codebook_size);
    for (std::size_t i = 0; i < kSamples; ++i) {
      for (std::size_t p = 0; p < sems[i].labels().size(); ++p) {
        if (sems[i].labels()[p] != 1) continue;
        ++cu[ug[i].tokens()[p]];
        ++co[og[i].tokens()[p]];
      }
    }
    worst_tv = std::max(worst_tv, total_variation(smoothed_distribution(cu, 0.0), smoothed_distribution(co, 0.0)));
  }
  const double m0 = median(red0), m1 = median(red1);
  return {m0 >= 0.5 && m1 >= 0.5 && worst_tv <= 0.1,
          fmt("median reduction label 0 %.1f%%, label 1 %.1f%% (need >= 50%%); label-1 TV under label-0 guidance max %.4f (need <= 0.1)",
              100 * m0, 100 * m1, worst_tv)};
}

// 6. Monte-Carlo dataset estimate against the exact corpus mean.
Outcome monte_carlo() {
  const std::vector<TokenGrid> grids{
      TokenGrid(2, 4, 4, {0, 0, 0, 1, 1, 2, 2, 3}), TokenGrid(2, 4, 4, {0, 1, 1, 1, 2, 2, 3, 3}),
      TokenGrid(2, 4, 4, {0, 0, 1, 2, 2, 2, 3, 3}), TokenGrid(2, 4, 4, {0, 1, 1, 2, 3, 3, 3, 3})};
  // Exact mean of the four histograms, counted directly.
  std::vector<double> exact(4, 0.0);
  for (const auto& g : grids) {
    for (Token t : g.tokens()) exact[t] += 1.0 / (grids.size() * g.tokens().size());
  }
  const CategoricalDistribution truth(exact);
  const auto src = InMemorySceneSource::from_grids(grids);

  std::vector<double> medians;
  for (std::size_t k : {10, 100, 1000}) {
    std::vector<double> tvs;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      tvs.push_back(total_variation(monte_carlo_dataset_distribution(src, k, 0.0, seed), truth));
    }
    medians.push_back(median(tvs));
  }
  std::vector<double> mean(4, 0.0);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto d = monte_carlo_dataset_distribution(src, 10, 0.0, 10000 + seed);
    for (std::size_t t = 0; t < 4; ++t) mean[t] += d[t] / 1000;
  }
  const double mean_tv = total_variation(CategoricalDistribution(mean), truth);
  const bool monotone = medians[0] > medians[1] && medians[1] > medians[2];
  return {monotone && medians[2] <= 0.02 && mean_tv <= 0.01,
          fmt("median TV K=10 %.4f, K=100 %.4f, K=1000 %.4f (need decreasing, <= 0.02); mean at K=10 TV %.4f (need <= 0.01)",
              medians[0], medians[1], medians[2], mean_tv)};
}

// 7. Styles that differ only in arrangement: cell likelihoods against global ones.
Outcome spatial_ablation() {
  const auto bench = world::generate_benchmark(world::arrangement_swap());
  const auto corpus = scenes_of(bench.corpus);
  std::vector<Scene> plain;
  for (const auto& s : corpus) plain.push_back({s.tokens, std::nullopt});
  const auto model = train_markov_prior(plain, ContextTemplate::left_above(), false, 0.5);
  const InMemorySceneSource src(corpus);
  const CellTiling tiling{2, 1};
  const GuidanceStatistics ds{monte_carlo_dataset_distribution(src, 700, 0.5, 1), std::nullopt,
                              monte_carlo_spatial_distribution(src, 700, tiling, 0.5, 1)};
  const auto ref = make_reference(bench.config.styles[0].name, scenes_of(bench.exemplars[0]), 0.5, tiling);
  const auto global = std::make_shared<LikelihoodTable>(build_likelihood_table(ref.stats, ds, GuidanceMode::global, 1.0));
  const auto spatial = std::make_shared<LikelihoodTable>(build_likelihood_table(ref.stats, ds, GuidanceMode::spatial, 1.0));
  const std::size_t h = bench.config.height, w = bench.config.width;

  std::vector<double> rg, rs;
  std::size_t wins = 0;
  for (std::size_t rep = 0; rep < 20; ++rep) {
    SamplingConfig u;
    u.seed = 9000 + rep;
    SamplingConfig g = u, s = u;
    g.guidance = global;
    s.guidance = spatial;
    const auto U = pair_up(batch_sample(model, h, w, nullptr, u, 50), nullptr);
    const auto G = pair_up(batch_sample(model, h, w, nullptr, g, 50), nullptr);
    const auto S = pair_up(batch_sample(model, h, w, nullptr, s, 50), nullptr);
    rg.push_back(guidance_report(G, U, ref, Partition::spatial).kl_reduction);
    rs.push_back(guidance_report(S, U, ref, Partition::spatial).kl_reduction);
    wins += rs.back() > rg.back();
  }
  const double mg = median(rg), ms = median(rs);
  return {mg <= 0.1 && ms >= 0.4 && wins >= 19,
          fmt("median cell-KL reduction global %.1f%% (need <= 10%%), spatial %.1f%% (need >= 40%%); spatial better in %zu/20",
              100 * mg, 100 * ms, wins)};
}

// 8. Every module property over at least 1000 random cases.
Outcome invariants() {
  std::size_t failed = 0;
  std::size_t min_cases = std::numeric_limits<std::size_t>::max();
  std::string first;
  const auto& props = gcs::testing::all_properties();
  for (const auto& p : props) {
    const auto r = gcs::testing::run_property(p, 0xacce0008);
    min_cases = std::min(min_cases, r.cases);
    if (!r.ok() || r.cases < gcs::testing::kPropertyCases) {
      if (failed++ == 0) first = p.module + "/" + p.name + ": " + r.first_failure;
    }
  }
  auto detail = fmt("%zu/%zu properties passed, >= %zu cases each", props.size() - failed, props.size(), min_cases);
  if (failed) detail += "; first failure " + first;
  return {failed == 0, detail};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
};

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](const Criterion& c, const Outcome& o, double seconds) {
    const bool ok = o.pass && (c.budget_s <= 0 || seconds < c.budget_s);
    failures += !ok;
    std::printf("%s criterion %d (%s): %s [%.1fs", ok ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), seconds);
    if (c.budget_s > 0) std::printf(", budget %.0fs", c.budget_s);
    std::printf("]\n");
    std::fflush(stdout);
  };
  auto timed = [](auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = fn();
    return std::pair(std::move(r), std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  };

  {
    auto [o, t] = timed(identity_equivalence);
    report({1, "identity guidance", 10}, o, t);
  }
  {
    auto [o, t] = timed(oracle_equivalence);
    report({2, "exact oracle", 60}, o, t);
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    const auto L = landscape();
    const auto pair = convergence_and_style_match(L);
    // Includes benchmark generation and training.
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report({3, "convergence", 300}, pair.first, total);
    report({4, "style match", 0}, pair.second, 0.0);
    auto [r, t5] = timed([&] { return regional_guidance(L); });
    report({5, "regional guidance", 0}, r, t5);
  }
  {
    auto [o, t] = timed(monte_carlo);
    report({6, "monte carlo estimator", 30}, o, t);
  }
  {
    auto [o, t] = timed(spatial_ablation);
    report({7, "spatial ablation", 0}, o, t);
  }
  {
    auto [o, t] = timed(invariants);
    report({8, "invariant suites", 120}, o, t);
  }
  std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
