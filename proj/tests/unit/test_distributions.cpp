#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "gcs/distributions.hpp"
#include "gcs/metrics.hpp"

using namespace gcs;

namespace {

void check_probs(const CategoricalDistribution& d, std::vector<double> expected) {
  REQUIRE(d.codebook_size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(d[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }
}

TokenGrid constant_grid(std::size_t h, std::size_t w, std::size_t n, Token t) {
  return TokenGrid(h, w, n, std::vector<Token>(h * w, t));
}

}  // namespace

TEST_CASE("histogram_from_grid") {
  const TokenGrid g(2, 2, 4, {0, 0, 1, 2});
  const auto raw = histogram_from_grid(g, 0.0);
  check_probs(raw, {0.5, 0.25, 0.25, 0.0});
  CHECK(raw.source_mass() == 4.0);
  check_probs(histogram_from_grid(g, 0.5), {2.5 / 6, 1.5 / 6, 1.5 / 6, 0.5 / 6});
  check_probs(histogram_from_grid(constant_grid(2, 2, 4, 3), 0.0), {0, 0, 0, 1});
  CHECK_THROWS_AS(histogram_from_grid(g, -0.1), ValidationError);
}

TEST_CASE("histogram_by_region") {
  const TokenGrid g(2, 2, 4, {0, 1, 2, 3});
  const SemanticGrid split(2, 2, 2, {0, 0, 1, 1});
  const auto r = histogram_by_region(g, split, 0.0);
  REQUIRE(r.has(0));
  REQUIRE(r.has(1));
  check_probs(*r.per_label[0], {0.5, 0.5, 0, 0});
  check_probs(*r.per_label[1], {0, 0, 0.5, 0.5});
  CHECK(r.per_label_mass == std::vector<double>{2, 2});

  const SemanticGrid all0(2, 2, 2, {0, 0, 0, 0});
  CHECK_FALSE(histogram_by_region(g, all0, 0.0).has(1));
  const auto smoothed = histogram_by_region(g, all0, 0.5);
  REQUIRE(smoothed.has(1));
  check_probs(*smoothed.per_label[1], {0.25, 0.25, 0.25, 0.25});

  CHECK_THROWS_AS(histogram_by_region(g, SemanticGrid(1, 4, 2, {0, 0, 1, 1}), 0.0),
                  ValidationError);
}

TEST_CASE("histogram_by_cell") {
  const TokenGrid g(2, 2, 4, {0, 1, 2, 3});
  const auto cells = histogram_by_cell(std::vector{g}, {2, 2}, 0.0);
  for (Token t = 0; t < 4; ++t) check_probs(cells.per_cell[t], [&] {
    std::vector<double> v(4, 0.0);
    v[t] = 1.0;
    return v;
  }());
  CHECK(cells.at(1, 0)[2] == 1.0);

  const auto single = histogram_by_cell(std::vector{g}, {1, 1}, 0.5);
  CHECK(single.per_cell[0] == histogram_from_grid(g, 0.5));

  const TokenGrid h(2, 2, 4, {3, 1, 0, 0});
  const auto once = histogram_by_cell(std::vector{h}, {2, 1}, 0.0);
  const auto twice = histogram_by_cell(std::vector{h, h}, {2, 1}, 0.0);
  for (std::size_t c = 0; c < 2; ++c) check_probs(twice.per_cell[c], {once.per_cell[c].probs().begin(), once.per_cell[c].probs().end()});

  CHECK_THROWS_AS(histogram_by_cell(std::vector<TokenGrid>{}, {1, 1}, 0.0), ValidationError);
  CHECK_THROWS_AS(histogram_by_cell(std::vector{g, TokenGrid(1, 4, 4, {0, 0, 0, 0})}, {1, 1}, 0.0),
                  ValidationError);
  CHECK_THROWS_AS(histogram_by_cell(std::vector{g}, {3, 1}, 0.0), ValidationError);
}

TEST_CASE("floor-partition cell mapping") {
  const CellTiling t{2, 2};
  CHECK(t.cell_of({3, 3}, 4, 4) == 3);
  CHECK(t.cell_of({1, 2}, 4, 4) == 1);
  // 5 rows into 2 cells: rows 0-2 -> 0, rows 3-4 -> 1.
  const CellTiling rows{2, 1};
  CHECK(rows.cell_of({2, 0}, 5, 1) == 0);
  CHECK(rows.cell_of({3, 0}, 5, 1) == 1);
}

TEST_CASE("average_distributions") {
  const CategoricalDistribution a({1, 0}, 3);
  const CategoricalDistribution b({0, 1}, 1);
  check_probs(average_distributions(std::vector{a, b}), {0.5, 0.5});
  check_probs(average_distributions(std::vector{a, b}, Weighting::mass), {0.75, 0.25});
  CHECK(average_distributions(std::vector{a})[0] == 1.0);
  CHECK_THROWS_AS(average_distributions(std::vector<CategoricalDistribution>{}), ValidationError);
  CHECK_THROWS_AS(average_distributions(std::vector{a, CategoricalDistribution::uniform(3)}),
                  ValidationError);
  CHECK_THROWS_AS(average_distributions(std::vector{CategoricalDistribution({1, 0})},
                                        Weighting::mass),
                  ValidationError);
}

TEST_CASE("average_regional keeps absent labels absent") {
  RegionalDistributions x{2, 2, {CategoricalDistribution({1, 0}, 2), std::nullopt}, {2, 0}};
  RegionalDistributions y{2, 2, {CategoricalDistribution({0, 1}, 2), std::nullopt}, {2, 0}};
  const auto avg = average_regional(std::vector{x, y});
  CHECK_FALSE(avg.has(1));
  check_probs(*avg.per_label[0], {0.5, 0.5});
}

TEST_CASE("monte carlo estimator") {
  const TokenGrid g(2, 2, 4, {0, 0, 1, 3});
  const auto one = InMemorySceneSource::from_grids(std::vector{g});
  const auto h = histogram_from_grid(g, 0.5);
  for (std::size_t k : {1, 5, 50}) {
    check_probs(monte_carlo_dataset_distribution(one, k, 0.5, 7), {h.probs().begin(), h.probs().end()});
  }

  const auto two = InMemorySceneSource::from_grids(
      std::vector{constant_grid(2, 2, 4, 0), constant_grid(2, 2, 4, 1)});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = monte_carlo_dataset_distribution(two, 1, 0.0, seed);
    CHECK(((d[0] == 1.0 && d[1] == 0.0) || (d[0] == 0.0 && d[1] == 1.0)));
  }

  CHECK(monte_carlo_dataset_distribution(two, 100, 0.0, 3) ==
        monte_carlo_dataset_distribution(two, 100, 0.0, 3));
  CHECK_THROWS_AS(monte_carlo_dataset_distribution(two, 0, 0.0, 3), ValidationError);
}

TEST_CASE("monte carlo estimate is the draw-count mixture") {
  // With one-hot grids at 0 and 1 the estimate must be exactly (c/K, 1 - c/K)
  // where c counts draws of the first grid.
  const auto two = InMemorySceneSource::from_grids(
      std::vector{constant_grid(2, 2, 4, 0), constant_grid(2, 2, 4, 1)});
  const std::size_t k = 10000;
  std::size_t within = 0;
  const std::size_t seeds = 200;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    const auto idx = monte_carlo_indices(2, k, seed);
    const auto c = double(std::count(idx.begin(), idx.end(), 0));
    const auto d = monte_carlo_dataset_distribution(two, k, 0.0, seed);
    CHECK(d[0] == doctest::Approx(c / k).epsilon(1e-12));
    const double tv = std::abs(d[0] - 0.5);
    within += tv < 0.02;
  }
  // P(|Bin(10000, 1/2) / 10000 - 1/2| >= 0.02) is about 6e-5.
  CHECK(double(within) / seeds >= 0.99);
}

TEST_CASE("regional monte carlo averages only grids where the label appears") {
  std::vector<Scene> scenes{
      {TokenGrid(1, 2, 2, {0, 0}), SemanticGrid(1, 2, 2, {0, 0})},
      {TokenGrid(1, 2, 2, {1, 1}), SemanticGrid(1, 2, 2, {0, 1})},
  };
  const InMemorySceneSource src(scenes);
  const auto r = monte_carlo_regional_distribution(src, 50, 0.0, 1);
  REQUIRE(r.has(1));
  check_probs(*r.per_label[1], {0, 1});
  CHECK_THROWS_AS(monte_carlo_regional_distribution(InMemorySceneSource::from_grids(
                                                        std::vector{TokenGrid(1, 1, 2, {0})}),
                                                    5, 0.0, 1),
                  ValidationError);
}
