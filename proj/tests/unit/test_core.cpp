#include <cmath>
#include <limits>

#include "doctest.h"
#include "gcs/core.hpp"

using namespace gcs;

namespace {

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("validate_grid") {
  CHECK_NOTHROW(validate_grid(TokenGrid(2, 2, 4, {0, 1, 2, 3})));
  CHECK(error_of([] { TokenGrid(2, 2, 4, {0, 1, 2, 4}); }) == "token 4 out of range at (1,1)");
  CHECK(error_of([] { TokenGrid(1, 1, 2, {}); }).find("length mismatch") == 0);
  CHECK(error_of([] { SemanticGrid(1, 2, 2, {0, 2}); }) == "label 2 out of range at (0,1)");
}

TEST_CASE("codebook size must be at least two") {
  CHECK_THROWS_AS(CodebookSpec(1), ValidationError);
  CHECK(CodebookSpec(2).size == 2);
}

TEST_CASE("grid accessors follow raster order") {
  const TokenGrid g(2, 3, 6, {0, 1, 2, 3, 4, 5});
  CHECK(g.at(1, 0) == 3);
  CHECK(g.at(Position{0, 2}) == 2);
  CHECK(g.codebook_size() == 6);
  const SemanticGrid s(3, 2, 2, {0, 0, 0, 0, 1, 1});
  CHECK_THROWS_AS(require_same_shape(g, s), ValidationError);
  CHECK_NOTHROW(require_same_shape(g, SemanticGrid(2, 3, 1, std::vector<Label>(6, 0))));
}

TEST_CASE("normalize") {
  const auto d = normalize(std::vector<double>{2, 1, 1});
  CHECK(d[0] == 0.5);
  CHECK(d[1] == 0.25);
  CHECK(d[2] == 0.25);
  CHECK_THROWS_AS(normalize(std::vector<double>{5}), ValidationError);
  CHECK(error_of([] { normalize(std::vector<double>{0, 0, 0}); }) == "zero total mass");
  CHECK_THROWS_AS(normalize(std::vector<double>{1, -1, 1}), ValidationError);
  CHECK_THROWS_AS(normalize(std::vector<double>{1, std::numeric_limits<double>::infinity()}),
                  ValidationError);
  CHECK_THROWS_AS(normalize(std::vector<double>{1, std::nan("")}), ValidationError);
}

TEST_CASE("categorical distribution invariants") {
  CHECK_NOTHROW(CategoricalDistribution({0.5, 0.5 + 5e-10}));
  CHECK_THROWS_AS(CategoricalDistribution({0.5, 0.5 + 2e-9}), ValidationError);
  CHECK_THROWS_AS(CategoricalDistribution({1.0}), ValidationError);
  CHECK_THROWS_AS(CategoricalDistribution({1.5, -0.5}), ValidationError);
  CHECK_THROWS_AS(CategoricalDistribution({0.5, 0.5}, -1.0), ValidationError);
  const auto u = CategoricalDistribution::uniform(4);
  for (double p : u.probs()) CHECK(p == 0.25);
  const auto h = CategoricalDistribution::one_hot(3, 2);
  CHECK(h[2] == 1.0);
  CHECK(h[0] == 0.0);
  CHECK(normalize(std::vector<double>{3, 1}, 4.0).source_mass() == 4.0);
}
