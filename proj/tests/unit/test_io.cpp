#include <filesystem>

#include "doctest.h"
#include "gcs/io.hpp"
#include "gcs/world.hpp"

using namespace gcs;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::path(GCS_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("token grid byte layout") {
  const TokenGrid g(1, 2, 300, {7, 258});
  const auto bytes = io::encode_token_grid(g);
  const std::vector<std::uint8_t> expected{
      'T', 'G', 'R', 'D', 1, 0, 0, 0,      // magic, version, reserved
      1,   0,   0,   0,   2, 0, 0, 0,      // height, width
      44,  1,   0,   0,                    // bound = 300
      7,   0,   0,   0,   2, 1, 0, 0};     // tokens
  CHECK(bytes == expected);
  CHECK(io::decode_token_grid(bytes) == g);

  const SemanticGrid s(2, 1, 3, {2, 0});
  const auto sb = io::encode_semantic_grid(s);
  CHECK(std::string(sb.begin(), sb.begin() + 4) == "SGRD");
  CHECK(io::decode_semantic_grid(sb) == s);
}

TEST_CASE("malformed grid files") {
  auto bytes = io::encode_token_grid(TokenGrid(2, 2, 4, {0, 1, 2, 3}));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(io::decode_token_grid(bad_magic), ValidationError);
  CHECK_THROWS_AS(io::decode_semantic_grid(bytes), ValidationError);
  auto bad_version = bytes;
  bad_version[4] = 2;
  CHECK(error_of([&] { io::decode_token_grid(bad_version); }).find("version") != std::string::npos);
  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(io::decode_token_grid(truncated), ValidationError);
  auto out_of_range = bytes;
  out_of_range[20 + 3 * 4] = 9;
  CHECK_THROWS_AS(io::decode_token_grid(out_of_range), ValidationError);
  CHECK_THROWS_AS(io::read_token_grid(fs::path(GCS_TEST_TMP) / "does_not_exist.tgrd"), IoError);
}

TEST_CASE("grid files round-trip") {
  const auto dir = temp_dir("io_grids");
  const TokenGrid g(3, 2, 5, {0, 1, 2, 3, 4, 0});
  io::write_token_grid(dir / "a.tgrd", g);
  CHECK(io::read_token_grid(dir / "a.tgrd") == g);
}

TEST_CASE("json diagnostics name the key path") {
  const auto missing = error_of([] { io::distribution_from_json(R"({"codebook_size": 2})"); });
  CHECK(missing.find("probs") != std::string::npos);
  const auto wrong = error_of(
      [] { io::distribution_from_json(R"({"codebook_size": 2, "probs": [0.5, "x"]})"); });
  CHECK(wrong.find("probs[1]") != std::string::npos);
  CHECK_THROWS_AS(io::distribution_from_json("{not json"), ValidationError);
  CHECK_THROWS_AS(io::distribution_from_json(R"({"codebook_size": 3, "probs": [0.5, 0.5]})"),
                  ValidationError);
}

TEST_CASE("statistics and tables round-trip bit for bit") {
  const CategoricalDistribution d({0.1, 0.2, 0.7}, 12.5);
  CHECK(io::distribution_from_json(io::to_json(d)) == d);
  CHECK(io::distribution_from_json(io::to_json(d)).source_mass() == 12.5);

  const RegionalDistributions r{2, 3, {d, std::nullopt}, {12.5, 0}};
  const auto r2 = io::regional_from_json(io::to_json(r));
  CHECK(*r2.per_label[0] == d);
  CHECK_FALSE(r2.has(1));

  const GuidanceStatistics stats{d, r, std::nullopt};
  const auto s2 = io::statistics_from_json(io::to_json(stats));
  CHECK(s2.global == d);
  CHECK(s2.regional.has_value());
  CHECK(io::statistics_from_json(io::to_json(d)).natural_mode() == GuidanceMode::global);

  const auto table = LikelihoodTable::make_spatial(
      LikelihoodVector::from_weights({1, 0.5}), {1, 2},
      {LikelihoodVector::from_weights({0.25, 1}), LikelihoodVector::identity(2)}, 1.5);
  const auto t2 = io::likelihood_table_from_json(io::to_json(table));
  CHECK(t2.mode() == GuidanceMode::spatial);
  CHECK(t2.exponent() == 1.5);
  CHECK(io::to_json(t2) == io::to_json(table));
}

TEST_CASE("prior model and config round-trip") {
  const std::vector<Scene> corpus{{TokenGrid(2, 2, 3, {0, 1, 2, 2}), SemanticGrid(2, 2, 2, {0, 1, 1, 0})}};
  const auto model = train_markov_prior(corpus, ContextTemplate::full(), true, 0.25);
  const auto m2 = io::markov_prior_from_json(io::to_json(model));
  CHECK(m2.tables() == model.tables());
  CHECK(m2.context() == model.context());
  CHECK(io::to_json(m2) == io::to_json(model));

  const auto cfg = world::landscape_2x4();
  CHECK(io::to_json(io::benchmark_config_from_json(io::to_json(cfg))) == io::to_json(cfg));
}

TEST_CASE("manifest paths resolve against the manifest directory") {
  const auto dir = temp_dir("io_manifest");
  fs::create_directories(dir / "g");
  io::write_token_grid(dir / "g" / "a.tgrd", TokenGrid(1, 1, 2, {1}));
  io::write_text(dir / "manifest.json",
                 R"({"name": "m", "scenes": [{"tokens": "g/a.tgrd", "seed": 4}]})");
  const auto m = io::read_corpus_manifest(dir);
  REQUIRE(m.scenes.size() == 1);
  CHECK(m.scenes[0].tokens == dir / "g" / "a.tgrd");
  CHECK(m.scenes[0].seed == 4);
  const io::FileSceneSource src(m.scenes);
  CHECK(src.load(0).tokens == TokenGrid(1, 1, 2, {1}));
  CHECK_THROWS_AS(io::read_corpus_manifest(dir / "nope"), IoError);
}
