#include "gcs/io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

namespace gcs::io {

using nlohmann::json;

namespace {

constexpr std::uint16_t kGridVersion = 1;
constexpr std::size_t kGridHeaderSize = 20;

// ---------------------------------------------------------------------------
// binary grids

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(std::uint8_t(v));
  out.push_back(std::uint8_t(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(std::uint8_t(v >> s));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return std::uint16_t(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return std::uint32_t(b[at]) | (std::uint32_t(b[at + 1]) << 8) |
         (std::uint32_t(b[at + 2]) << 16) | (std::uint32_t(b[at + 3]) << 24);
}

std::uint32_t narrow_u32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFu) throw ValidationError(std::string(what) + " does not fit in 32 bits");
  return std::uint32_t(v);
}

std::vector<std::uint8_t> encode_grid(const char (&magic)[5], std::size_t height,
                                      std::size_t width, std::size_t bound,
                                      std::span<const std::uint32_t> values) {
  std::vector<std::uint8_t> out;
  out.reserve(kGridHeaderSize + 4 * values.size());
  out.insert(out.end(), magic, magic + 4);
  put_u16(out, kGridVersion);
  put_u16(out, 0);
  put_u32(out, narrow_u32(height, "height"));
  put_u32(out, narrow_u32(width, "width"));
  put_u32(out, narrow_u32(bound, "bound"));
  for (auto v : values) put_u32(out, v);
  return out;
}

struct DecodedGrid {
  std::size_t height;
  std::size_t width;
  std::size_t bound;
  std::vector<std::uint32_t> values;
};

DecodedGrid decode_grid(const char (&magic)[5], std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kGridHeaderSize) {
    throw ValidationError(std::string(magic) + ": truncated header");
  }
  if (std::memcmp(bytes.data(), magic, 4) != 0) {
    throw ValidationError(std::string("bad magic: expected ") + magic);
  }
  const auto version = get_u16(bytes, 4);
  if (version != kGridVersion) {
    throw ValidationError(std::string(magic) + ": unsupported version " + std::to_string(version));
  }
  DecodedGrid g{get_u32(bytes, 8), get_u32(bytes, 12), get_u32(bytes, 16), {}};
  const std::uint64_t cells = std::uint64_t(g.height) * g.width;
  if (bytes.size() - kGridHeaderSize != cells * 4) {
    throw ValidationError(std::string(magic) + ": truncated payload (expected " +
                          std::to_string(cells * 4) + " bytes, found " +
                          std::to_string(bytes.size() - kGridHeaderSize) + ")");
  }
  g.values.resize(std::size_t(cells));
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    g.values[i] = get_u32(bytes, kGridHeaderSize + 4 * i);
  }
  return g;
}

// ---------------------------------------------------------------------------
// JSON access with key paths in diagnostics

json parse(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
  const std::string where = path.empty() ? key : path + "." + key;
  if (!obj.is_object()) throw ValidationError("'" + path + "' must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError("missing key '" + where + "'");
  return *it;
}

std::string child(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string child(const std::string& path, std::size_t index) {
  return path + "[" + std::to_string(index) + "]";
}

std::uint64_t as_uint(const json& v, const std::string& path) {
  if (!v.is_number_unsigned()) {
    throw ValidationError("key '" + path + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError("key '" + path + "' must be a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ValidationError("key '" + path + "' must be a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ValidationError("key '" + path + "' must be a string");
  return v.get<std::string>();
}

const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ValidationError("key '" + path + "' must be an array");
  return v;
}

std::vector<double> as_doubles(const json& v, const std::string& path) {
  as_array(v, path);
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_double(v[i], child(path, i)));
  return out;
}

std::uint64_t uint_member(const json& obj, const std::string& key, const std::string& path) {
  return as_uint(member(obj, key, path), child(path, key));
}

double double_member(const json& obj, const std::string& key, const std::string& path) {
  return as_double(member(obj, key, path), child(path, key));
}

/// Re-throws constructor validation failures with the key path attached.
template <class F>
auto at_path(const std::string& path, F&& build) {
  try {
    return build();
  } catch (const ValidationError& e) {
    throw ValidationError("'" + (path.empty() ? std::string("<root>") : path) + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// documents

json dist_json(const CategoricalDistribution& d) {
  return json{{"codebook_size", d.codebook_size()},
              {"probs", std::vector<double>(d.probs().begin(), d.probs().end())},
              {"source_mass", d.source_mass()}};
}

CategoricalDistribution dist_from(const json& j, const std::string& path) {
  const auto n = uint_member(j, "codebook_size", path);
  auto probs = as_doubles(member(j, "probs", path), child(path, "probs"));
  if (probs.size() != n) {
    throw ValidationError("key '" + child(path, "probs") + "' has " +
                          std::to_string(probs.size()) + " entries, codebook_size is " +
                          std::to_string(n));
  }
  double mass = 0.0;
  if (j.contains("source_mass")) mass = double_member(j, "source_mass", path);
  return at_path(path, [&] { return CategoricalDistribution(std::move(probs), mass); });
}

json regional_json(const RegionalDistributions& r) {
  json per_label = json::array();
  for (const auto& d : r.per_label) per_label.push_back(d ? dist_json(*d) : json(nullptr));
  return json{{"label_count", r.label_count},
              {"codebook_size", r.codebook_size},
              {"per_label", per_label},
              {"per_label_mass", r.per_label_mass}};
}

RegionalDistributions regional_from(const json& j, const std::string& path) {
  RegionalDistributions r;
  r.label_count = uint_member(j, "label_count", path);
  const auto& per_label = as_array(member(j, "per_label", path), child(path, "per_label"));
  if (per_label.size() != r.label_count) {
    throw ValidationError("key '" + child(path, "per_label") + "' must have label_count entries");
  }
  r.per_label_mass =
      as_doubles(member(j, "per_label_mass", path), child(path, "per_label_mass"));
  if (r.per_label_mass.size() != r.label_count) {
    throw ValidationError("key '" + child(path, "per_label_mass") +
                          "' must have label_count entries");
  }
  if (j.contains("codebook_size")) r.codebook_size = uint_member(j, "codebook_size", path);
  for (std::size_t l = 0; l < per_label.size(); ++l) {
    const auto p = child(child(path, "per_label"), l);
    if (per_label[l].is_null()) {
      r.per_label.emplace_back(std::nullopt);
      continue;
    }
    auto d = dist_from(per_label[l], p);
    if (r.codebook_size == 0) r.codebook_size = d.codebook_size();
    if (d.codebook_size() != r.codebook_size) {
      throw ValidationError("key '" + p + "' has a different codebook size");
    }
    r.per_label.emplace_back(std::move(d));
  }
  if (r.codebook_size == 0) {
    throw ValidationError("missing key '" + child(path, "codebook_size") + "'");
  }
  return r;
}

json spatial_json(const SpatialDistributions& s) {
  json rows = json::array();
  for (std::size_t r = 0; r < s.tiling.rows; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < s.tiling.cols; ++c) row.push_back(dist_json(s.at(r, c)));
    rows.push_back(std::move(row));
  }
  return json{{"cell_rows", s.tiling.rows}, {"cell_cols", s.tiling.cols}, {"per_cell", rows}};
}

SpatialDistributions spatial_from(const json& j, const std::string& path) {
  SpatialDistributions s;
  s.tiling.rows = uint_member(j, "cell_rows", path);
  s.tiling.cols = uint_member(j, "cell_cols", path);
  if (s.tiling.rows == 0 || s.tiling.cols == 0) {
    throw ValidationError("'" + path + "': cell_rows and cell_cols must be positive");
  }
  const auto cells_path = child(path, "per_cell");
  const auto& rows = as_array(member(j, "per_cell", path), cells_path);
  if (rows.size() != s.tiling.rows) {
    throw ValidationError("key '" + cells_path + "' must have cell_rows rows");
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto rp = child(cells_path, r);
    const auto& row = as_array(rows[r], rp);
    if (row.size() != s.tiling.cols) {
      throw ValidationError("key '" + rp + "' must have cell_cols entries");
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      s.per_cell.push_back(dist_from(row[c], child(rp, c)));
      if (s.per_cell.back().codebook_size() != s.per_cell.front().codebook_size()) {
        throw ValidationError("key '" + child(rp, c) + "' has a different codebook size");
      }
    }
  }
  return s;
}

json weights_json(const LikelihoodVector& v) {
  return std::vector<double>(v.weights().begin(), v.weights().end());
}

LikelihoodVector weights_from(const json& j, const std::string& path) {
  auto w = as_doubles(j, path);
  return at_path(path, [&] { return LikelihoodVector::from_weights(std::move(w)); });
}

std::filesystem::path manifest_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) return path / "manifest.json";
  return path;
}

ManifestEntry entry_from(const json& j, const std::string& path, const std::filesystem::path& base,
                         bool style_required) {
  ManifestEntry e;
  e.tokens = base / as_string(member(j, "tokens", path), child(path, "tokens"));
  if (j.contains("semantics") && !j["semantics"].is_null()) {
    e.semantics = base / as_string(j["semantics"], child(path, "semantics"));
  }
  if (style_required || j.contains("style")) {
    e.style = as_string(member(j, "style", path), child(path, "style"));
  }
  if (j.contains("seed")) e.seed = uint_member(j, "seed", path);
  return e;
}

json style_json(const world::StyleSpec& s) {
  json labels = json::array();
  for (const auto& d : s.per_label) {
    labels.push_back(json{{"probs", std::vector<double>(d.probs().begin(), d.probs().end())}});
  }
  return json{{"name", s.name}, {"coherence", s.coherence}, {"labels", labels}};
}

world::StyleSpec style_from(const json& j, const std::string& path, std::size_t codebook_size) {
  world::StyleSpec s;
  s.name = as_string(member(j, "name", path), child(path, "name"));
  if (j.contains("coherence")) s.coherence = double_member(j, "coherence", path);
  const auto lp = child(path, "labels");
  const auto& labels = as_array(member(j, "labels", path), lp);
  for (std::size_t l = 0; l < labels.size(); ++l) {
    const auto p = child(lp, l);
    const auto& entry = labels[l];
    std::vector<double> w;
    if (entry.is_object() && entry.contains("probs")) {
      w = as_doubles(entry["probs"], child(p, "probs"));
    } else if (entry.is_object() && entry.contains("support")) {
      // Uniform over the listed indices.
      const auto sp = child(p, "support");
      const auto& support = as_array(entry["support"], sp);
      w.assign(codebook_size, 0.0);
      for (std::size_t i = 0; i < support.size(); ++i) {
        const auto t = as_uint(support[i], child(sp, i));
        if (t >= codebook_size) throw ValidationError("key '" + child(sp, i) + "' out of range");
        w[t] = 1.0;
      }
    } else {
      throw ValidationError("key '" + p + "' needs 'probs' or 'support'");
    }
    if (w.size() != codebook_size) {
      throw ValidationError("key '" + p + "' must cover codebook_size entries");
    }
    s.per_label.push_back(at_path(p, [&] { return normalize(w); }));
  }
  at_path(path, [&] {
    s.validate();
    return 0;
  });
  return s;
}

json layout_json(const world::LayoutSpec& l) {
  json j{{"kind", world::to_string(l.kind)}};
  switch (l.kind) {
    case world::LayoutKind::horizon:
      j["min_fraction"] = l.min_fraction;
      j["max_fraction"] = l.max_fraction;
      break;
    case world::LayoutKind::bands:
      j["bands"] = l.bands;
      break;
    case world::LayoutKind::constant:
      j["label"] = l.label;
      break;
  }
  return j;
}

world::LayoutSpec layout_from(const json& j, const std::string& path, std::size_t label_count) {
  world::LayoutSpec l;
  l.label_count = label_count;
  l.kind = at_path(child(path, "kind"), [&] {
    return world::layout_kind_from_string(
        as_string(member(j, "kind", path), child(path, "kind")));
  });
  if (j.contains("min_fraction")) l.min_fraction = double_member(j, "min_fraction", path);
  if (j.contains("max_fraction")) l.max_fraction = double_member(j, "max_fraction", path);
  if (j.contains("bands")) l.bands = uint_member(j, "bands", path);
  if (j.contains("label")) l.label = Label(uint_member(j, "label", path));
  at_path(path, [&] {
    l.validate();
    return 0;
  });
  return l;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> encode_token_grid(const TokenGrid& grid) {
  return encode_grid("TGRD", grid.height(), grid.width(), grid.codebook_size(), grid.tokens());
}

std::vector<std::uint8_t> encode_semantic_grid(const SemanticGrid& grid) {
  return encode_grid("SGRD", grid.height(), grid.width(), grid.label_count(), grid.labels());
}

TokenGrid decode_token_grid(std::span<const std::uint8_t> bytes) {
  auto g = decode_grid("TGRD", bytes);
  return TokenGrid(g.height, g.width, g.bound, std::move(g.values));
}

SemanticGrid decode_semantic_grid(std::span<const std::uint8_t> bytes) {
  auto g = decode_grid("SGRD", bytes);
  return SemanticGrid(g.height, g.width, g.bound, std::move(g.values));
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("cannot read " + path.string());
  return bytes;
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw IoError("cannot write " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void write_token_grid(const std::filesystem::path& path, const TokenGrid& grid) {
  write_bytes(path, encode_token_grid(grid));
}

void write_semantic_grid(const std::filesystem::path& path, const SemanticGrid& grid) {
  write_bytes(path, encode_semantic_grid(grid));
}

TokenGrid read_token_grid(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  try {
    return decode_token_grid(bytes);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

SemanticGrid read_semantic_grid(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  try {
    return decode_semantic_grid(bytes);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string to_json(const CategoricalDistribution& dist) { return dist_json(dist).dump(2); }

CategoricalDistribution distribution_from_json(std::string_view text) {
  return dist_from(parse(text), "");
}

std::string to_json(const RegionalDistributions& regional) {
  return regional_json(regional).dump(2);
}

RegionalDistributions regional_from_json(std::string_view text) {
  return regional_from(parse(text), "");
}

std::string to_json(const SpatialDistributions& spatial) { return spatial_json(spatial).dump(2); }

SpatialDistributions spatial_from_json(std::string_view text) {
  return spatial_from(parse(text), "");
}

std::string to_json(const GuidanceStatistics& stats) {
  json j;
  if (stats.spatial) {
    j = spatial_json(*stats.spatial);
    j["global"] = dist_json(stats.global);
  } else if (stats.regional) {
    j = regional_json(*stats.regional);
    j["global"] = dist_json(stats.global);
  } else {
    j = dist_json(stats.global);
  }
  return j.dump(2);
}

GuidanceStatistics statistics_from_json(std::string_view text) {
  const json j = parse(text);
  if (!j.is_object()) throw ValidationError("statistics document must be a JSON object");
  if (j.contains("cell_rows")) {
    auto spatial = spatial_from(j, "");
    auto global = j.contains("global")
                      ? dist_from(j["global"], "global")
                      : average_distributions(spatial.per_cell, Weighting::mass);
    return GuidanceStatistics{std::move(global), std::nullopt, std::move(spatial)};
  }
  if (j.contains("label_count")) {
    auto regional = regional_from(j, "");
    std::optional<CategoricalDistribution> global;
    if (j.contains("global")) {
      global = dist_from(j["global"], "global");
    } else {
      std::vector<CategoricalDistribution> present;
      for (const auto& d : regional.per_label) {
        if (d) present.push_back(*d);
      }
      if (present.empty()) throw ValidationError("regional statistics have no present label");
      global = average_distributions(present, Weighting::mass);
    }
    return GuidanceStatistics{std::move(*global), std::move(regional), std::nullopt};
  }
  return GuidanceStatistics{dist_from(j, ""), std::nullopt, std::nullopt};
}

std::string to_json(const LikelihoodTable& table) {
  json j{{"mode", to_string(table.mode())},
         {"exponent", table.exponent()},
         {"global", weights_json(table.global())},
         {"regional", nullptr},
         {"spatial", nullptr}};
  if (table.mode() == GuidanceMode::regional) {
    json per_label = json::array();
    for (const auto& v : table.regional()) per_label.push_back(v ? weights_json(*v) : json());
    j["regional"] = per_label;
  } else if (table.mode() == GuidanceMode::spatial) {
    const auto& t = table.tiling();
    json rows = json::array();
    for (std::size_t r = 0; r < t.rows; ++r) {
      json row = json::array();
      for (std::size_t c = 0; c < t.cols; ++c) {
        row.push_back(weights_json(table.spatial()[r * t.cols + c]));
      }
      rows.push_back(std::move(row));
    }
    j["spatial"] = json{{"cell_rows", t.rows}, {"cell_cols", t.cols}, {"cells", rows}};
  }
  return j.dump(2);
}

LikelihoodTable likelihood_table_from_json(std::string_view text) {
  const json j = parse(text);
  const auto mode = at_path("mode", [&] {
    return guidance_mode_from_string(as_string(member(j, "mode", ""), "mode"));
  });
  const double exponent = double_member(j, "exponent", "");
  auto global = weights_from(member(j, "global", ""), "global");
  switch (mode) {
    case GuidanceMode::global:
      return at_path("", [&] { return LikelihoodTable::make_global(std::move(global), exponent); });
    case GuidanceMode::regional: {
      const auto& arr = as_array(member(j, "regional", ""), "regional");
      std::vector<std::optional<LikelihoodVector>> per_label;
      for (std::size_t l = 0; l < arr.size(); ++l) {
        if (arr[l].is_null()) {
          per_label.emplace_back(std::nullopt);
        } else {
          per_label.emplace_back(weights_from(arr[l], child(std::string("regional"), l)));
        }
      }
      return at_path("regional", [&] {
        return LikelihoodTable::make_regional(std::move(global), std::move(per_label), exponent);
      });
    }
    case GuidanceMode::spatial: {
      const auto& sp = member(j, "spatial", "");
      CellTiling tiling{uint_member(sp, "cell_rows", "spatial"),
                        uint_member(sp, "cell_cols", "spatial")};
      const auto& rows = as_array(member(sp, "cells", "spatial"), "spatial.cells");
      std::vector<LikelihoodVector> cells;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto rp = child(std::string("spatial.cells"), r);
        const auto& row = as_array(rows[r], rp);
        for (std::size_t c = 0; c < row.size(); ++c) cells.push_back(weights_from(row[c], child(rp, c)));
      }
      return at_path("spatial", [&] {
        return LikelihoodTable::make_spatial(std::move(global), tiling, std::move(cells), exponent);
      });
    }
  }
  throw ValidationError("unknown guidance mode");
}

std::string to_json(const MarkovGridPrior& model) {
  json context = json::array();
  for (const auto& o : model.context().offsets()) context.push_back(json::array({o.dr, o.dc}));
  json tables = json::array();
  for (const auto& [key, counts] : model.tables()) {
    json ctx = json::array();
    for (auto t : key.context) {
      if (t == kBoundarySymbol) {
        ctx.push_back("B");
      } else {
        ctx.push_back(std::uint64_t(t));
      }
    }
    json c = json::object();
    for (std::size_t t = 0; t < counts.size(); ++t) {
      if (counts[t] != 0) c[std::to_string(t)] = counts[t];
    }
    tables.push_back(json{{"context", ctx},
                          {"label", key.label == kNoLabel ? json() : json(std::uint64_t(key.label))},
                          {"counts", c}});
  }
  return json{{"codebook_size", model.codebook_size()},
              {"context", context},
              {"conditional", model.conditional()},
              {"smoothing_alpha", model.smoothing_alpha()},
              {"tables", tables}}
      .dump(1);
}

MarkovGridPrior markov_prior_from_json(std::string_view text) {
  const json j = parse(text);
  const auto n = uint_member(j, "codebook_size", "");
  const bool conditional = as_bool(member(j, "conditional", ""), "conditional");
  const double alpha = double_member(j, "smoothing_alpha", "");

  std::vector<ContextOffset> offsets;
  const auto& ctx = as_array(member(j, "context", ""), "context");
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    const auto p = child(std::string("context"), i);
    const auto& pair = as_array(ctx[i], p);
    if (pair.size() != 2 || !pair[0].is_number_integer() || !pair[1].is_number_integer()) {
      throw ValidationError("key '" + p + "' must be [dr, dc]");
    }
    offsets.push_back({pair[0].get<int>(), pair[1].get<int>()});
  }
  auto tmpl = at_path("context", [&] { return ContextTemplate(std::move(offsets)); });

  CountTables tables;
  const auto& arr = as_array(member(j, "tables", ""), "tables");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto p = child(std::string("tables"), i);
    const auto& entry = arr[i];
    ContextKey key;
    const auto cp = child(p, "context");
    const auto& c = as_array(member(entry, "context", p), cp);
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (c[k].is_string() && c[k].get<std::string>() == "B") {
        key.context.push_back(kBoundarySymbol);
      } else {
        key.context.push_back(std::int64_t(as_uint(c[k], child(cp, k))));
      }
    }
    const auto& label = member(entry, "label", p);
    key.label = label.is_null() ? kNoLabel : std::int64_t(as_uint(label, child(p, "label")));
    std::vector<std::uint64_t> counts(n, 0);
    const auto& cj = member(entry, "counts", p);
    if (!cj.is_object()) throw ValidationError("key '" + child(p, "counts") + "' must be an object");
    for (auto it = cj.begin(); it != cj.end(); ++it) {
      const auto kp = child(child(p, "counts"), it.key());
      std::size_t pos = 0;
      unsigned long long t = 0;
      try {
        t = std::stoull(it.key(), &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != it.key().size() || t >= n) {
        throw ValidationError("key '" + kp + "' is not a token index");
      }
      counts[t] = as_uint(it.value(), kp);
    }
    if (!tables.emplace(std::move(key), std::move(counts)).second) {
      throw ValidationError("key '" + p + "' duplicates an earlier context");
    }
  }
  return at_path("", [&] {
    return MarkovGridPrior(n, std::move(tmpl), conditional, alpha, std::move(tables));
  });
}

std::string to_json(const world::BenchmarkConfig& config) {
  json styles = json::array();
  for (const auto& s : config.styles) styles.push_back(style_json(s));
  json layouts = json::array();
  for (const auto& l : config.layouts) layouts.push_back(layout_json(l));
  return json{{"name", config.name},
              {"codebook_size", config.codebook_size},
              {"label_count", config.label_count},
              {"height", config.height},
              {"width", config.width},
              {"corpus_size", config.corpus_size},
              {"exemplars_per_style", config.exemplars_per_style},
              {"seed", config.seed},
              {"styles", styles},
              {"mixture_weights", config.mixture_weights},
              {"layouts", layouts}}
      .dump(2);
}

world::BenchmarkConfig benchmark_config_from_json(std::string_view text) {
  const json j = parse(text);
  if (!j.is_object()) throw ValidationError("benchmark config must be a JSON object");
  world::BenchmarkConfig c;
  const bool from_preset = j.contains("preset");
  if (from_preset) {
    c = at_path("preset", [&] { return world::preset(as_string(j["preset"], "preset")); });
  }
  auto scalar = [&](const char* key, std::size_t& field) {
    if (j.contains(key) || !from_preset) field = uint_member(j, key, "");
  };
  if (j.contains("name") || !from_preset) c.name = as_string(member(j, "name", ""), "name");
  scalar("codebook_size", c.codebook_size);
  scalar("label_count", c.label_count);
  scalar("height", c.height);
  scalar("width", c.width);
  scalar("corpus_size", c.corpus_size);
  if (j.contains("exemplars_per_style")) {
    c.exemplars_per_style = uint_member(j, "exemplars_per_style", "");
  }
  if (j.contains("seed")) c.seed = uint_member(j, "seed", "");

  if (j.contains("styles") || !from_preset) {
    c.styles.clear();
    const auto& styles = as_array(member(j, "styles", ""), "styles");
    for (std::size_t i = 0; i < styles.size(); ++i) {
      c.styles.push_back(style_from(styles[i], child(std::string("styles"), i), c.codebook_size));
    }
  }
  if (j.contains("mixture_weights")) {
    c.mixture_weights = as_doubles(j["mixture_weights"], "mixture_weights");
  } else if (!from_preset) {
    c.mixture_weights.assign(c.styles.size(), 1.0);
  }
  if (j.contains("layouts") || !from_preset) {
    c.layouts.clear();
    const auto& layouts = as_array(member(j, "layouts", ""), "layouts");
    for (std::size_t i = 0; i < layouts.size(); ++i) {
      c.layouts.push_back(layout_from(layouts[i], child(std::string("layouts"), i), c.label_count));
    }
  }
  at_path("", [&] {
    c.validate();
    return 0;
  });
  return c;
}

CorpusManifest read_corpus_manifest(const std::filesystem::path& path) {
  const auto file = manifest_file(path);
  const json j = parse(read_text(file));
  const auto base = file.parent_path();
  CorpusManifest m;
  if (j.contains("name")) m.name = as_string(j["name"], "name");
  const auto& scenes = as_array(member(j, "scenes", ""), "scenes");
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    m.scenes.push_back(entry_from(scenes[i], child(std::string("scenes"), i), base, false));
  }
  if (j.contains("exemplars")) {
    const auto& ex = as_array(j["exemplars"], "exemplars");
    for (std::size_t s = 0; s < ex.size(); ++s) {
      const auto p = child(std::string("exemplars"), s);
      auto name = as_string(member(ex[s], "style", p), child(p, "style"));
      std::vector<ManifestEntry> entries;
      const auto& items = as_array(member(ex[s], "scenes", p), child(p, "scenes"));
      for (std::size_t e = 0; e < items.size(); ++e) {
        entries.push_back(entry_from(items[e], child(child(p, "scenes"), e), base, false));
        entries.back().style = name;
      }
      m.exemplars.emplace_back(std::move(name), std::move(entries));
    }
  }
  return m;
}

Scene FileSceneSource::load(std::size_t index) const {
  const auto& e = entries_.at(index);
  Scene s{read_token_grid(e.tokens), std::nullopt};
  if (e.semantics) s.semantics = read_semantic_grid(*e.semantics);
  return s;
}

}  // namespace gcs::io

namespace gcs::world {

std::filesystem::path write_benchmark(const Benchmark& bench,
                                      const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "corpus", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "corpus").string() + ": " + ec.message());

  auto write_scene = [&](const GeneratedScene& g, const fs::path& rel_stem) {
    const auto tokens = rel_stem.string() + ".tgrd";
    const auto sem = rel_stem.string() + ".sgrd";
    io::write_token_grid(out_dir / tokens, g.scene.tokens);
    nlohmann::json j{{"tokens", tokens},
                     {"semantics", nullptr},
                     {"style", bench.config.styles[g.style].name},
                     {"seed", g.seed}};
    if (g.scene.semantics) {
      io::write_semantic_grid(out_dir / sem, *g.scene.semantics);
      j["semantics"] = sem;
    }
    return j;
  };

  nlohmann::json scenes = nlohmann::json::array();
  for (std::size_t i = 0; i < bench.corpus.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%05zu", i);
    scenes.push_back(write_scene(bench.corpus[i], fs::path("corpus") / name));
  }
  nlohmann::json exemplars = nlohmann::json::array();
  for (std::size_t s = 0; s < bench.exemplars.size(); ++s) {
    const auto& style = bench.config.styles[s].name;
    const auto dir = fs::path("exemplars") / style;
    fs::create_directories(out_dir / dir, ec);
    if (ec) throw IoError("cannot create " + (out_dir / dir).string() + ": " + ec.message());
    nlohmann::json items = nlohmann::json::array();
    for (std::size_t e = 0; e < bench.exemplars[s].size(); ++e) {
      char name[32];
      std::snprintf(name, sizeof name, "exemplar_%03zu", e);
      items.push_back(write_scene(bench.exemplars[s][e], dir / name));
    }
    exemplars.push_back(nlohmann::json{{"style", style}, {"scenes", items}});
  }
  const nlohmann::json manifest{{"name", bench.config.name},
                                {"config", nlohmann::json::parse(io::to_json(bench.config))},
                                {"scenes", scenes},
                                {"exemplars", exemplars}};
  const auto path = out_dir / "manifest.json";
  io::write_text(path, manifest.dump(1));
  return path;
}

}  // namespace gcs::world
