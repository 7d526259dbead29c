#include "bundle_io.hpp"

#include <fstream>

#include "sentiaug/numerics/checkpoint.hpp"

namespace sentiaug::train::io {

using nlohmann::json;

json generator_config_json(const gan::GeneratorConfig& c) {
  return {{"vocab_size", c.vocab_size},
          {"num_categories", c.num_categories},
          {"conditioning", c.conditioning == gan::Conditioning::instance ? "instance" : "embedding"},
          {"category", c.category},
          {"noise_init", c.noise_init},
          {"d_emb", c.d_emb},
          {"d_cat", c.d_cat},
          {"d_h", c.d_h},
          {"max_len", c.max_len},
          {"init_scale", c.init_scale}};
}

gan::GeneratorConfig generator_config_from(const json& j) {
  gan::GeneratorConfig c;
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.num_categories = j.at("num_categories").get<std::size_t>();
  const auto mode = j.at("conditioning").get<std::string>();
  if (mode != "instance" && mode != "embedding") throw num::CheckpointError("unknown conditioning '" + mode + "'");
  c.conditioning = mode == "instance" ? gan::Conditioning::instance : gan::Conditioning::embedding;
  c.category = j.at("category").get<int>();
  c.noise_init = j.at("noise_init").get<bool>();
  c.d_emb = j.at("d_emb").get<std::size_t>();
  c.d_cat = j.at("d_cat").get<std::size_t>();
  c.d_h = j.at("d_h").get<std::size_t>();
  c.max_len = j.at("max_len").get<std::size_t>();
  c.init_scale = j.at("init_scale").get<double>();
  return c;
}

json discriminator_config_json(const gan::DiscriminatorConfig& c) {
  return {{"vocab_size", c.trunk.vocab_size},
          {"d_emb", c.trunk.d_emb},
          {"widths", c.trunk.widths},
          {"filters", c.trunk.filters},
          {"max_len", c.trunk.max_len},
          {"init_scale", c.trunk.init_scale},
          {"head", c.head == gan::DiscHead::sentigan ? "sentigan" : "catgan"},
          {"num_categories", c.num_categories}};
}

gan::DiscriminatorConfig discriminator_config_from(const json& j) {
  gan::DiscriminatorConfig c;
  c.trunk.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.trunk.d_emb = j.at("d_emb").get<std::size_t>();
  c.trunk.widths = j.at("widths").get<std::vector<std::size_t>>();
  c.trunk.filters = j.at("filters").get<std::size_t>();
  c.trunk.max_len = j.at("max_len").get<std::size_t>();
  c.trunk.init_scale = j.at("init_scale").get<double>();
  const auto head = j.at("head").get<std::string>();
  if (head != "sentigan" && head != "catgan") throw num::CheckpointError("unknown discriminator head '" + head + "'");
  c.head = head == "sentigan" ? gan::DiscHead::sentigan : gan::DiscHead::catgan;
  c.num_categories = j.at("num_categories").get<std::size_t>();
  return c;
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".json";
  return p;
}

void write_bundle(const std::filesystem::path& path, const std::string& kind, json meta,
                  const num::ParameterList& params) {
  meta["format"] = kBundleFormat;
  meta["version"] = kBundleVersion;
  meta["kind"] = kind;
  num::save_checkpoint(path, params);
  std::ofstream out(sidecar_path(path));
  if (!out) throw num::CheckpointError("cannot write " + sidecar_path(path).string());
  out << meta.dump(2) << '\n';
  if (!out) throw num::CheckpointError("failed writing " + sidecar_path(path).string());
}

std::pair<json, num::ParameterList> read_bundle(const std::filesystem::path& path, const std::string& kind) {
  const auto side = sidecar_path(path);
  std::ifstream in(side);
  if (!in) throw num::CheckpointError("missing checkpoint metadata " + side.string());
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::exception& e) {
    throw num::CheckpointError("corrupt checkpoint metadata " + side.string() + ": " + e.what());
  }
  if (meta.value("format", "") != kBundleFormat) throw num::CheckpointError(side.string() + ": not a GAN checkpoint");
  if (meta.value("version", -1) != kBundleVersion) {
    throw num::CheckpointError(side.string() + ": unsupported version " + meta.value("version", json(nullptr)).dump());
  }
  if (!kind.empty() && meta.value("kind", "") != kind) {
    throw num::CheckpointError(side.string() + ": holds a " + meta.value("kind", std::string("?")) +
                               " bundle, expected " + kind);
  }
  return {meta, num::load_checkpoint(path)};
}

json history_json(const std::vector<RoundRecord>& history) {
  json arr = json::array();
  for (const auto& r : history) arr.push_back(r);
  return arr;
}

std::vector<RoundRecord> history_from(const json& j) {
  std::vector<RoundRecord> out;
  for (const auto& r : j) out.push_back(r.get<RoundRecord>());
  return out;
}

}  // namespace sentiaug::train::io
