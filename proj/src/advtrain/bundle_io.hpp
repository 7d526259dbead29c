#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "sentiaug/advtrain/history.hpp"
#include "sentiaug/gantext/discriminator.hpp"
#include "sentiaug/gantext/generator.hpp"
#include "sentiaug/numerics/optim.hpp"

namespace sentiaug::train::io {

inline constexpr int kBundleVersion = 1;
inline constexpr const char* kBundleFormat = "sentiaug-gan";

nlohmann::json generator_config_json(const gan::GeneratorConfig& c);
gan::GeneratorConfig generator_config_from(const nlohmann::json& j);
nlohmann::json discriminator_config_json(const gan::DiscriminatorConfig& c);
gan::DiscriminatorConfig discriminator_config_from(const nlohmann::json& j);

std::filesystem::path sidecar_path(const std::filesystem::path& path);

// Writes `params` and the JSON sidecar; `meta` gets format, version and kind added.
void write_bundle(const std::filesystem::path& path, const std::string& kind, nlohmann::json meta,
                  const num::ParameterList& params);
// Reads the sidecar (checked against `kind` unless empty) and the parameter file.
std::pair<nlohmann::json, num::ParameterList> read_bundle(const std::filesystem::path& path, const std::string& kind);

nlohmann::json history_json(const std::vector<RoundRecord>& history);
std::vector<RoundRecord> history_from(const nlohmann::json& j);

}  // namespace sentiaug::train::io
