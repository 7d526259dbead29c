#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sentiaug/advtrain/history.hpp"
#include "sentiaug/balance/balance.hpp"
#include "sentiaug/corpus/labeled.hpp"
#include "sentiaug/corpus/vocab.hpp"
#include "sentiaug/expcli/config.hpp"
#include "sentiaug/expcli/report.hpp"

namespace sentiaug::exp {

class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message);
  const std::string& stage() const { return stage_; }
  nlohmann::json record() const;  // {"stage": ..., "error": ...}

 private:
  std::string stage_;
};

struct PreparedData {
  corpus::Vocab vocab;
  corpus::LabeledCorpus corpus;
  std::size_t raw_records = 0;
  std::size_t row_errors = 0;
  text::DropCounts drops;
};

// load -> preprocess -> split -> vocabulary over the real train split -> encode.
PreparedData prepare_data(const ExperimentConfig& config, std::uint64_t seed);

// Corpus directory: corpus.jsonl, vocab.json, labels.json.
void write_prepared(const std::filesystem::path& dir, const PreparedData& data);
PreparedData read_prepared(const std::filesystem::path& dir);

struct GanResult {
  balance::GeneratorBundle bundle;
  std::vector<std::vector<double>> pretrain_curves;
  std::vector<train::RoundRecord> history;
  bool loaded = false;
};

// Trains the configured GAN on the real train split, or loads config.gan.checkpoint
// when it exists. Saves to save_to when given.
GanResult train_gan(const ExperimentConfig& config, const PreparedData& data, std::uint64_t seed,
                    const std::optional<std::filesystem::path>& save_to = std::nullopt);
GanResult load_gan(const std::filesystem::path& checkpoint);

struct ArmData {
  clf::Arm arm = clf::Arm::imbalanced;
  corpus::LabeledCorpus corpus;
  nlohmann::json balance_report;  // null for the imbalanced arm
};

// The balanced arm needs a bundle; the duplicated arm never trains a GAN.
ArmData build_arm(clf::Arm arm, const ExperimentConfig& config, const PreparedData& data,
                  const balance::GeneratorBundle* bundle, std::uint64_t seed);

std::vector<clf::MetricRecord> evaluate_arm(const ExperimentConfig& config, const PreparedData& data, const ArmData& arm,
                                            std::uint64_t seed);

// Full comparison over every seed. Stage failures surface as StageError.
// Writes GAN checkpoints and balance reports under output_dir when it is set.
ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace sentiaug::exp
