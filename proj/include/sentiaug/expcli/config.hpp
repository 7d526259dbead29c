#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sentiaug/advtrain/config.hpp"
#include "sentiaug/balance/balance.hpp"
#include "sentiaug/corpus/dataset.hpp"
#include "sentiaug/corpus/labeled.hpp"
#include "sentiaug/corpus/synth.hpp"
#include "sentiaug/gantext/discriminator.hpp"
#include "sentiaug/gantext/generator.hpp"
#include "sentiaug/sentclass/classifier.hpp"
#include "sentiaug/textprep/textprep.hpp"

namespace sentiaug::exp {

enum class DataSource { csv, synthetic };

struct DatasetConfig {
  std::string id = "dataset";
  DataSource source = DataSource::csv;
  std::filesystem::path path;  // csv source
  corpus::Schema schema = corpus::Schema::labeled3;
  corpus::SynthSpec synthetic;  // synthetic source, regenerated per seed
  corpus::SplitRatios splits;
  bool stratified = true;
  std::size_t vocab_max = 20000;
  std::size_t vocab_min_freq = 1;
};

enum class GanKind { catgan, sentigan };
std::string to_string(GanKind k);
GanKind parse_gan_kind(const std::string& s);

// vocab_size and num_categories are filled in from the data.
struct GanSetup {
  GanKind kind = GanKind::catgan;
  gan::GeneratorConfig generator;
  gan::ConvTrunkConfig discriminator;
  train::TrainConfig train;
  std::optional<std::filesystem::path> checkpoint;  // loaded when present instead of training
};

struct BalanceSetup {
  balance::GenerationFilters filters;
  double oversample_cap = 0.0;
  std::size_t attempts_per_record = balance::kAttemptsPerRecord;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  text::PrepConfig prep;
  GanSetup gan;
  BalanceSetup balance;
  std::vector<std::string> classifiers = {"nb", "logreg", "svm", "tree", "adaboost", "rnn", "gru", "bilstm", "cnn"};
  clf::ClassifierHyper classifier_hyper;
  std::vector<clf::Arm> arms = {clf::Arm::imbalanced, clf::Arm::balanced};
  std::vector<std::uint64_t> seeds = {0};
  std::filesystem::path output_dir;

  // Throws std::invalid_argument.
  void validate() const;
  bool has_arm(clf::Arm a) const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace sentiaug::exp
