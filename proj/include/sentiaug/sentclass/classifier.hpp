#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sentiaug/corpus/labeled.hpp"
#include "sentiaug/corpus/tfidf.hpp"
#include "sentiaug/sentclass/metrics.hpp"
#include "sentiaug/sentclass/ml.hpp"
#include "sentiaug/sentclass/nn.hpp"

namespace sentiaug::clf {

// Model ids: nb, logreg, svm, tree, adaboost (TF-IDF learners) and
// rnn, gru, bilstm, cnn (embedding learners).
const std::vector<std::string>& all_model_ids();
bool is_neural(const std::string& model_id);  // throws std::invalid_argument on an unknown id

struct ClassifierHyper {
  MLHyper ml;
  NNHyper nn;
};

void to_json(nlohmann::json& j, const ClassifierHyper& h);
void from_json(const nlohmann::json& j, ClassifierHyper& h);

class Classifier {
 public:
  // Trains on the train split (real and synthetic). Neural models early-stop on
  // the val split, which must be real-only and nonempty.
  static Classifier fit(const std::string& model_id, const corpus::LabeledCorpus& data, std::size_t vocab_size,
                        const ClassifierHyper& hyper, std::uint64_t seed);

  const std::string& id() const { return id_; }
  bool neural() const { return nn_.has_value(); }
  std::size_t num_categories() const;
  std::vector<int> predict(const std::vector<const corpus::Record*>& records) const;
  ClsMetrics evaluate(const std::vector<const corpus::Record*>& test) const;
  const LearningCurve& curve() const { return curve_; }

  // Neural: CATG at `path` plus `path`.json. TF-IDF learners: a single JSON file.
  void save(const std::filesystem::path& path) const;
  static Classifier load(const std::filesystem::path& path);

 private:
  std::string id_;
  std::optional<corpus::TfidfModel> tfidf_;
  std::optional<MLModel> ml_;
  std::optional<NNModel> nn_;
  LearningCurve curve_;
};

enum class Arm { imbalanced, balanced, duplicated };
std::string to_string(Arm a);
Arm parse_arm(const std::string& s);

struct MetricRecord {
  std::string model_id;
  std::string dataset_id;
  Arm arm = Arm::imbalanced;
  std::uint64_t seed = 0;
  ClsMetrics metrics;
};

void to_json(nlohmann::json& j, const MetricRecord& r);
void from_json(const nlohmann::json& j, MetricRecord& r);

}  // namespace sentiaug::clf
