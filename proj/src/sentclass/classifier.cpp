#include "sentiaug/sentclass/classifier.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sentiaug/numerics/checkpoint.hpp"

namespace sentiaug::clf {

namespace {

constexpr const char* kFormat = "sentiaug-clf";
constexpr int kFormatVersion = 1;

std::vector<std::vector<int>> docs_of(const std::vector<const corpus::Record*>& records) {
  std::vector<std::vector<int>> out;
  out.reserve(records.size());
  for (const auto* r : records) out.push_back(r->tokens);
  return out;
}

}  // namespace

const std::vector<std::string>& all_model_ids() {
  static const std::vector<std::string> ids = {"nb", "logreg", "svm", "tree", "adaboost", "rnn", "gru", "bilstm", "cnn"};
  return ids;
}

bool is_neural(const std::string& model_id) {
  const auto& ids = all_model_ids();
  const auto it = std::find(ids.begin(), ids.end(), model_id);
  if (it == ids.end()) throw std::invalid_argument("unknown model id: " + model_id);
  return it - ids.begin() >= 5;
}

void to_json(nlohmann::json& j, const ClassifierHyper& h) {
  j = nlohmann::json{{"ml",
                      {{"alpha", h.ml.alpha},
                       {"l2", h.ml.l2},
                       {"lr", h.ml.lr},
                       {"epochs", h.ml.epochs},
                       {"max_depth", h.ml.max_depth},
                       {"min_split", h.ml.min_split},
                       {"stumps", h.ml.stumps}}},
                     {"nn", h.nn}};
}

void from_json(const nlohmann::json& j, ClassifierHyper& h) {
  h = ClassifierHyper{};
  if (j.contains("ml")) {
    const auto& m = j.at("ml");
    h.ml.alpha = m.value("alpha", h.ml.alpha);
    h.ml.l2 = m.value("l2", h.ml.l2);
    h.ml.lr = m.value("lr", h.ml.lr);
    h.ml.epochs = m.value("epochs", h.ml.epochs);
    h.ml.max_depth = m.value("max_depth", h.ml.max_depth);
    h.ml.min_split = m.value("min_split", h.ml.min_split);
    h.ml.stumps = m.value("stumps", h.ml.stumps);
    h.ml.validate();
  }
  if (j.contains("nn")) h.nn = j.at("nn").get<NNHyper>();
}

Classifier Classifier::fit(const std::string& model_id, const corpus::LabeledCorpus& data, std::size_t vocab_size,
                           const ClassifierHyper& hyper, std::uint64_t seed) {
  const auto train = data.in_split(corpus::Split::train);
  if (train.empty()) throw std::invalid_argument("Classifier::fit: empty train split");
  Classifier c;
  c.id_ = model_id;
  if (is_neural(model_id)) {
    NNHyper h = hyper.nn;
    h.seed = seed;
    auto result = train_nn(parse_nn_arch(model_id), train, data.in_split(corpus::Split::val), vocab_size,
                           data.num_categories(), h);
    c.nn_.emplace(std::move(result.model));
    c.curve_ = std::move(result.curve);
    return c;
  }
  MLHyper h = hyper.ml;
  h.seed = seed;
  const auto docs = docs_of(train);
  c.tfidf_.emplace();
  c.tfidf_->fit(docs, vocab_size);
  std::vector<int> labels;
  for (const auto* r : train) labels.push_back(r->label);
  c.ml_ = MLModel::train(parse_ml_kind(model_id), c.tfidf_->transform(docs, true), labels, data.num_categories(),
                         vocab_size, h);
  return c;
}

std::size_t Classifier::num_categories() const { return nn_ ? nn_->num_categories() : ml_->num_categories(); }

std::vector<int> Classifier::predict(const std::vector<const corpus::Record*>& records) const {
  if (nn_) return nn_->predict(records);
  return ml_->predict(tfidf_->transform(docs_of(records), true));
}

ClsMetrics Classifier::evaluate(const std::vector<const corpus::Record*>& test) const {
  require_real_slice(test, "evaluate");
  std::vector<int> truth;
  for (const auto* r : test) truth.push_back(r->label);
  return compute_metrics(truth, predict(test), num_categories());
}

void Classifier::save(const std::filesystem::path& path) const {
  if (nn_) {
    nn_->save(path);
    return;
  }
  const nlohmann::json j = {{"format", kFormat},
                            {"version", kFormatVersion},
                            {"model_id", id_},
                            {"tfidf", {{"num_docs", tfidf_->num_docs()}, {"df", tfidf_->df_counts()}}},
                            {"model", *ml_}};
  std::ofstream out(path);
  if (!out) throw num::CheckpointError("cannot write " + path.string());
  out << j.dump() << '\n';
}

Classifier Classifier::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw num::CheckpointError("missing classifier file " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  Classifier c;
  if (in.gcount() == 4 && std::string(magic, 4) == "CATG") {
    c.nn_.emplace(NNModel::load(path));
    c.id_ = to_string(c.nn_->arch());
    return c;
  }
  in.clear();
  in.seekg(0);
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("format").get<std::string>() != kFormat || j.at("version").get<int>() != kFormatVersion) {
      throw num::CheckpointError("unsupported classifier format in " + path.string());
    }
    c.id_ = j.at("model_id").get<std::string>();
    c.tfidf_ = corpus::TfidfModel::from_counts(j.at("tfidf").at("num_docs").get<std::size_t>(),
                                               j.at("tfidf").at("df").get<std::vector<std::size_t>>());
    c.ml_ = j.at("model").get<MLModel>();
    if (to_string(c.ml_->kind()) != c.id_) throw num::CheckpointError("model id does not match stored model");
    return c;
  } catch (const num::CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw num::CheckpointError("corrupt classifier file " + path.string() + ": " + e.what());
  }
}

std::string to_string(Arm a) {
  switch (a) {
    case Arm::imbalanced: return "imbalanced";
    case Arm::balanced: return "balanced";
    case Arm::duplicated: return "duplicated";
  }
  return "?";
}

Arm parse_arm(const std::string& s) {
  for (Arm a : {Arm::imbalanced, Arm::balanced, Arm::duplicated})
    if (to_string(a) == s) return a;
  throw std::invalid_argument("unknown arm: " + s);
}

void to_json(nlohmann::json& j, const MetricRecord& r) {
  j = nlohmann::json{{"model_id", r.model_id},
                     {"dataset_id", r.dataset_id},
                     {"arm", to_string(r.arm)},
                     {"seed", r.seed},
                     {"metrics", r.metrics}};
}

void from_json(const nlohmann::json& j, MetricRecord& r) {
  r.model_id = j.at("model_id").get<std::string>();
  r.dataset_id = j.at("dataset_id").get<std::string>();
  r.arm = parse_arm(j.at("arm").get<std::string>());
  r.seed = j.at("seed").get<std::uint64_t>();
  r.metrics = j.at("metrics").get<ClsMetrics>();
}

}  // namespace sentiaug::clf
